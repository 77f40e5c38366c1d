from __future__ import annotations

import pytest

from promptdensity.errors import EmptyPromptError, PromptDensityError
from promptdensity.lexicon import default_lexicon
from promptdensity.rewrite import (
    Severity,
    densify,
    dilute,
    gradient_variants,
    instruction_last,
    lint,
    pad,
    parse_templates,
)
from promptdensity.scoring import LabelKind, analyze, classify_tokens
from promptdensity.tokens import TokenKind, tokenize


# ---------------------------------------------------------------------------
# lint
# ---------------------------------------------------------------------------

def test_lint_flags_filler_preamble():
    diags = lint("Can you please explain X")
    removals = [d for d in diags if d.severity is Severity.REMOVE_SAFE]
    assert len(removals) == 1
    assert removals[0].rule == "filler-preamble"
    assert "Can you please explain X"[removals[0].start : removals[0].end] == "Can you please"


def test_lint_nominalization_phrase_suggests_verb():
    diags = lint("provide a derivation of the loss")
    suggestion = [d for d in diags if d.rule == "abstract-nominalization"][0]
    assert suggestion.severity is Severity.SUGGEST
    assert suggestion.replacement == "derive"


def test_lint_dense_text_has_no_removals():
    diags = lint("Derive dL/dW step-by-step.")
    assert [d for d in diags if d.severity is Severity.REMOVE_SAFE] == []


def test_lint_vague_quantity():
    diags = lint("Explain it briefly and make it fast")
    vague = [d for d in diags if d.rule == "vague-quantity"]
    assert {d.replacement for d in vague} == {"in 80 words", None}


def test_lint_redundant_token_flagged():
    diags = lint("gradient of the gradient")
    redundant = [d for d in diags if d.rule == "redundant-restatement"]
    assert len(redundant) == 1


def test_lint_remove_safe_spans_non_overlapping(corpus):
    for text in corpus:
        removals = [d for d in lint(text) if d.severity is Severity.REMOVE_SAFE]
        spans = sorted((d.start, d.end) for d in removals)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2


def test_lint_empty_prompt():
    with pytest.raises(EmptyPromptError):
        lint("")


# ---------------------------------------------------------------------------
# densify
# ---------------------------------------------------------------------------

def test_densify_arc_diluted_reaches_dense_band(arc_variants):
    result = densify(arc_variants["diluted"])
    assert result.sde_after >= 0.65
    assert result.sde_after >= result.sde_before
    for needle in ("A.", "B.", "C.", "D.", "mixture"):
        assert needle in result.output


def test_densify_fixed_point(arc_variants, corpus):
    for text in [arc_variants["diluted"], arc_variants["standard"]] + corpus[:8]:
        once = densify(text)
        twice = densify(once.output)
        assert twice.output == once.output


def test_densify_identity_on_dense_text(arc_variants):
    result = densify(arc_variants["ultra_dense"])
    assert result.output == arc_variants["ultra_dense"]
    assert result.applied == ()


def test_densify_never_deletes_semantic_content(corpus):
    lex = default_lexicon()
    for text in corpus:
        seq = tokenize(text)
        labels = classify_tokens(seq, lex)
        keep_words = {
            seq.tokens[i].text.lower()
            for i in range(len(seq.tokens))
            if labels[i].kind is LabelKind.SEMANTIC
            and not labels[i].redundant
            and seq.tokens[i].kind is not TokenKind.PUNCTUATION
        }
        out = densify(text).output
        out_words = {t.text.lower() for t in tokenize(out).tokens}
        # replacements may rewrite mapped nominalizations, vague words, and
        # interrogative scaffolds
        from promptdensity import wordlists

        replaceable = set(wordlists.NOMINALIZATION_VERBS) | set(wordlists.VAGUE_QUANTITY_WORDS)
        for phrase, _repl in wordlists.QUESTION_PATTERNS:
            replaceable.update(phrase.split())
        missing = keep_words - out_words - replaceable
        assert not missing, (text, missing)


def test_densify_applies_vague_replacement():
    result = densify("Explain artificial intelligence briefly.")
    assert "in 80 words" in result.output
    assert "briefly" not in result.output
    assert result.sde_after >= result.sde_before


def test_densify_nominalization_phrase():
    result = densify("Please provide a derivation of the loss gradient.")
    assert "derive" in result.output.lower()
    assert "derivation" not in result.output.lower()


def test_densify_monotone_on_corpus(corpus):
    for text in corpus:
        result = densify(text)
        assert result.sde_after >= result.sde_before - 1e-12


def test_densify_empty_result_refused():
    with pytest.raises(PromptDensityError):
        densify("maybe maybe maybe")


def test_densify_empty_input():
    with pytest.raises(EmptyPromptError):
        densify("")


# ---------------------------------------------------------------------------
# dilute
# ---------------------------------------------------------------------------

def test_dilute_deterministic(corpus):
    for text in corpus[:5]:
        assert dilute(text, seed=3) == dilute(text, seed=3)


def test_dilute_seed_changes_output(corpus):
    text = corpus[0]
    assert dilute(text, seed=1) != dilute(text, seed=2)


def test_dilute_makes_diluted_class(corpus):
    hits = sum(1 for text in corpus if analyze(dilute(text, seed=11)).klass.value == "diluted")
    assert hits >= 18


def test_dilute_word_growth(corpus):
    for text in corpus:
        grown = tokenize(dilute(text, seed=11)).word_count
        assert grown >= 1.5 * tokenize(text).word_count


def test_dilute_never_increases_score(corpus):
    for text in corpus:
        assert analyze(dilute(text, seed=4)).sde <= analyze(text).sde + 1e-12


def test_dilute_preserves_original_tokens_in_order(corpus):
    for text in corpus[:8]:
        original = [t.text for t in tokenize(text).tokens if t.kind is not TokenKind.PUNCTUATION]
        output = [t.text for t in tokenize(dilute(text, seed=9)).tokens
                  if t.kind is not TokenKind.PUNCTUATION]
        it = iter(output)
        assert all(word in it for word in original)  # subsequence check


def test_dilute_rejects_bad_args():
    with pytest.raises(EmptyPromptError):
        dilute("   ")
    with pytest.raises(PromptDensityError):
        dilute("fine text", intensity=0)


# ---------------------------------------------------------------------------
# pad
# ---------------------------------------------------------------------------

def test_pad_shape():
    out = pad("Solve 2+2.", 10)
    assert out.startswith("Solve 2+2.")
    assert out.split()[2:] == ["..."] * 10


def test_pad_zero_is_identity():
    assert pad("anything here", 0) == "anything here"


def test_pad_density_neutral(corpus):
    for text in corpus:
        before = analyze(text)
        after = analyze(pad(text, 50))
        assert abs(after.sde - before.sde) <= 0.01
        assert after.word_count == before.word_count
        assert len(pad(text, 50)) > len(text)


def test_pad_negative_rejected():
    with pytest.raises(PromptDensityError):
        pad("x", -1)


# ---------------------------------------------------------------------------
# gradient_variants
# ---------------------------------------------------------------------------

TARGETS = [0.20, 0.35, 0.50, 0.65, 0.80]


def test_gradient_bands_on_corpus(corpus):
    total = hit = 0
    for text in corpus:
        for variant in gradient_variants(text, TARGETS, seed=3):
            if not variant.reachable:
                continue
            total += 1
            if abs(variant.achieved - variant.target) <= 0.07:
                hit += 1
    assert hit / total >= 0.90


def test_gradient_monotone_and_deterministic(corpus):
    for text in corpus[:6]:
        first = gradient_variants(text, TARGETS, seed=3)
        second = gradient_variants(text, TARGETS, seed=3)
        assert first == second
        reachable = [v for v in first if v.reachable]
        achieved = [v.achieved for v in reachable]
        assert achieved == sorted(achieved)


def test_gradient_unreachable_targets_reported():
    variants = gradient_variants("Can you maybe tell me about things?", [1.0], seed=1)
    assert len(variants) == 1
    if variants[0].reachable:
        assert variants[0].achieved >= 0.95 - 0.05
    else:
        assert variants[0].achieved < 1.0


def test_gradient_rejects_bad_targets():
    with pytest.raises(PromptDensityError):
        gradient_variants("text here", [0.0, 0.5])
    with pytest.raises(PromptDensityError):
        gradient_variants("text here", [0.5, 1.2])


# ---------------------------------------------------------------------------
# instruction_last
# ---------------------------------------------------------------------------

def test_instruction_moved_to_end():
    text = "Reply: The answer is <LETTER>. Which is a mixture? A. rock B. mud"
    result = instruction_last(text)
    assert result.moved and result.found
    assert result.output.endswith("Reply: The answer is <LETTER>.")
    assert result.output.startswith("Which is a mixture?")


def test_instruction_last_idempotent(arc_variants):
    moved = instruction_last("Reply: The answer is <LETTER>. Which is a mixture? A. x B. y")
    again = instruction_last(moved.output)
    assert again.output == moved.output
    assert not again.moved


def test_instruction_already_last_unchanged(arc_variants):
    for text in arc_variants.values():
        result = instruction_last(text)
        assert result.output == text
        assert result.found


def test_no_instruction_warns():
    result = instruction_last("Just a plain question about rocks?")
    assert result.output == "Just a plain question about rocks?"
    assert not result.found and not result.moved


def test_question_content_not_mistaken_for_instruction():
    text = "What is the answer to life? Explain your reasoning."
    result = instruction_last(text)
    assert result.output == text


# ---------------------------------------------------------------------------
# template bank parsing
# ---------------------------------------------------------------------------

def test_template_bank_requires_all_categories():
    with pytest.raises(Exception):
        parse_templates("PREAMBLE\tHey there.\n")


def test_template_bank_rejects_unknown_category():
    with pytest.raises(Exception):
        parse_templates("NOISE\thello\n")
