from __future__ import annotations

import random

import pytest

from promptdensity.errors import EmptyPromptError, PromptDensityError
from promptdensity.lexicon import default_lexicon
from promptdensity.scoring import (
    DensityClass,
    LabelKind,
    analyze,
    classify_tokens,
    component_scores,
    density_class,
    density_score,
    stem,
)
from promptdensity.tokens import TokenKind, tokenize

from conftest import ARC_CLASSES, ARC_TARGETS


# ---------------------------------------------------------------------------
# classify_tokens
# ---------------------------------------------------------------------------

def labels_for(text):
    seq = tokenize(text)
    return seq, classify_tokens(seq, default_lexicon())


def test_hedge_word_not_semantic():
    _, labels = labels_for("maybe")
    assert labels[0].kind is LabelKind.HEDGE


def test_table_rewrite_example_classification():
    seq, labels = labels_for("List 5 causes of the French Revolution with dates.")
    by_text = {seq.tokens[i].text: labels[i] for i in range(len(seq.tokens))}
    assert by_text["5"].kind is LabelKind.SEMANTIC and by_text["5"].concrete
    for word in ("the", "of", "with"):
        assert by_text[word].kind is LabelKind.FUNCTION
    for word in ("French", "Revolution"):
        assert by_text[word].kind is LabelKind.SEMANTIC
        assert by_text[word].concrete


def test_repeated_word_marked_redundant():
    seq, labels = labels_for("cause of failure cause")
    semantic = [(seq.tokens[i].text, labels[i]) for i in range(len(labels))
                if labels[i].kind is LabelKind.SEMANTIC]
    assert [lab.redundant for _, lab in semantic] == [False, False, True]
    # redundant repeats are never concrete
    assert semantic[2][1].concrete is False


def test_stemmer_folds_plural_and_inflection():
    assert stem("mixtures") == "mixtur"
    assert stem("sorted") == "sort"
    assert stem("running") == "runn"
    assert stem("was") == "was"  # too short to strip


def test_option_label_is_not_the_article():
    seq, labels = labels_for("pick one: A. air B. salt")
    by_text = {seq.tokens[i].text: labels[i] for i in range(len(seq.tokens))}
    assert by_text["A"].kind is LabelKind.SEMANTIC
    assert by_text["B"].kind is LabelKind.SEMANTIC


def test_numbers_math_symbols_units_concrete():
    seq, labels = labels_for("Add 40 km + 2 tokens")
    for i, tok in enumerate(seq.tokens):
        if tok.kind in (TokenKind.NUMBER, TokenKind.MATH_SYMBOL):
            assert labels[i].concrete
    by_text = {seq.tokens[i].text: labels[i] for i in range(len(seq.tokens))}
    assert by_text["km"].concrete
    assert by_text["tokens"].concrete


def test_named_entity_heuristic_mid_sentence_only():
    # "France" is capitalized mid-sentence: named-entity, concrete.
    seq, labels = labels_for("Paris is nice. Nice is a city in France.")
    france = [labels[i] for i, tok in enumerate(seq.tokens) if tok.text == "France"][0]
    assert france.concrete


def test_nominalization_and_abstract_words_not_concrete():
    seq, labels = labels_for("provide the derivation of the statement about intelligence")
    by_text = {seq.tokens[i].text: labels[i] for i in range(len(seq.tokens))}
    assert by_text["derivation"].concrete is False
    assert by_text["statement"].concrete is False  # -ment suffix
    assert by_text["intelligence"].concrete is False  # -ence suffix


# ---------------------------------------------------------------------------
# component_scores / density_score / density_class
# ---------------------------------------------------------------------------

def test_component_scores_maximal_case():
    seq, labels = labels_for("Na + Cl salt 42")
    s, r, c = component_scores(labels, seq.word_count)
    assert (s, r, c) == (seq.word_count, 0.0, 1.0)


def test_component_scores_degenerate_zero_semantic():
    seq, labels = labels_for("maybe the of")
    s, r, c = component_scores(labels, seq.word_count)
    assert (s, r, c) == (0, 0.0, 0.0)
    assert density_score(s, seq.word_count, r, c) == 0.0


def test_component_scores_direct_arithmetic():
    from promptdensity.scoring import TokenLabel

    labels = tuple(
        [TokenLabel(LabelKind.SEMANTIC, redundant=i < 3, concrete=3 <= i < 9) for i in range(12)]
    )
    s, r, c = component_scores(labels, 20)
    assert s == 12
    assert r == pytest.approx(0.25)
    assert c == pytest.approx(0.5)


def test_component_scores_empty_prompt_error():
    with pytest.raises(EmptyPromptError):
        component_scores((), 0)


def test_density_score_formula():
    assert density_score(12, 20, 0.25, 0.6) == pytest.approx(0.27)
    assert density_score(20, 20, 0.0, 1.0) == 1.0
    assert density_score(0, 20, 0.0, 0.0) == 0.0


def test_density_score_domain_errors():
    with pytest.raises(PromptDensityError):
        density_score(1, 0, 0.0, 1.0)
    with pytest.raises(PromptDensityError):
        density_score(5, 4, 0.0, 1.0)
    with pytest.raises(PromptDensityError):
        density_score(1, 2, 1.5, 1.0)


@pytest.mark.parametrize(
    "score,klass",
    [
        (0.0, DensityClass.DILUTED),
        (0.39999, DensityClass.DILUTED),
        (0.40, DensityClass.STANDARD),
        (0.64999, DensityClass.STANDARD),
        (0.65, DensityClass.DENSE),
        (0.80, DensityClass.DENSE),
        (0.80001, DensityClass.ULTRA_DENSE),
        (0.87, DensityClass.ULTRA_DENSE),
        (1.0, DensityClass.ULTRA_DENSE),
    ],
)
def test_density_class_boundaries(score, klass):
    assert density_class(score) is klass


def test_density_class_out_of_range():
    with pytest.raises(PromptDensityError):
        density_class(1.2)
    with pytest.raises(PromptDensityError):
        density_class(-0.1)


# ---------------------------------------------------------------------------
# analyze + calibration
# ---------------------------------------------------------------------------

def test_analyze_empty_prompt():
    with pytest.raises(EmptyPromptError):
        analyze("")
    with pytest.raises(EmptyPromptError):
        analyze("... !!!")


def test_arc_calibration_scores(arc_variants):
    for condition, text in arc_variants.items():
        a = analyze(text)
        assert abs(a.sde - ARC_TARGETS[condition]) <= 0.15, condition
        assert a.klass.value == ARC_CLASSES[condition], condition


def test_arc_strict_ordering(arc_variants):
    scores = {c: analyze(t).sde for c, t in arc_variants.items()}
    assert scores["diluted"] < scores["standard"] < scores["ultra_dense"]


@pytest.mark.parametrize(
    "text,klass",
    [
        ("Can you maybe help me understand what AI is?", DensityClass.DILUTED),
        ("Explain artificial intelligence briefly.", DensityClass.STANDARD),
        ("How does backpropagation update weights step-by-step?", DensityClass.DENSE),
        ("Derive backpropagation gradient: dL/dW for cross-entropy loss.", DensityClass.ULTRA_DENSE),
    ],
)
def test_density_class_examples(text, klass):
    assert analyze(text).klass is klass


def test_formula_consistency_invariant(corpus):
    for text in corpus:
        a = analyze(text)
        expected = (a.semantic_count / a.word_count) * (1 - a.redundancy) * a.concreteness
        assert a.sde == pytest.approx(expected, abs=1e-12)
        assert 0.0 <= a.sde <= 1.0
        assert a.semantic_count <= a.word_count


def test_analyze_deterministic(corpus):
    for text in corpus:
        assert analyze(text) == analyze(text)


def _noise_token_indices(text):
    seq = tokenize(text)
    labels = classify_tokens(seq, default_lexicon())
    noise = (LabelKind.FILLER, LabelKind.HEDGE, LabelKind.META, LabelKind.TRANSITIONAL)
    return seq, [i for i, lab in enumerate(labels) if lab.kind in noise]


def test_deleting_noise_token_never_decreases_score(corpus):
    for text in corpus + [
        "Can you please maybe explain the sorting algorithm quickly for me?"
    ]:
        seq, noise = _noise_token_indices(text)
        before = analyze(text).sde
        for idx in noise:
            kept = [t.text for i, t in enumerate(seq.tokens) if i != idx]
            reduced = " ".join(kept)
            if tokenize(reduced).word_count == 0:
                continue
            assert analyze(reduced).sde >= before - 1e-12


def test_inserting_duplicate_word_never_increases_score(corpus):
    # Duplicates of redundancy-eligible words (multi-letter WORD tokens).
    rng = random.Random(99)
    for text in corpus:
        seq = tokenize(text)
        labels = classify_tokens(seq, default_lexicon())
        words = [
            i
            for i, (tok, lab) in enumerate(zip(seq.tokens, labels))
            if lab.kind is LabelKind.SEMANTIC and tok.kind is TokenKind.WORD and len(tok.text) >= 2
        ]
        if not words:
            continue
        before = analyze(text).sde
        for _ in range(3):
            idx = words[rng.randrange(len(words))]
            dup = seq.tokens[idx].text
            pieces = [t.text for t in seq.tokens]
            insert_at = rng.randrange(idx + 1, len(pieces) + 1)
            pieces.insert(insert_at, dup)
            assert analyze(" ".join(pieces)).sde <= before + 1e-12


def test_report_shape(arc_variants):
    report = analyze(arc_variants["standard"]).to_report()
    assert set(report) == {"sde", "class", "W", "S", "R", "C", "labels"}
    assert len(report["labels"]) == len(tokenize(arc_variants["standard"]).tokens)
    first = report["labels"][0]
    assert set(first) == {"text", "span", "kind", "label", "redundant", "concrete"}
