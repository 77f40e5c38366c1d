"""Lint diagnostics and density-changing prompt transforms.

``lint`` reports removable noise (lexicon matches, redundant repeats) and
suggestions (nominalizations, vague quantities). ``densify`` applies the
safe edits; ``dilute`` does the reverse with a seeded template bank;
``pad`` appends density-neutral period groups; ``gradient_variants``
steers a prompt toward a ladder of score targets; ``instruction_last``
moves the output-format instruction to the end.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from . import wordlists
from .errors import EmptyPromptError, LexiconFormatError, PromptDensityError
from .lexicon import Category, Lexicon, default_lexicon, match_phrases
from .scoring import (
    DEFAULT_CONFIG,
    LabelKind,
    ScoreConfig,
    analyze,
    classify_tokens,
    component_scores,
    density_score,
)
from .tokens import Token, TokenKind, TokenSequence, tokenize


class Severity(Enum):
    REMOVE_SAFE = "remove_safe"
    SUGGEST = "suggest"


@dataclass(frozen=True)
class Diagnostic:
    """One lint finding over a byte span of the analyzed text."""

    rule: str
    start: int
    end: int
    message: str
    severity: Severity
    replacement: str | None = None

    def to_report(self) -> dict:
        return {
            "rule": self.rule,
            "span": [self.start, self.end],
            "severity": self.severity.value,
            "message": self.message,
            "replacement": self.replacement,
        }


@dataclass(frozen=True)
class RewriteResult:
    """Transformed text with the before/after density scores."""

    output: str
    applied: tuple[Diagnostic, ...]
    sde_before: float
    sde_after: float
    structural_edits: tuple[str, ...] = ()


@dataclass(frozen=True)
class InstructionPlacement:
    """Result of the instruction-last reordering."""

    output: str
    found: bool
    moved: bool


_RULE_BY_CATEGORY = {
    Category.FILLER: ("filler-preamble", "polite filler carries no task information"),
    Category.HEDGE: ("hedge", "modal softener adds no information"),
    Category.META: ("meta-commentary", "self-referential framing carries no task information"),
    Category.TRANSITIONAL: ("transitional-phrase", "transitional phrase carries no semantic load"),
}

# Determiners and be/do auxiliaries that telegraphic style can drop.
_ELIDABLE = frozenset(
    "a an the this these those is are was were be been being do does did".split()
)

_CONJUNCTIONS = frozenset(("and", "or", "but", "nor"))
_PREPOSITIONS = frozenset("of in on at by for with to from about into over under".split())


# ---------------------------------------------------------------------------
# Template bank
# ---------------------------------------------------------------------------

class TemplateCategory(Enum):
    PREAMBLE = "PREAMBLE"
    HEDGE_INSERT = "HEDGE_INSERT"
    RESTATE_FRAME = "RESTATE_FRAME"


@dataclass(frozen=True)
class TemplateBank:
    """Fixed sentence/phrase bank backing the dilution transform."""

    preambles: tuple[str, ...]
    hedges: tuple[str, ...]
    frames: tuple[str, ...]


def parse_templates(content: str) -> TemplateBank:
    buckets: dict[TemplateCategory, list[str]] = {c: [] for c in TemplateCategory}
    for lineno, line in enumerate(content.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "\t" not in line:
            raise LexiconFormatError("expected CATEGORY<TAB>text", lineno)
        cat_text, _, value = line.partition("\t")
        try:
            category = TemplateCategory(cat_text.strip())
        except ValueError:
            raise LexiconFormatError(f"unknown category {cat_text.strip()!r}", lineno) from None
        value = value.strip()
        if not value:
            raise LexiconFormatError("empty template", lineno)
        buckets[category].append(value)
    bank = TemplateBank(
        preambles=tuple(buckets[TemplateCategory.PREAMBLE]),
        hedges=tuple(buckets[TemplateCategory.HEDGE_INSERT]),
        frames=tuple(buckets[TemplateCategory.RESTATE_FRAME]),
    )
    if not (bank.preambles and bank.hedges and bank.frames):
        raise LexiconFormatError("template bank must provide all three categories")
    return bank


def load_templates(path: str | None = None) -> TemplateBank:
    if path is None:
        content = resources.files("promptdensity.data").joinpath("templates.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
    return parse_templates(content)


_DEFAULT_BANK: TemplateBank | None = None


def default_templates() -> TemplateBank:
    global _DEFAULT_BANK
    if _DEFAULT_BANK is None:
        _DEFAULT_BANK = load_templates()
    return _DEFAULT_BANK


# ---------------------------------------------------------------------------
# Lint
# ---------------------------------------------------------------------------

def _word_indices(tokens: tuple[Token, ...]) -> list[int]:
    return [i for i, t in enumerate(tokens) if t.kind is not TokenKind.PUNCTUATION]


def _nominalization_phrases(
    seq: TokenSequence, claimed: set[int]
) -> list[tuple[int, int, str]]:
    """Light-verb phrases like 'provide a derivation of' -> 'derive'.

    Returns (token start, token end, replacement verb) triples over
    unclaimed tokens.
    """
    tokens = seq.tokens
    out: list[tuple[int, int, str]] = []
    words = _word_indices(tokens)
    for pos, i in enumerate(words):
        if i in claimed or tokens[i].text.lower() not in wordlists.LIGHT_VERBS:
            continue
        j = pos + 1
        if j < len(words) and tokens[words[j]].text.lower() in ("a", "an", "the"):
            j += 1
        if j >= len(words):
            continue
        noun = tokens[words[j]].text.lower()
        verb = wordlists.NOMINALIZATION_VERBS.get(noun)
        if verb is None:
            continue
        k = j + 1
        if k < len(words) and tokens[words[k]].text.lower() in ("of", "for"):
            end_idx = words[k]
        else:
            end_idx = words[j]
        if any(t in claimed for t in range(i, end_idx + 1)):
            continue
        out.append((i, end_idx + 1, verb))
    return out


def lint(
    text: str,
    lex: Lexicon | None = None,
    config: ScoreConfig = DEFAULT_CONFIG,
) -> list[Diagnostic]:
    """Produce ordered diagnostics for one prompt."""
    lex = lex if lex is not None else default_lexicon()
    seq = tokenize(text)
    if seq.word_count == 0:
        raise EmptyPromptError("empty prompt")
    labels = classify_tokens(seq, lex, config)
    tokens = seq.tokens
    diags: list[Diagnostic] = []
    claimed: set[int] = set()

    for m in match_phrases(seq, lex):
        rule, message = _RULE_BY_CATEGORY[m.category]
        diags.append(
            Diagnostic(
                rule=rule,
                start=tokens[m.start].start,
                end=tokens[m.end - 1].end,
                message=f"{message}: {m.phrase!r}",
                severity=Severity.REMOVE_SAFE,
            )
        )
        claimed.update(range(m.start, m.end))

    for i, (tok, lab) in enumerate(zip(tokens, labels)):
        if lab.kind is LabelKind.SEMANTIC and lab.redundant:
            diags.append(
                Diagnostic(
                    rule="redundant-restatement",
                    start=tok.start,
                    end=tok.end,
                    message=f"{tok.text!r} repeats an earlier concept",
                    severity=Severity.REMOVE_SAFE,
                )
            )
            claimed.add(i)

    suggested: set[int] = set()
    for start_i, end_i, verb in _nominalization_phrases(seq, claimed):
        diags.append(
            Diagnostic(
                rule="abstract-nominalization",
                start=tokens[start_i].start,
                end=tokens[end_i - 1].end,
                message=f"prefer the active verb {verb!r}",
                severity=Severity.SUGGEST,
                replacement=verb,
            )
        )
        suggested.update(range(start_i, end_i))

    for i, (tok, lab) in enumerate(zip(tokens, labels)):
        if i in claimed or i in suggested or tok.kind is TokenKind.PUNCTUATION:
            continue
        lower = tok.text.lower()
        if lower in wordlists.NOMINALIZATION_VERBS:
            diags.append(
                Diagnostic(
                    rule="abstract-nominalization",
                    start=tok.start,
                    end=tok.end,
                    message=f"nominalized form; prefer {wordlists.NOMINALIZATION_VERBS[lower]!r}",
                    severity=Severity.SUGGEST,
                )
            )
        elif lower in wordlists.VAGUE_QUANTITY_WORDS:
            replacement = wordlists.VAGUE_QUANTITY_WORDS[lower]
            hint = f"replace with {replacement!r}" if replacement else "quantify it"
            diags.append(
                Diagnostic(
                    rule="vague-quantity",
                    start=tok.start,
                    end=tok.end,
                    message=f"vague quantity {tok.text!r}; {hint}",
                    severity=Severity.SUGGEST,
                    replacement=replacement,
                )
            )
    diags.sort(key=lambda d: (d.start, d.end))
    return diags


# ---------------------------------------------------------------------------
# Densify
# ---------------------------------------------------------------------------

def _question_scaffolds(seq: TokenSequence, claimed: set[int]) -> list[tuple[int, int, str]]:
    tokens = seq.tokens
    out: list[tuple[int, int, str]] = []
    for phrase, replacement in wordlists.QUESTION_PATTERNS:
        words = phrase.split(" ")
        for i in range(len(tokens) - len(words) + 1):
            if any((i + o) in claimed for o in range(len(words))):
                continue
            if all(
                tokens[i + o].kind is not TokenKind.PUNCTUATION
                and tokens[i + o].text.lower() == w
                for o, w in enumerate(words)
            ):
                out.append((i, i + len(words), replacement))
                claimed.update(range(i, i + len(words)))
    out.sort()
    return out


def _rebuild(
    tokens: tuple[Token, ...],
    drop: set[int],
    replace: dict[int, tuple[int, str]],
) -> str:
    """Reassemble surviving tokens, keeping original attachment of adjacent
    tokens and single spaces elsewhere. ``replace`` maps a start index to
    (end index, replacement text)."""
    pieces: list[str] = []
    prev_end: int | None = None
    i = 0
    while i < len(tokens):
        if i in replace:
            end, repl = replace[i]
            if pieces:
                pieces.append(" ")
            pieces.append(repl)
            prev_end = None
            i = end
            continue
        if i in drop:
            i += 1
            continue
        tok = tokens[i]
        if pieces:
            pieces.append("" if prev_end == tok.start else " ")
        pieces.append(tok.text)
        prev_end = tok.end
        i += 1
    return "".join(pieces)


def _densify_round(
    text: str,
    lex: Lexicon,
    config: ScoreConfig,
) -> tuple[str, list[Diagnostic], list[str]] | None:
    """One densification pass; None when the text is already stable."""
    seq = tokenize(text)
    if seq.word_count == 0:
        return None
    labels = classify_tokens(seq, lex, config)
    s, r, c = component_scores(labels, seq.word_count)
    analysis_sde = density_score(s, seq.word_count, r, c)
    tokens = seq.tokens
    applied: list[Diagnostic] = []
    notes: list[str] = []
    drop: set[int] = set()
    replace: dict[int, tuple[int, str]] = {}
    claimed: set[int] = set()

    def claim(start: int, end: int) -> None:
        claimed.update(range(start, end))

    for m in match_phrases(seq, lex):
        rule, message = _RULE_BY_CATEGORY[m.category]
        drop.update(range(m.start, m.end))
        claim(m.start, m.end)
        applied.append(
            Diagnostic(rule, tokens[m.start].start, tokens[m.end - 1].end,
                       f"{message}: {m.phrase!r}", Severity.REMOVE_SAFE)
        )
    for i, (tok, lab) in enumerate(zip(tokens, labels)):
        if lab.kind is LabelKind.SEMANTIC and lab.redundant:
            drop.add(i)
            claimed.add(i)
            applied.append(
                Diagnostic("redundant-restatement", tok.start, tok.end,
                           f"{tok.text!r} repeats an earlier concept", Severity.REMOVE_SAFE)
            )

    for start_i, end_i, repl in _question_scaffolds(seq, claimed):
        replace[start_i] = (end_i, repl)
        notes.append(f"compressed interrogative scaffold to {repl!r}")

    for start_i, end_i, verb in _nominalization_phrases(seq, claimed):
        replace[start_i] = (end_i, verb)
        claim(start_i, end_i)
        applied.append(
            Diagnostic("abstract-nominalization", tokens[start_i].start,
                       tokens[end_i - 1].end, f"prefer the active verb {verb!r}",
                       Severity.SUGGEST, replacement=verb)
        )

    for i, tok in enumerate(tokens):
        if i in claimed or tok.kind is TokenKind.PUNCTUATION:
            continue
        lower = tok.text.lower()
        repl = wordlists.VAGUE_QUANTITY_WORDS.get(lower)
        if repl:
            replace[i] = (i + 1, repl)
            claimed.add(i)
            applied.append(
                Diagnostic("vague-quantity", tok.start, tok.end,
                           f"vague quantity {tok.text!r}; replace with {repl!r}",
                           Severity.SUGGEST, replacement=repl)
            )

    # Telegraphic elision of determiners/auxiliaries while the prompt is
    # still below the dense band; never touches semantic tokens.
    if analysis_sde < config.dense_from:
        for i, (tok, lab) in enumerate(zip(tokens, labels)):
            if i in claimed or lab.kind is not LabelKind.FUNCTION:
                continue
            if tok.kind is TokenKind.WORD and tok.text.lower() in _ELIDABLE:
                drop.add(i)
                claimed.add(i)
                notes.append(f"elided function word {tok.text!r}")

    # Orphan cleanup: conjunctions that lost a neighbour, prepositions that
    # lost their object, and punctuation whose host word was removed.
    removed = drop | set(
        idx for start, (end, _r) in replace.items() for idx in range(start, end)
    )
    word_idx = _word_indices(tokens)
    for pos, i in enumerate(word_idx):
        if i in removed or tokens[i].kind is not TokenKind.WORD:
            continue
        lower = tokens[i].text.lower()
        prev_i = word_idx[pos - 1] if pos > 0 else None
        next_i = word_idx[pos + 1] if pos + 1 < len(word_idx) else None
        if lower in _CONJUNCTIONS and (
            (prev_i is not None and prev_i in removed)
            or (next_i is not None and next_i in removed)
            or next_i is None
        ):
            drop.add(i)
            notes.append(f"dropped orphaned conjunction {tokens[i].text!r}")
        elif lower in _PREPOSITIONS and (next_i is None or next_i in removed):
            if i not in replace:
                drop.add(i)
                notes.append(f"dropped orphaned preposition {tokens[i].text!r}")
    removed = drop | set(
        idx for start, (end, _r) in replace.items() for idx in range(start, end)
    )
    for i, tok in enumerate(tokens):
        if tok.kind is TokenKind.PUNCTUATION and i > 0 and (i - 1) in removed and i not in removed:
            drop.add(i)

    if not drop and not replace:
        return None
    rebuilt = _rebuild(tokens, drop, replace)
    return rebuilt, applied, notes


def densify(
    text: str,
    lex: Lexicon | None = None,
    config: ScoreConfig = DEFAULT_CONFIG,
) -> RewriteResult:
    """Apply all safe deletions and deterministic replacements, repeatedly,
    until the text is stable. Raises if the result would be empty."""
    lex = lex if lex is not None else default_lexicon()
    before = analyze(text, lex, config)
    current = text
    all_applied: list[Diagnostic] = []
    all_notes: list[str] = []
    for _ in range(10):
        step = _densify_round(current, lex, config)
        if step is None:
            break
        rebuilt, applied, notes = step
        if tokenize(rebuilt).word_count == 0:
            raise PromptDensityError("densify would remove every content token")
        current = rebuilt
        all_applied.extend(applied)
        all_notes.extend(notes)
    after = analyze(current, lex, config) if current.strip() else before
    return RewriteResult(
        output=current,
        applied=tuple(all_applied),
        sde_before=before.sde,
        sde_after=after.sde,
        structural_edits=tuple(all_notes),
    )


# ---------------------------------------------------------------------------
# Dilute / pad / gradient
# ---------------------------------------------------------------------------

_SENTENCE_END_RE = re.compile(r"[.?!]")


def _first_sentence(text: str) -> str:
    m = _SENTENCE_END_RE.search(text)
    return text[: m.end()] if m else text


def _insert_hedges(text: str, picks: list[str]) -> str:
    """Insert hedge phrases before task verbs, one per verb occurrence."""
    if not picks:
        return text
    seq = tokenize(text)
    inserts: list[tuple[int, str]] = []
    used = 0
    for tok in seq.tokens:
        if used >= len(picks):
            break
        if tok.kind is TokenKind.WORD and tok.text.lower() in wordlists.PROMPT_VERBS:
            inserts.append((tok.start, picks[used]))
            used += 1
    if not inserts:
        return text
    raw = text.encode("utf-8")
    out: list[bytes] = []
    prev = 0
    for pos, phrase in inserts:
        out.append(raw[prev:pos])
        out.append((phrase + " ").encode("utf-8"))
        prev = pos
    out.append(raw[prev:])
    return b"".join(out).decode("utf-8")


def dilute(
    text: str,
    seed: int = 0,
    intensity: int = 2,
    bank: TemplateBank | None = None,
) -> str:
    """Lower a prompt's density with preambles, hedges, and a restatement.

    Deterministic for a given (text, seed, intensity); the original text
    survives verbatim apart from hedge insertions before task verbs.
    """
    if not text.strip():
        raise EmptyPromptError("empty prompt")
    if intensity < 1:
        raise PromptDensityError("intensity must be a positive integer")
    bank = bank if bank is not None else default_templates()
    rng = random.Random(seed)

    count = min(intensity, len(bank.preambles))
    preamble_ids = rng.sample(range(len(bank.preambles)), count)
    preambles = [bank.preambles[i] for i in preamble_ids]

    verb_count = sum(
        1
        for tok in tokenize(text).tokens
        if tok.kind is TokenKind.WORD and tok.text.lower() in wordlists.PROMPT_VERBS
    )
    hedge_picks = [bank.hedges[rng.randrange(len(bank.hedges))] for _ in range(verb_count)]
    hedged = _insert_hedges(text, hedge_picks)

    frame = bank.frames[rng.randrange(len(bank.frames))]
    restatement = f"{frame} {_first_sentence(text)}"
    return " ".join(preambles + [hedged, restatement])


def pad(text: str, target_word_equivalent: int) -> str:
    """Append period groups; word count and density stay unchanged."""
    if target_word_equivalent < 0:
        raise PromptDensityError("pad target must be non-negative")
    if target_word_equivalent == 0:
        return text
    return text + " " + " ".join(["..."] * target_word_equivalent)


@dataclass(frozen=True)
class GradientVariant:
    """One density-ladder variant."""

    target: float
    text: str
    achieved: float
    reachable: bool = True


def gradient_variants(
    text: str,
    targets: list[float],
    seed: int = 0,
    lex: Lexicon | None = None,
    config: ScoreConfig = DEFAULT_CONFIG,
    bank: TemplateBank | None = None,
) -> list[GradientVariant]:
    """Build one variant per target score, descending from the densified text.

    Greedy: noise units (hedge words, then preamble sentences for large
    gaps) are inserted one at a time until the score drops into the target
    band. Targets above the densified maximum are reported unreachable.
    """
    if not targets:
        return []
    ordered = sorted(targets)
    if ordered[0] <= 0.0 or ordered[-1] > 1.0:
        raise PromptDensityError("targets must lie in (0, 1]")
    lex = lex if lex is not None else default_lexicon()
    bank = bank if bank is not None else default_templates()
    rng = random.Random(seed)

    base = densify(text, lex, config).output
    s_max = analyze(base, lex, config).sde
    current = base
    current_sde = s_max
    preambles_used = 0
    hedge_counter = 0
    # Single-word hedges give the finest step size near a target.
    unit_hedges = tuple(h for h in bank.hedges if " " not in h) or bank.hedges
    results: dict[float, GradientVariant] = {}

    for target in sorted(ordered, reverse=True):
        if s_max < target - 0.05:
            results[target] = GradientVariant(target, base, s_max, reachable=False)
            continue
        guard = 0
        while current_sde > target + 0.05 and guard < 500:
            guard += 1
            stepped = False
            if current_sde - target > 0.20 and preambles_used < len(bank.preambles):
                # Preambles cover ground quickly but must not overshoot
                # past the band; fall back to hedges when they would.
                candidate = bank.preambles[preambles_used] + " " + current
                candidate_sde = analyze(candidate, lex, config).sde
                if candidate_sde > target + 0.05:
                    preambles_used += 1
                    current, current_sde = candidate, candidate_sde
                    stepped = True
            if not stepped:
                hedge = unit_hedges[hedge_counter % len(unit_hedges)]
                hedge_counter += 1
                current = _insert_hedge_at(current, hedge, rng)
                current_sde = analyze(current, lex, config).sde
        results[target] = GradientVariant(target, current, current_sde)
    return [results[t] for t in ordered]


def _insert_hedge_at(text: str, hedge: str, rng: random.Random) -> str:
    """Insert one hedge before a word token at a seeded position."""
    seq = tokenize(text)
    word_positions = [t.start for t in seq.tokens if t.kind is TokenKind.WORD]
    if not word_positions:
        return text + " " + hedge
    pos = word_positions[rng.randrange(len(word_positions))]
    raw = text.encode("utf-8")
    return (raw[:pos] + (hedge + " ").encode("utf-8") + raw[pos:]).decode("utf-8")


# ---------------------------------------------------------------------------
# Instruction placement
# ---------------------------------------------------------------------------

_INSTR_RE = re.compile(
    r"(?i)((?:please\s+)?(?:just\s+)?(?:reply|answer|respond)\b[^.?!]*(?:[.?!]+|$))"
)
_FORMAT_MARKERS = ("format", "answer is", "<")


def _is_sentence_start(text: str, pos: int) -> bool:
    head = text[:pos].rstrip()
    return not head or head[-1] in ".?!:"


def instruction_last(text: str) -> InstructionPlacement:
    """Move the output-format instruction sentence to the end of the prompt.

    The instruction is the first span starting with reply/answer/respond
    that either opens a sentence or mentions the response format. Without
    one, the text is returned unchanged with ``found=False``. Idempotent.
    """
    for m in _INSTR_RE.finditer(text):
        span_text = m.group(1)
        lowered = span_text.lower()
        if _is_sentence_start(text, m.start(1)) or any(
            marker in lowered for marker in _FORMAT_MARKERS
        ):
            rest = (text[: m.start(1)] + text[m.end(1) :]).strip()
            instruction = span_text.strip()
            if not rest:
                return InstructionPlacement(text, found=True, moved=False)
            reordered = " ".join(rest.split()) + " " + instruction
            moved = reordered != " ".join(text.split())
            if not moved:
                return InstructionPlacement(text, found=True, moved=False)
            return InstructionPlacement(reordered, found=True, moved=True)
    return InstructionPlacement(text, found=False, moved=False)
