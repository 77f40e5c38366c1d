"""Deterministic answer extraction and trial scoring.

Extraction is pure and total: any response maps to an outcome, and a
response with no extractable answer is coded incorrect.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from .errors import PromptDensityError


class AnswerFormat(Enum):
    MC_LETTER = "mc_letter"
    INTEGER = "integer"
    EXACT_STRING = "exact_string"


class ExtractionMethod(Enum):
    PRIMARY_PATTERN = "primary_pattern"
    FALLBACK = "fallback"
    NONE = "none"


MC_VALID_LETTERS = frozenset("ABCD")


@dataclass(frozen=True)
class TrialOutcome:
    """Extraction result plus correctness for one model response."""

    extracted: str | None
    correct: bool
    method: ExtractionMethod


_PRIMARY_RE = re.compile(r"the\s+answer\s+is", re.IGNORECASE)
# Letter right after the pattern, allowing ':'/'*'/quotes/spaces between and
# optional bracket around the letter; the letter must not start a word.
_AFTER_PATTERN_RE = re.compile(r"^[\s:*\"'(\[]*([A-Za-z])(?![A-Za-z0-9])")
_STANDALONE_LETTER_RE = re.compile(r"(?<![A-Za-z])([A-Za-z])(?![A-Za-z])")
# Integer literals with optional sign, thousands separators, or a decimal tail.
_NUMBER_RE = re.compile(r"(?<![\d.])[-−]?\d{1,3}(?:,\d{3})+(?:\.\d+)?|(?<![\d,.])[-−]?\d+(?:\.\d+)?")


def extract_mc_letter(
    response: str, valid: frozenset[str] = MC_VALID_LETTERS
) -> tuple[str | None, ExtractionMethod]:
    """Extract a multiple-choice letter.

    Primary: the first valid letter after the last occurrence of the
    pattern "the answer is". Fallback: the first standalone valid letter
    anywhere in the response.
    """
    matches = list(_PRIMARY_RE.finditer(response))
    if matches:
        tail = response[matches[-1].end() :]
        m = _AFTER_PATTERN_RE.match(tail)
        if m and m.group(1).upper() in valid:
            return m.group(1).upper(), ExtractionMethod.PRIMARY_PATTERN
    for m in _STANDALONE_LETTER_RE.finditer(response):
        letter = m.group(1).upper()
        if letter in valid:
            return letter, ExtractionMethod.FALLBACK
    return None, ExtractionMethod.NONE


def extract_integer(response: str) -> int | None:
    """Extract the last integer in the response; decimals round to the
    nearest integer with halves away from zero."""
    matches = _NUMBER_RE.findall(response)
    if not matches:
        return None
    literal = matches[-1].replace(",", "").replace("−", "-")
    return int(Decimal(literal).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


_NON_ALNUM_RE = re.compile(r"[^0-9a-z]+")


def _normalize(text: str) -> list[str]:
    return [w for w in _NON_ALNUM_RE.sub(" ", text.lower()).split() if w]


def match_exact(response: str, truth: str) -> bool:
    """Case-insensitive, punctuation-stripped whole-phrase containment of
    the ground truth in the response."""
    needle = _normalize(truth)
    haystack = _normalize(response)
    if not needle or len(needle) > len(haystack):
        return False
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            return True
    return False


def score_response(response: str, answer_format: AnswerFormat, ground_truth: str) -> TrialOutcome:
    """Dispatch to the extractor for the answer format and compare."""
    if answer_format is AnswerFormat.MC_LETTER:
        letter, method = extract_mc_letter(response)
        correct = letter is not None and letter == ground_truth.strip().upper()
        return TrialOutcome(letter, correct, method)
    if answer_format is AnswerFormat.INTEGER:
        value = extract_integer(response)
        if value is None:
            return TrialOutcome(None, False, ExtractionMethod.NONE)
        correct = value == int(str(ground_truth).strip())
        return TrialOutcome(str(value), correct, ExtractionMethod.PRIMARY_PATTERN)
    if answer_format is AnswerFormat.EXACT_STRING:
        matched = match_exact(response, ground_truth)
        extracted = ground_truth if matched else None
        method = ExtractionMethod.PRIMARY_PATTERN if matched else ExtractionMethod.NONE
        return TrialOutcome(extracted, matched, method)
    raise PromptDensityError(f"unknown answer format {answer_format!r}")
