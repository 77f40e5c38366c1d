"""Whitespace tokenizer with byte-span tracking.

Tokens are whitespace-delimited chunks with leading/trailing punctuation
split off into their own tokens. The word count of a sequence excludes
punctuation tokens; every downstream density computation uses that count
as its denominator.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum


class TokenKind(Enum):
    WORD = "word"
    NUMBER = "number"
    MATH_SYMBOL = "math_symbol"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class Token:
    """A single token with its half-open byte span into the source text."""

    text: str
    start: int
    end: int
    kind: TokenKind

    @property
    def is_word_like(self) -> bool:
        return self.kind is not TokenKind.PUNCTUATION


@dataclass(frozen=True)
class TokenSequence:
    """Ordered tokens over one source string."""

    source: str
    tokens: tuple[Token, ...] = field(default=())

    @property
    def word_count(self) -> int:
        return sum(1 for t in self.tokens if t.is_word_like)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


_CHUNK_RE = re.compile(r"\S+")
# Digits with optional sign, thousands groups, and one decimal point.
_NUMBER_RE = re.compile(r"[+\-−]?\d[\d,]*(?:\.\d+)?")


def _is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _is_number(text: str) -> bool:
    if _NUMBER_RE.fullmatch(text):
        return True
    return all(ch.isdigit() for ch in text)


def _classify_core(text: str) -> TokenKind:
    if _is_number(text):
        return TokenKind.NUMBER
    if not any(ch.isalnum() for ch in text):
        return TokenKind.MATH_SYMBOL
    return TokenKind.WORD


def tokenize(text: str) -> TokenSequence:
    """Split text into span-tracked tokens.

    Splits on Unicode whitespace; punctuation runs at the edges of a chunk
    become PUNCTUATION tokens; digit chunks become NUMBER; symbol-only
    chunks (operators, integral signs, ...) become MATH_SYMBOL; everything
    else is a WORD. Deterministic, and empty input yields an empty sequence.
    Spans are byte offsets into the UTF-8 encoding of ``text``.
    """
    tokens: list[Token] = []
    # Prefix sums of the UTF-8 byte length give char -> byte offsets.
    byte_at = [0] * (len(text) + 1)
    for i, ch in enumerate(text):
        byte_at[i + 1] = byte_at[i] + len(ch.encode("utf-8"))

    def emit(cstart: int, cend: int, kind: TokenKind) -> None:
        tokens.append(Token(text[cstart:cend], byte_at[cstart], byte_at[cend], kind))

    for m in _CHUNK_RE.finditer(text):
        lo, hi = m.start(), m.end()
        # Leading punctuation run.
        lead = lo
        while lead < hi and _is_punct_char(text[lead]):
            lead += 1
        # Trailing punctuation run (never past the leading run).
        trail = hi
        while trail > lead and _is_punct_char(text[trail - 1]):
            trail -= 1
        if lead > lo:
            emit(lo, lead, TokenKind.PUNCTUATION)
        if trail > lead:
            emit(lead, trail, _classify_core(text[lead:trail]))
        if hi > trail:
            emit(trail, hi, TokenKind.PUNCTUATION)
    return TokenSequence(source=text, tokens=tuple(tokens))


def word_count(seq: TokenSequence) -> int:
    """Number of non-punctuation tokens; the denominator of the density score."""
    return seq.word_count
