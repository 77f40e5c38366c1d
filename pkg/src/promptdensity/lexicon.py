"""Categorized phrase lexicon and leftmost-longest phrase matching.

The lexicon file format is plain UTF-8 text, one entry per line:

    CATEGORY<TAB>phrase

``#`` starts a comment line and blank lines are ignored. Categories are
FILLER, HEDGE, META, TRANSITIONAL, NOMINALIZATION_SUFFIX, and UNIT. A
phrase may not appear under two categories. Phrases are stored lowercase
with single-space word separators; suffix entries are bare letter runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import LexiconFormatError
from .tokens import TokenKind, TokenSequence


class Category(Enum):
    FILLER = "FILLER"
    HEDGE = "HEDGE"
    META = "META"
    TRANSITIONAL = "TRANSITIONAL"
    NOMINALIZATION_SUFFIX = "NOMINALIZATION_SUFFIX"
    UNIT = "UNIT"


# Categories whose matches mark tokens as removable noise.
NOISE_CATEGORIES = (
    Category.FILLER,
    Category.HEDGE,
    Category.META,
    Category.TRANSITIONAL,
)

MAX_PHRASE_WORDS = 8


@dataclass(frozen=True)
class PhraseMatch:
    """One lexicon hit over token indices [start, end) of a TokenSequence."""

    category: Category
    start: int
    end: int
    phrase: str


@dataclass
class Lexicon:
    """Immutable-after-load phrase sets keyed by category."""

    entries: dict[Category, frozenset[str]] = field(default_factory=dict)

    def phrases(self, category: Category) -> frozenset[str]:
        return self.entries.get(category, frozenset())

    def __contains__(self, item: tuple[Category, str]) -> bool:
        category, phrase = item
        return phrase in self.phrases(category)

    # Index: first word -> [(word tuple, category)], longest first.
    def _phrase_index(self) -> dict[str, list[tuple[tuple[str, ...], Category]]]:
        index: dict[str, list[tuple[tuple[str, ...], Category]]] = {}
        for category in NOISE_CATEGORIES:
            for phrase in self.phrases(category):
                words = tuple(phrase.split(" "))
                index.setdefault(words[0], []).append((words, category))
        for bucket in index.values():
            bucket.sort(key=lambda e: (-len(e[0]), e[0]))
        return index


def _normalize_phrase(raw: str) -> str:
    return " ".join(raw.lower().split())


def parse_lexicon(content: str) -> Lexicon:
    """Parse lexicon file content; raises LexiconFormatError on bad lines."""
    sets: dict[Category, set[str]] = {c: set() for c in Category}
    owner: dict[str, Category] = {}
    for lineno, line in enumerate(content.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "\t" not in line:
            raise LexiconFormatError("expected CATEGORY<TAB>phrase", lineno)
        cat_text, _, phrase_text = line.partition("\t")
        try:
            category = Category(cat_text.strip())
        except ValueError:
            raise LexiconFormatError(f"unknown category {cat_text.strip()!r}", lineno) from None
        phrase = _normalize_phrase(phrase_text)
        if not phrase:
            raise LexiconFormatError("empty phrase", lineno)
        if len(phrase.split(" ")) > MAX_PHRASE_WORDS:
            raise LexiconFormatError(f"phrase longer than {MAX_PHRASE_WORDS} words", lineno)
        seen = owner.get(phrase)
        if seen is not None and seen is not category:
            raise LexiconFormatError(
                f"phrase {phrase!r} already in category {seen.value}", lineno
            )
        owner[phrase] = category
        sets[category].add(phrase)
    return Lexicon(entries={c: frozenset(s) for c, s in sets.items() if s})


def load_lexicon(path: str | None = None) -> Lexicon:
    """Load a lexicon file, or the shipped default when no path is given."""
    if path is None:
        content = resources.files("promptdensity.data").joinpath("lexicon.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            content = fh.read()
    return parse_lexicon(content)


_DEFAULT: Lexicon | None = None


def default_lexicon() -> Lexicon:
    """Shipped seed lexicon, loaded once per process."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_lexicon()
    return _DEFAULT


def match_phrases(seq: TokenSequence, lex: Lexicon) -> list[PhraseMatch]:
    """Greedy leftmost-longest, case-insensitive phrase matching.

    Multi-word phrases only match runs of non-punctuation tokens separated
    by exactly one space in the source; matches never overlap.
    """
    index = lex._phrase_index()
    tokens = seq.tokens
    source_bytes = seq.source.encode("utf-8")
    matches: list[PhraseMatch] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind is TokenKind.PUNCTUATION:
            i += 1
            continue
        candidates = index.get(tok.text.lower(), ())
        chosen: tuple[tuple[str, ...], Category] | None = None
        for words, category in candidates:
            end = i + len(words)
            if end > len(tokens):
                continue
            ok = True
            for offset, word in enumerate(words):
                t = tokens[i + offset]
                if t.kind is TokenKind.PUNCTUATION or t.text.lower() != word:
                    ok = False
                    break
                if offset and source_bytes[tokens[i + offset - 1].end : t.start] != b" ":
                    ok = False
                    break
            if ok:
                chosen = (words, category)
                break
        if chosen is None:
            i += 1
            continue
        words, category = chosen
        matches.append(PhraseMatch(category, i, i + len(words), " ".join(words)))
        i += len(words)
    return matches
