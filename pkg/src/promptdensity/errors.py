"""Exception types shared across the toolkit."""
from __future__ import annotations


class PromptDensityError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class EmptyPromptError(PromptDensityError):
    """Raised when an operation requires a non-empty prompt."""


class LexiconFormatError(PromptDensityError):
    """Raised on malformed lexicon/template files; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ManifestError(PromptDensityError):
    """Raised when a benchmark manifest fails validation."""

    def __init__(self, issues: list[str]):
        self.issues = issues
        super().__init__("; ".join(issues))
