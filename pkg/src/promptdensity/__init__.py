"""Prompt semantic-density toolkit.

Score prompts by information per token, lint and rewrite them, generate
experimental prompt conditions, and run paired experiments against mock
or HTTP chat backends with McNemar significance testing.
"""
from .errors import (
    EmptyPromptError,
    LexiconFormatError,
    ManifestError,
    PromptDensityError,
)
from .extraction import (
    AnswerFormat,
    ExtractionMethod,
    TrialOutcome,
    extract_integer,
    extract_mc_letter,
    match_exact,
    score_response,
)
from .harness import (
    BackendDescriptor,
    BackendKind,
    BenchmarkItem,
    HttpChatBackend,
    MockBackend,
    TrialRecord,
    build_backend,
    latency_report,
    load_manifest,
    load_results,
    make_synthetic_manifest,
    run_experiment,
    save_results,
    validate_manifest,
)
from .lexicon import Category, Lexicon, PhraseMatch, default_lexicon, load_lexicon, match_phrases
from .rewrite import (
    Diagnostic,
    GradientVariant,
    InstructionPlacement,
    RewriteResult,
    Severity,
    TemplateBank,
    densify,
    dilute,
    gradient_variants,
    instruction_last,
    lint,
    load_templates,
    pad,
)
from .scoring import (
    DEFAULT_CONFIG,
    DensityClass,
    LabelKind,
    PromptAnalysis,
    ScoreConfig,
    TokenLabel,
    analyze,
    classify_tokens,
    component_scores,
    density_class,
    density_score,
)
from .stats import (
    McNemarResult,
    PairedOutcome,
    RegressionFit,
    Verdict,
    accuracy_table,
    logistic_fit,
    mcnemar,
    mcnemar_counts,
    wins_losses,
)
from .tokens import Token, TokenKind, TokenSequence, tokenize, word_count

__version__ = "0.1.0"

__all__ = [
    "AnswerFormat",
    "BackendDescriptor",
    "BackendKind",
    "BenchmarkItem",
    "Category",
    "DEFAULT_CONFIG",
    "DensityClass",
    "Diagnostic",
    "EmptyPromptError",
    "ExtractionMethod",
    "GradientVariant",
    "HttpChatBackend",
    "InstructionPlacement",
    "LabelKind",
    "Lexicon",
    "LexiconFormatError",
    "ManifestError",
    "McNemarResult",
    "MockBackend",
    "PairedOutcome",
    "PhraseMatch",
    "PromptAnalysis",
    "PromptDensityError",
    "RegressionFit",
    "RewriteResult",
    "ScoreConfig",
    "Severity",
    "TemplateBank",
    "Token",
    "TokenKind",
    "TokenLabel",
    "TokenSequence",
    "TrialOutcome",
    "TrialRecord",
    "Verdict",
    "accuracy_table",
    "analyze",
    "build_backend",
    "classify_tokens",
    "component_scores",
    "default_lexicon",
    "densify",
    "density_class",
    "density_score",
    "dilute",
    "extract_integer",
    "extract_mc_letter",
    "gradient_variants",
    "instruction_last",
    "latency_report",
    "lint",
    "load_lexicon",
    "load_manifest",
    "load_results",
    "load_templates",
    "logistic_fit",
    "make_synthetic_manifest",
    "match_exact",
    "match_phrases",
    "mcnemar",
    "mcnemar_counts",
    "pad",
    "run_experiment",
    "save_results",
    "score_response",
    "tokenize",
    "validate_manifest",
    "wins_losses",
    "word_count",
]
