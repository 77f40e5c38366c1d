"""Command-line front end.

One binary, subcommand style: score, lint, densify, dilute, pad,
gradient, validate, run, analyze, mcnemar. Every subcommand reads
standard input when no file or --text is given, writes results to
standard output, and logs to standard error. ``--json`` switches to the
versioned structured output. Exit codes: 0 success, 1 domain error,
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import ManifestError, PromptDensityError
from .harness import (
    BackendDescriptor,
    BackendKind,
    build_backend,
    load_manifest,
    load_results,
    latency_report,
    format_latency_report,
    run_experiment,
    validate_manifest,
)
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .rewrite import (
    TemplateBank,
    default_templates,
    densify,
    dilute,
    gradient_variants,
    instruction_last,
    lint,
    load_templates,
    pad,
)
from .scoring import DEFAULT_CONFIG, ScoreConfig, analyze
from .stats import (
    DEFAULT_THRESHOLD,
    PairedOutcome,
    accuracy_table,
    format_accuracy_table,
    mcnemar,
)

SCHEMA_VERSION = "1"


def _emit(payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    print(json.dumps(payload, indent=2, ensure_ascii=False))


def _read_text(args) -> str:
    if getattr(args, "text", None) is not None:
        return args.text
    if getattr(args, "input", None):
        with open(args.input, encoding="utf-8") as fh:
            return fh.read()
    return sys.stdin.read()


def _load_context(args) -> tuple[Lexicon, ScoreConfig, TemplateBank]:
    settings: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            settings = json.load(fh)
    lexicon_path = getattr(args, "lexicon", None) or settings.get("lexicon")
    lex = load_lexicon(lexicon_path) if lexicon_path else default_lexicon()
    templates_path = settings.get("templates")
    bank = load_templates(templates_path) if templates_path else default_templates()
    config = DEFAULT_CONFIG
    overrides = {}
    for name in ("diluted_below", "dense_from", "ultra_above", "redundancy_min_len"):
        if name in settings:
            overrides[name] = settings[name]
    if settings.get("function_words_extra"):
        overrides["function_words"] = DEFAULT_CONFIG.function_words | frozenset(
            w.lower() for w in settings["function_words_extra"]
        )
    if settings.get("abstract_words_extra"):
        overrides["abstract_words"] = DEFAULT_CONFIG.abstract_words | frozenset(
            w.lower() for w in settings["abstract_words_extra"]
        )
    if overrides:
        config = replace(config, **overrides)
    return lex, config, bank


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="input file (default: stdin)")
    p.add_argument("--text", help="literal prompt text instead of a file")
    p.add_argument("--json", action="store_true", help="structured output")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--lexicon", help="lexicon file overriding the shipped default")


def _cmd_score(args) -> int:
    lex, config, _ = _load_context(args)
    analysis = analyze(_read_text(args), lex, config)
    if args.json:
        _emit(analysis.to_report())
    else:
        print(f"sde:   {analysis.sde:.4f}")
        print(f"class: {analysis.klass.value}")
        print(
            f"W={analysis.word_count} S={analysis.semantic_count} "
            f"R={analysis.redundancy:.4f} C={analysis.concreteness:.4f}"
        )
    return 0


def _cmd_lint(args) -> int:
    lex, config, _ = _load_context(args)
    text = _read_text(args)
    diagnostics = lint(text, lex, config)
    if args.json:
        _emit({"diagnostics": [d.to_report() for d in diagnostics]})
        return 0
    if not diagnostics:
        print("clean: no findings")
        return 0
    raw = text.encode("utf-8")
    for d in diagnostics:
        snippet = raw[d.start : d.end].decode("utf-8", "replace")
        fix = f" -> {d.replacement!r}" if d.replacement else ""
        print(f"{d.start}..{d.end} [{d.rule}] {d.severity.value}: {snippet!r} {d.message}{fix}")
    return 0


def _cmd_densify(args) -> int:
    lex, config, _ = _load_context(args)
    result = densify(_read_text(args), lex, config)
    if args.json:
        _emit(
            {
                "output": result.output,
                "sde_before": round(result.sde_before, 4),
                "sde_after": round(result.sde_after, 4),
                "applied": [d.to_report() for d in result.applied],
                "structural_edits": list(result.structural_edits),
            }
        )
    else:
        print(result.output)
        print(f"sde: {result.sde_before:.4f} -> {result.sde_after:.4f}", file=sys.stderr)
    return 0


def _cmd_dilute(args) -> int:
    lex, config, bank = _load_context(args)
    text = _read_text(args)
    before = analyze(text, lex, config).sde
    output = dilute(text, seed=args.seed, intensity=args.intensity, bank=bank)
    after = analyze(output, lex, config).sde
    if args.json:
        _emit({"output": output, "sde_before": round(before, 4), "sde_after": round(after, 4)})
    else:
        print(output)
        print(f"sde: {before:.4f} -> {after:.4f}", file=sys.stderr)
    return 0


def _cmd_pad(args) -> int:
    lex, config, _ = _load_context(args)
    text = _read_text(args)
    before = analyze(text, lex, config).sde
    output = pad(text, args.groups)
    after = analyze(output, lex, config).sde
    if args.json:
        _emit({"output": output, "sde_before": round(before, 4), "sde_after": round(after, 4)})
    else:
        print(output)
        print(f"sde: {before:.4f} -> {after:.4f}", file=sys.stderr)
    return 0


def _cmd_gradient(args) -> int:
    lex, config, bank = _load_context(args)
    try:
        targets = [float(t) for t in args.targets.split(",") if t.strip()]
    except ValueError:
        raise PromptDensityError(f"bad --targets value {args.targets!r}") from None
    variants = gradient_variants(
        _read_text(args), targets, seed=args.seed, lex=lex, config=config, bank=bank
    )
    if args.json:
        _emit(
            {
                "variants": [
                    {
                        "target": v.target,
                        "achieved": round(v.achieved, 4),
                        "reachable": v.reachable,
                        "text": v.text,
                    }
                    for v in variants
                ]
            }
        )
    else:
        for v in variants:
            status = "ok" if v.reachable else "unreachable"
            print(f"target {v.target:.2f}  achieved {v.achieved:.4f}  [{status}]")
            print(f"  {v.text}")
    return 0


def _cmd_instruction_last(args) -> int:
    result = instruction_last(_read_text(args))
    if args.json:
        _emit({"output": result.output, "found": result.found, "moved": result.moved})
    else:
        print(result.output)
        if not result.found:
            print("warning: no format-instruction sentence found", file=sys.stderr)
    return 0


def _cmd_validate(args) -> int:
    lex, config, _ = _load_context(args)
    with open(args.manifest, encoding="utf-8") as fh:
        data = json.load(fh)
    items, issues = validate_manifest(data, strict=args.strict, lex=lex, config=config)
    if args.json:
        _emit({"valid": not issues, "items": len(items), "issues": issues})
    else:
        for issue in issues:
            print(f"error: {issue}", file=sys.stderr)
        print(f"{'OK' if not issues else 'INVALID'}: {len(items)} item(s)")
    return 1 if issues else 0


def _parse_backends(args) -> list:
    if args.backend == "mock":
        descriptor = BackendDescriptor(
            kind=BackendKind.MOCK,
            model_id=args.model,
            params={"intercept": args.mock_intercept, "slope": args.mock_slope},
        )
        return [build_backend(descriptor, seed=args.seed)]
    with open(args.backend, encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = raw if isinstance(raw, list) else [raw]
    backends = []
    for entry in entries:
        descriptor = BackendDescriptor(
            kind=BackendKind(entry.get("kind", "http_chat")),
            model_id=entry["model"],
            endpoint=entry.get("endpoint"),
            credential_env=entry.get("credential_env"),
            params=entry.get("params", {}),
            rate_limit_rpm=entry.get("rate_limit_rpm"),
            max_retries=entry.get("max_retries", 5),
        )
        backends.append(build_backend(descriptor, seed=args.seed))
    return backends


def _cmd_run(args) -> int:
    items = load_manifest(args.manifest)
    backends = _parse_backends(args)
    records = run_experiment(
        items,
        backends,
        runs_per_item=args.runs,
        seed=args.seed,
        out_path=args.out,
        resume=args.resume,
    )
    if args.out:
        print(f"{len(records)} records -> {args.out}", file=sys.stderr)
    else:
        print(json.dumps([r.to_json() for r in records], indent=2, ensure_ascii=False))
    return 0


def _cmd_analyze(args) -> int:
    records = load_results(args.results)
    rows = accuracy_table(records, threshold=args.threshold)
    table = format_accuracy_table(rows, csv=args.csv)
    latency = format_latency_report(latency_report(records), csv=args.csv)
    if args.json:
        _emit(
            {
                "accuracy": [
                    {
                        "benchmark": r.benchmark,
                        "accuracy": {k: round(v, 2) for k, v in r.accuracy.items()},
                        "delta": None if r.delta is None else round(r.delta, 2),
                        "significant": r.significant,
                    }
                    for r in rows
                ],
                "latency": [
                    {
                        "model": r.model,
                        "condition": r.condition,
                        "mean_latency_ms": round(r.mean_latency_ms, 1),
                        "mean_output_tokens": round(r.mean_output_tokens, 1),
                        "over_generating": r.over_generating,
                    }
                    for r in latency_report(records)
                ],
            }
        )
    else:
        print(table)
        print()
        print(latency)
    return 0


def _cmd_mcnemar(args) -> int:
    records = load_results(args.results)
    try:
        cond_a, cond_b = args.pair.split(":", 1)
    except ValueError:
        raise PromptDensityError(f"--pair must look like A:B, got {args.pair!r}") from None
    by_key: dict[tuple, dict[str, bool]] = {}
    for r in records:
        by_key.setdefault((r.model, r.benchmark, r.item_id, r.run), {})[r.condition] = r.correct
    pairs = [
        PairedOutcome(f"{model}/{bench}/{item}", run, conds[cond_a], conds[cond_b])
        for (model, bench, item, run), conds in sorted(by_key.items())
        if cond_a in conds and cond_b in conds
    ]
    if not pairs:
        raise PromptDensityError(f"no paired records for {cond_a!r} vs {cond_b!r}")
    result = mcnemar(pairs, threshold=args.threshold)
    if args.json:
        _emit({"pair": [cond_a, cond_b], **result.to_report()})
    else:
        stat = "" if result.statistic is None else f" statistic={result.statistic:.4f}"
        print(
            f"{result.verdict.value.upper()} ({cond_a} vs {cond_b}): "
            f"b={result.b} c={result.c} p={result.p_value:.6g} "
            f"method={result.method.value}{stat}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptdensity",
        description="Score, lint, and rewrite prompts by semantic density; "
        "run and analyze paired prompt-condition experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a prompt")
    _add_input_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("lint", help="report removable noise and suggestions")
    _add_input_flags(p)
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("densify", help="apply safe deletions and replacements")
    _add_input_flags(p)
    p.set_defaults(func=_cmd_densify)

    p = sub.add_parser("dilute", help="lower density with seeded noise templates")
    _add_input_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--intensity", type=int, default=2)
    p.set_defaults(func=_cmd_dilute)

    p = sub.add_parser("pad", help="append density-neutral period groups")
    _add_input_flags(p)
    p.add_argument("--groups", type=int, default=20, help="number of period groups")
    p.set_defaults(func=_cmd_pad)

    p = sub.add_parser("gradient", help="build a ladder of density targets")
    _add_input_flags(p)
    p.add_argument("--targets", default="0.20,0.35,0.50,0.65,0.80")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gradient)

    p = sub.add_parser("instruction-last", help="move the format instruction to the end")
    _add_input_flags(p)
    p.set_defaults(func=_cmd_instruction_last)

    p = sub.add_parser("validate", help="validate a prompt manifest")
    p.add_argument("manifest")
    p.add_argument("--strict", action="store_true", help="also check variant score bands")
    p.add_argument("--json", action="store_true")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--lexicon", help="lexicon file overriding the shipped default")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="run the experiment over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--backend", default="mock", help="'mock' or a backend JSON file")
    p.add_argument("--model", default="mock-1", help="model id for the mock backend")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--out", help="results file (JSON array)")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mock-intercept", type=float, default=-2.0)
    p.add_argument("--mock-slope", type=float, default=4.0)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("analyze", help="accuracy and latency tables from results")
    p.add_argument("results")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("mcnemar", help="paired test between two conditions")
    p.add_argument("results")
    p.add_argument("--pair", default="ultra_dense:diluted", help="condition pair A:B")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_mcnemar)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        for issue in exc.issues:
            print(f"error: {issue}", file=sys.stderr)
        return 1
    except PromptDensityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
