"""Within-items experiment runner over pluggable model backends.

Every (model, item, condition, run) is issued exactly once, interleaved
round-robin across backends, scored with the deterministic extractor, and
appended to a crash-resumable partial file. The final results file is a
JSON array sorted by record key.

The mock backend answers correctly with probability
sigmoid(intercept + slope * prompt_score), deterministically per request
key, which makes desk-scale paired experiments reproducible end to end.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import re
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import ManifestError, PromptDensityError
from .extraction import AnswerFormat, score_response
from .lexicon import Lexicon
from .rewrite import dilute
from .scoring import DEFAULT_CONFIG, ScoreConfig, analyze

MC_LETTERS = ("A", "B", "C", "D")
KNOWN_CONDITIONS = ("diluted", "standard", "ultra_dense", "ultra_dense_ipe", "padding")
_GRADIENT_RE = re.compile(r"gradient_[0-9a-z_.]+")


class BackendKind(Enum):
    MOCK = "mock"
    HTTP_CHAT = "http_chat"


@dataclass(frozen=True)
class BenchmarkItem:
    """One task with ground truth and its per-condition prompt texts."""

    item_id: str
    benchmark: str
    answer_format: AnswerFormat
    ground_truth: str
    variants: dict[str, str]


@dataclass(frozen=True)
class TrialRecord:
    model: str
    benchmark: str
    item_id: str
    condition: str
    run: int
    correct: bool
    response: str
    latency_ms: float
    output_tokens: int
    sde: float
    timestamp: str
    error: str | None = None

    @property
    def key(self) -> tuple[str, str, str, str, int]:
        return (self.model, self.benchmark, self.item_id, self.condition, self.run)

    def to_json(self) -> dict:
        record = {
            "model": self.model,
            "benchmark": self.benchmark,
            "item_id": self.item_id,
            "condition": self.condition,
            "run": self.run,
            "correct": self.correct,
            "response": self.response,
            "latency_ms": self.latency_ms,
            "output_tokens": self.output_tokens,
            "sde": self.sde,
            "timestamp": self.timestamp,
        }
        if self.error is not None:
            record["error"] = self.error
        return record

    @classmethod
    def from_json(cls, data: dict) -> "TrialRecord":
        return cls(
            model=data["model"],
            benchmark=data["benchmark"],
            item_id=data["item_id"],
            condition=data["condition"],
            run=int(data["run"]),
            correct=bool(data["correct"]),
            response=data["response"],
            latency_ms=float(data["latency_ms"]),
            output_tokens=int(data["output_tokens"]),
            sde=float(data["sde"]),
            timestamp=data["timestamp"],
            error=data.get("error"),
        )


@dataclass(frozen=True)
class BackendDescriptor:
    """Connection and policy description for one model backend."""

    kind: BackendKind
    model_id: str
    endpoint: str | None = None
    credential_env: str | None = None
    params: dict = field(default_factory=dict)
    rate_limit_rpm: float | None = None
    max_retries: int = 5

    def __post_init__(self):
        if self.kind is BackendKind.HTTP_CHAT and not (self.endpoint and self.credential_env):
            raise PromptDensityError("http_chat backend needs endpoint and credential_env")


def _stable_uniform(*parts) -> float:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


class MockBackend:
    """Deterministic stand-in model; accuracy is logistic in prompt score."""

    def __init__(self, descriptor: BackendDescriptor, seed: int = 0):
        self.descriptor = descriptor
        self.seed = seed
        self.intercept = float(descriptor.params.get("intercept", -2.0))
        self.slope = float(descriptor.params.get("slope", 4.0))

    def _wrong_answer(self, item: BenchmarkItem, u: float) -> str:
        truth = str(item.ground_truth).strip()
        if item.answer_format is AnswerFormat.MC_LETTER:
            pool = [v for v in MC_LETTERS if v != truth.upper()]
            return pool[int(u * len(pool)) % len(pool)]
        if item.answer_format is AnswerFormat.INTEGER:
            offset = 1 + int(u * 9)
            sign = 1 if u < 0.5 else -1
            return str(int(truth) + sign * offset)
        pool = ["Morgan Lee", "Alex Turner", "Jamie Fox", "Robin Blake", "Casey Stone"]
        candidates = [n for n in pool if n.lower() != truth.lower()]
        return candidates[int(u * len(candidates)) % len(candidates)]

    def complete(
        self, item: BenchmarkItem, condition: str, run: int, prompt: str, sde: float
    ) -> tuple[str, float, int]:
        key = (self.seed, self.descriptor.model_id, item.benchmark, item.item_id, condition, run)
        p_success = _sigmoid(self.intercept + self.slope * sde)
        u_outcome = _stable_uniform(*key, "outcome")
        if u_outcome < p_success:
            answer = str(item.ground_truth).strip()
        else:
            answer = self._wrong_answer(item, _stable_uniform(*key, "wrong"))
        response = f"The answer is {answer}."
        latency = round(150.0 + 400.0 * _stable_uniform(*key, "latency"), 1)
        tokens = len(response.split()) + int(8 * _stable_uniform(*key, "tokens"))
        return response, latency, tokens


def _http_post(url: str, headers: dict, payload: dict, timeout: float = 120.0):
    import requests

    resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    body: dict
    try:
        body = resp.json()
    except ValueError:
        body = {"text": resp.text}
    return resp.status_code, body


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class HttpChatBackend:
    """Minimal generic chat-completion client with retry and pacing.

    The wire shape is {"model", "messages", **params}; temperature is only
    sent when the descriptor sets it, leaving the provider default intact.
    Credentials come from the environment variable named in the
    descriptor, never from files or argv.
    """

    def __init__(self, descriptor: BackendDescriptor, transport=None, sleep=time.sleep):
        self.descriptor = descriptor
        self.transport = transport or _http_post
        self.sleep = sleep
        self._last_call = 0.0

    def _headers(self) -> dict:
        token = os.environ.get(self.descriptor.credential_env or "", "")
        if not token:
            raise PromptDensityError(
                f"credential environment variable {self.descriptor.credential_env!r} is unset"
            )
        return {"Authorization": f"Bearer {token}", "Content-Type": "application/json"}

    def _pace(self) -> None:
        rpm = self.descriptor.rate_limit_rpm
        if not rpm:
            return
        interval = 60.0 / rpm
        wait = self._last_call + interval - time.monotonic()
        if wait > 0:
            self.sleep(wait)
        self._last_call = time.monotonic()

    @staticmethod
    def _parse_text(body: dict) -> str:
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
        content = body.get("content")
        if isinstance(content, list) and content and isinstance(content[0], dict):
            text = content[0].get("text")
            if isinstance(text, str):
                return text
        for key in ("output", "text", "response"):
            if isinstance(body.get(key), str):
                return body[key]
        return ""

    @staticmethod
    def _parse_tokens(body: dict, text: str) -> int:
        usage = body.get("usage", {})
        if isinstance(usage, dict):
            for key in ("completion_tokens", "output_tokens"):
                if isinstance(usage.get(key), int):
                    return usage[key]
        return len(text.split())

    def complete(
        self, item: BenchmarkItem, condition: str, run: int, prompt: str, sde: float
    ) -> tuple[str, float, int]:
        payload = {
            "model": self.descriptor.model_id,
            "messages": [{"role": "user", "content": prompt}],
        }
        payload.update(self.descriptor.params)
        headers = self._headers()
        delay = 1.0
        last_error = "request failed"
        for attempt in range(self.descriptor.max_retries):
            self._pace()
            started = time.monotonic()
            try:
                status, body = self.transport(self.descriptor.endpoint, headers, payload)
            except Exception as exc:  # transport-level failure is retryable
                last_error = str(exc)
                status, body = None, None
            latency = (time.monotonic() - started) * 1000.0
            if status is not None and status not in _RETRYABLE_STATUS:
                if status != 200:
                    raise PromptDensityError(f"backend returned HTTP {status}: {body}")
                text = self._parse_text(body)
                return text, round(latency, 1), self._parse_tokens(body, text)
            if status is not None:
                last_error = f"HTTP {status}"
            if attempt + 1 < self.descriptor.max_retries:
                self.sleep(delay)
                delay *= 2.0
        raise PromptDensityError(f"backend gave up after retries: {last_error}")


def build_backend(descriptor: BackendDescriptor, seed: int = 0, transport=None):
    if descriptor.kind is BackendKind.MOCK:
        return MockBackend(descriptor, seed=seed)
    return HttpChatBackend(descriptor, transport=transport)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def _condition_known(name: str) -> bool:
    return name in KNOWN_CONDITIONS or bool(_GRADIENT_RE.fullmatch(name))


def validate_manifest(
    data: dict,
    strict: bool = False,
    lex: Lexicon | None = None,
    config: ScoreConfig = DEFAULT_CONFIG,
) -> tuple[list[BenchmarkItem], list[str]]:
    """Check a raw manifest document; returns (items, issues).

    Strict mode additionally scores the diluted / ultra_dense variants and
    reports ones that fall outside their condition's score band.
    """
    issues: list[str] = []
    items: list[BenchmarkItem] = []
    raw_items = data.get("items") if isinstance(data, dict) else None
    if not isinstance(raw_items, list) or not raw_items:
        return [], ["manifest must carry a non-empty top-level 'items' array"]
    seen_ids: set[str] = set()
    for pos, raw in enumerate(raw_items):
        where = f"items[{pos}]"
        if not isinstance(raw, dict):
            issues.append(f"{where}: not an object")
            continue
        item_id = raw.get("id")
        if not isinstance(item_id, str) or not item_id:
            issues.append(f"{where}: missing id")
            continue
        where = item_id
        if item_id in seen_ids:
            issues.append(f"{where}: duplicate item id")
            continue
        seen_ids.add(item_id)
        benchmark = raw.get("benchmark")
        if not isinstance(benchmark, str) or not benchmark:
            issues.append(f"{where}: missing benchmark")
            continue
        try:
            answer_format = AnswerFormat(raw.get("answer_format"))
        except ValueError:
            issues.append(f"{where}: answer_format must be one of "
                          f"{[f.value for f in AnswerFormat]}")
            continue
        ground_truth = raw.get("ground_truth")
        if not isinstance(ground_truth, str) or not ground_truth.strip():
            issues.append(f"{where}: missing ground_truth")
            continue
        if answer_format is AnswerFormat.MC_LETTER and ground_truth.strip().upper() not in MC_LETTERS:
            issues.append(f"{where}: mc_letter ground_truth must be one of {MC_LETTERS}")
            continue
        if answer_format is AnswerFormat.INTEGER:
            try:
                int(ground_truth.strip())
            except ValueError:
                issues.append(f"{where}: integer ground_truth is not an integer")
                continue
        variants = raw.get("variants")
        if not isinstance(variants, dict) or not variants:
            issues.append(f"{where}: variants must be a non-empty map")
            continue
        bad = False
        for condition, text in variants.items():
            if not _condition_known(condition):
                issues.append(f"{where}: unknown condition {condition!r}")
                bad = True
            if not isinstance(text, str) or not text.strip():
                issues.append(f"{where}: variant {condition!r} is empty")
                bad = True
        if bad:
            continue
        item = BenchmarkItem(item_id, benchmark, answer_format, ground_truth.strip(), dict(variants))
        if strict:
            for condition, bound, above in (("diluted", config.diluted_below, False),
                                            ("ultra_dense", config.ultra_above, True)):
                text = item.variants.get(condition)
                if text is None:
                    continue
                score = analyze(text, lex, config).sde
                if above and score <= bound:
                    issues.append(f"{where}: ultra_dense variant scores {score:.2f}, "
                                  f"needs > {bound:.2f}")
                elif not above and score >= bound:
                    issues.append(f"{where}: diluted variant scores {score:.2f}, "
                                  f"needs < {bound:.2f}")
        items.append(item)
    return items, issues


def load_manifest(path: str, strict: bool = False) -> list[BenchmarkItem]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    items, issues = validate_manifest(data, strict=strict)
    if issues:
        raise ManifestError(issues)
    return items


def manifest_to_json(items: list[BenchmarkItem]) -> dict:
    return {
        "items": [
            {
                "id": it.item_id,
                "benchmark": it.benchmark,
                "answer_format": it.answer_format.value,
                "ground_truth": it.ground_truth,
                "variants": it.variants,
            }
            for it in items
        ]
    }


# ---------------------------------------------------------------------------
# Experiment loop
# ---------------------------------------------------------------------------

def _partial_path(out_path: str) -> str:
    return out_path + ".partial"


def _load_partial(path: str) -> dict[tuple, TrialRecord]:
    done: dict[tuple, TrialRecord] = {}
    if not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = TrialRecord.from_json(json.loads(line))
            done[record.key] = record
    return done


def save_results(records: list[TrialRecord], out_path: str) -> None:
    payload = [r.to_json() for r in sorted(records, key=lambda r: r.key)]
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_results(path: str) -> list[TrialRecord]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    records = [TrialRecord.from_json(entry) for entry in data]
    keys = [r.key for r in records]
    if len(set(keys)) != len(keys):
        raise PromptDensityError("results file has duplicate record keys")
    return records


def run_experiment(
    items: list[BenchmarkItem],
    backends: list,
    runs_per_item: int = 3,
    seed: int = 0,
    out_path: str | None = None,
    resume: bool = False,
    lex: Lexicon | None = None,
    config: ScoreConfig = DEFAULT_CONFIG,
    progress=None,
) -> list[TrialRecord]:
    """Run every (model, item, condition, run) once and return the records.

    With ``out_path`` each completed trial is appended to a ``.partial``
    sidecar immediately; ``resume`` skips keys already present there, so a
    killed run continues where it stopped and converges to the same final
    file. Backend failures after retries are recorded with the error flag
    and correct=False rather than aborting the run.
    """
    if not items:
        raise ManifestError(["no items to run"])
    ids = [(it.benchmark, it.item_id) for it in items]
    if len(set(ids)) != len(ids):
        raise ManifestError(["duplicate item ids in manifest"])
    if any(not it.variants for it in items):
        raise ManifestError(["item with no variants"])
    if not backends:
        raise PromptDensityError("no backends configured")
    done: dict[tuple, TrialRecord] = {}
    partial = None
    if out_path:
        partial = _partial_path(out_path)
        if resume:
            done = _load_partial(partial)
        elif os.path.exists(partial):
            os.remove(partial)

    ordered_items = sorted(items, key=lambda it: (it.benchmark, it.item_id))
    tasks = [
        (item, condition, run)
        for item in ordered_items
        for condition in sorted(item.variants)
        for run in range(runs_per_item)
    ]
    score_cache: dict[tuple[str, str], float] = {}

    def prompt_score(item: BenchmarkItem, condition: str) -> float:
        cache_key = (item.item_id, condition)
        if cache_key not in score_cache:
            score_cache[cache_key] = analyze(item.variants[condition], lex, config).sde
        return score_cache[cache_key]

    records: list[TrialRecord] = list(done.values())
    sink = open(partial, "a", encoding="utf-8") if partial else None
    try:
        for task_index, (item, condition, run) in enumerate(tasks):
            for backend in backends:
                model = backend.descriptor.model_id
                key = (model, item.benchmark, item.item_id, condition, run)
                if key in done:
                    continue
                prompt = item.variants[condition]
                sde = prompt_score(item, condition)
                error = None
                try:
                    response, latency, tokens = backend.complete(item, condition, run, prompt, sde)
                except PromptDensityError as exc:
                    response, latency, tokens = "", 0.0, 0
                    error = str(exc)
                outcome = score_response(response, item.answer_format, item.ground_truth)
                record = TrialRecord(
                    model=model,
                    benchmark=item.benchmark,
                    item_id=item.item_id,
                    condition=condition,
                    run=run,
                    correct=False if error else outcome.correct,
                    response=response,
                    latency_ms=latency,
                    output_tokens=tokens,
                    sde=round(sde, 4),
                    timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                    error=error,
                )
                records.append(record)
                done[key] = record
                if sink:
                    sink.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
                    sink.flush()
                if progress:
                    progress(task_index, len(tasks), record)
    finally:
        if sink:
            sink.close()
    records.sort(key=lambda r: r.key)
    if out_path:
        save_results(records, out_path)
    return records


# ---------------------------------------------------------------------------
# Latency / token report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatencyRow:
    model: str
    condition: str
    mean_latency_ms: float
    mean_output_tokens: float
    over_generating: bool


def latency_report(records: list[TrialRecord], baseline_condition: str = "standard") -> list[LatencyRow]:
    """Mean latency and output tokens per (model, condition); a condition
    is flagged when its mean token count tops the baseline by >20%."""
    rows: list[LatencyRow] = []
    for model, condition in sorted({(r.model, r.condition) for r in records}):
        cell = [r for r in records if r.model == model and r.condition == condition]
        rows.append(
            LatencyRow(
                model=model,
                condition=condition,
                mean_latency_ms=sum(r.latency_ms for r in cell) / len(cell),
                mean_output_tokens=sum(r.output_tokens for r in cell) / len(cell),
                over_generating=False,
            )
        )
    flagged: list[LatencyRow] = []
    for row in rows:
        baseline = next(
            (r for r in rows if r.model == row.model and r.condition == baseline_condition),
            None,
        )
        over = (
            baseline is not None
            and row.condition != baseline_condition
            and baseline.mean_output_tokens > 0
            and row.mean_output_tokens > 1.2 * baseline.mean_output_tokens
        )
        flagged.append(replace(row, over_generating=over))
    return flagged


def format_latency_report(rows: list[LatencyRow], csv: bool = False) -> str:
    header = ["model", "condition", "mean_latency_ms", "mean_output_tokens", "flag"]
    body = [
        [
            r.model,
            r.condition,
            f"{r.mean_latency_ms:.1f}",
            f"{r.mean_output_tokens:.1f}",
            "over-generating" if r.over_generating else "",
        ]
        for r in rows
    ]
    if csv:
        return "\n".join([",".join(header)] + [",".join(row) for row in body])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines += ["  ".join(c.ljust(widths[i]) for i, c in enumerate(row)) for row in body]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Synthetic manifest
# ---------------------------------------------------------------------------

def make_synthetic_manifest(n: int, seed: int = 0) -> list[BenchmarkItem]:
    """Generate arithmetic and selection items whose standard text is the
    baseline, ultra_dense is a symbol-heavy rewrite, and diluted comes from
    the dilution transform."""
    import random as _random

    rng = _random.Random(seed)
    items: list[BenchmarkItem] = []
    for i in range(n):
        kind = i % 4
        if kind < 3:
            a, b = rng.randrange(12, 95), rng.randrange(12, 95)
            if kind == 0:
                std = f"Compute the sum of {a} and {b}. Reply with the final integer."
                dense = f"Sum: {a} + {b}. Integer only."
                truth = a + b
            elif kind == 1:
                std = f"Compute the product of {a} and {b}. Reply with the final integer."
                dense = f"Product: {a} * {b}. Integer only."
                truth = a * b
            else:
                std = f"Compute the difference between {a} and {b}. Reply with the final integer."
                dense = f"Difference: {a} minus {b}. Integer only."
                truth = a - b
            item = BenchmarkItem(
                item_id=f"arith_{i:04d}",
                benchmark="arithmetic",
                answer_format=AnswerFormat.INTEGER,
                ground_truth=str(truth),
                variants={
                    "standard": std,
                    "ultra_dense": dense,
                    "diluted": dilute(std, seed=seed * 100003 + i),
                },
            )
        else:
            values = rng.sample(range(10, 99), 4)
            letter = MC_LETTERS[max(range(4), key=lambda j: values[j])]
            options = " ".join(f"{L}. {v}" for L, v in zip(MC_LETTERS, values))
            std = (
                f"Which of the following numbers is the largest? {options} "
                "Reply with one letter in the format: The answer is <LETTER>."
            )
            dense = f"Largest: {options} Reply: The answer is <LETTER>."
            item = BenchmarkItem(
                item_id=f"choice_{i:04d}",
                benchmark="choice",
                answer_format=AnswerFormat.MC_LETTER,
                ground_truth=letter,
                variants={
                    "standard": std,
                    "ultra_dense": dense,
                    "diluted": dilute(std, seed=seed * 100003 + i),
                },
            )
        items.append(item)
    return items
