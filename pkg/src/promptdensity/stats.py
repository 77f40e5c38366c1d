"""Paired significance testing, accuracy aggregation, and the density
ablation regression.

McNemar's test runs on discordant pair counts: exact two-sided binomial
for small counts, continuity-corrected chi-square otherwise. The
regression fits correct ~ score + benchmark fixed effects by iteratively
reweighted least squares with separation detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PromptDensityError

EXACT_BRANCH_LIMIT = 25  # discordant pairs below this use the exact test
DEFAULT_THRESHOLD = 0.10


class McNemarMethod(Enum):
    EXACT_BINOMIAL = "exact_binomial"
    CHI_SQUARE_CC = "chi_square_cc"


class Verdict(Enum):
    WIN = "win"
    LOSS = "loss"
    TIE = "tie"


@dataclass(frozen=True)
class PairedOutcome:
    """Correctness of the same (item, run) under two conditions."""

    item_id: str
    run: int
    a_correct: bool
    b_correct: bool


@dataclass(frozen=True)
class McNemarResult:
    b: int  # A correct, B incorrect
    c: int  # A incorrect, B correct
    n_concordant: int
    statistic: float | None
    p_value: float
    method: McNemarMethod
    verdict: Verdict

    def to_report(self) -> dict:
        return {
            "b": self.b,
            "c": self.c,
            "n_concordant": self.n_concordant,
            "statistic": None if self.statistic is None else round(self.statistic, 4),
            "p_value": round(self.p_value, 6),
            "method": self.method.value,
            "verdict": self.verdict.value,
        }


def chi2_sf_1df(x: float) -> float:
    """Survival function of the chi-square distribution with one degree of
    freedom: P(X >= x) = erfc(sqrt(x/2))."""
    if x < 0:
        raise PromptDensityError("chi-square statistic must be non-negative")
    return math.erfc(math.sqrt(x / 2.0))


def _exact_binomial_p(b: int, c: int) -> float:
    n = b + c
    k = max(b, c)
    tail = sum(math.comb(n, i) for i in range(k, n + 1))
    return min(1.0, 2.0 * tail / 2.0**n)


def mcnemar_counts(b: int, c: int, threshold: float = DEFAULT_THRESHOLD) -> McNemarResult:
    """McNemar test from the discordant counts alone."""
    if b < 0 or c < 0:
        raise PromptDensityError("counts must be non-negative")
    n = b + c
    if n == 0:
        return McNemarResult(b, c, 0, None, 1.0, McNemarMethod.EXACT_BINOMIAL, Verdict.TIE)
    if n < EXACT_BRANCH_LIMIT:
        p = _exact_binomial_p(b, c)
        statistic = None
        method = McNemarMethod.EXACT_BINOMIAL
    else:
        # Continuity correction clamps at zero so b == c gives p = 1 exactly.
        statistic = max(abs(b - c) - 1.0, 0.0) ** 2 / n
        p = chi2_sf_1df(statistic)
        method = McNemarMethod.CHI_SQUARE_CC
    if p < threshold and b > c:
        verdict = Verdict.WIN
    elif p < threshold and c > b:
        verdict = Verdict.LOSS
    else:
        verdict = Verdict.TIE
    return McNemarResult(b, c, 0, statistic, p, method, verdict)


def mcnemar(pairs: list[PairedOutcome], threshold: float = DEFAULT_THRESHOLD) -> McNemarResult:
    """McNemar test over paired (item, run) outcomes; A wins count in b."""
    if not pairs:
        raise PromptDensityError("empty pair set")
    keys = {(p.item_id, p.run) for p in pairs}
    if len(keys) != len(pairs):
        raise PromptDensityError("duplicate (item, run) pair in comparison set")
    b = sum(1 for p in pairs if p.a_correct and not p.b_correct)
    c = sum(1 for p in pairs if not p.a_correct and p.b_correct)
    result = mcnemar_counts(b, c, threshold)
    return McNemarResult(
        b=b,
        c=c,
        n_concordant=len(pairs) - b - c,
        statistic=result.statistic,
        p_value=result.p_value,
        method=result.method,
        verdict=result.verdict,
    )


# ---------------------------------------------------------------------------
# Accuracy aggregation
# ---------------------------------------------------------------------------

CANONICAL_CONDITIONS = ("diluted", "standard", "ultra_dense")
TABLE_COLUMNS = ("benchmark", "diluted", "standard", "dense", "delta", "sig")


@dataclass(frozen=True)
class AccuracyRow:
    benchmark: str
    accuracy: dict[str, float]  # condition -> percent
    delta: float | None  # ultra_dense minus diluted, percentage points
    significant: bool


def _pair_up(records: list, cond_a: str, cond_b: str) -> list[PairedOutcome]:
    by_key: dict[tuple, dict[str, bool]] = {}
    for r in records:
        key = (r.model, r.benchmark, r.item_id, r.run)
        by_key.setdefault(key, {})[r.condition] = r.correct
    pairs = []
    for (model, bench, item, run), conds in sorted(by_key.items()):
        if cond_a in conds and cond_b in conds:
            pairs.append(
                PairedOutcome(f"{model}/{bench}/{item}", run, conds[cond_a], conds[cond_b])
            )
    return pairs


def accuracy_table(
    records: list, threshold: float = DEFAULT_THRESHOLD
) -> list[AccuracyRow]:
    """Per-benchmark accuracy by condition, the ultra-dense minus diluted
    delta, and a significance star from the paired test. Ends with an
    Overall row pooling every benchmark."""
    if not records:
        raise PromptDensityError("no records to aggregate")
    benchmarks = sorted({r.benchmark for r in records})
    rows: list[AccuracyRow] = []
    groups = [(b, [r for r in records if r.benchmark == b]) for b in benchmarks]
    if len(benchmarks) > 1:
        groups.append(("Overall", list(records)))
    for name, group in groups:
        acc: dict[str, float] = {}
        for condition in sorted({r.condition for r in group}):
            cell = [r for r in group if r.condition == condition]
            acc[condition] = 100.0 * sum(r.correct for r in cell) / len(cell)
        delta = None
        significant = False
        if "ultra_dense" in acc and "diluted" in acc:
            delta = acc["ultra_dense"] - acc["diluted"]
            pairs = _pair_up(group, "ultra_dense", "diluted")
            if pairs:
                significant = mcnemar(pairs, threshold).verdict is Verdict.WIN
        rows.append(AccuracyRow(name, acc, delta, significant))
    return rows


def format_accuracy_table(rows: list[AccuracyRow], csv: bool = False) -> str:
    """Render rows in the fixed column order, aligned text or CSV."""
    header = list(TABLE_COLUMNS)
    body: list[list[str]] = []
    for row in rows:
        cells = [row.benchmark]
        for condition in CANONICAL_CONDITIONS:
            value = row.accuracy.get(condition)
            cells.append("" if value is None else f"{value:.1f}")
        cells.append("" if row.delta is None else f"{row.delta:+.1f}")
        cells.append("*" if row.significant else "")
        body.append(cells)
    if csv:
        lines = [",".join(header)] + [",".join(cells) for cells in body]
        return "\n".join(lines)
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for cells in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)))
    return "\n".join(lines)


@dataclass(frozen=True)
class CellVerdict:
    model: str
    benchmark: str
    result: McNemarResult


@dataclass(frozen=True)
class WinLossSummary:
    wins: int
    losses: int
    ties: int
    cells: tuple[CellVerdict, ...]


def wins_losses(
    records: list,
    cond_a: str = "ultra_dense",
    cond_b: str = "diluted",
    threshold: float = DEFAULT_THRESHOLD,
) -> WinLossSummary:
    """Per (model, benchmark) paired-test verdicts for cond_a vs cond_b."""
    cells: list[CellVerdict] = []
    keys = sorted({(r.model, r.benchmark) for r in records})
    for model, benchmark in keys:
        group = [r for r in records if r.model == model and r.benchmark == benchmark]
        pairs = _pair_up(group, cond_a, cond_b)
        if not pairs:
            continue
        cells.append(CellVerdict(model, benchmark, mcnemar(pairs, threshold)))
    wins = sum(1 for c in cells if c.result.verdict is Verdict.WIN)
    losses = sum(1 for c in cells if c.result.verdict is Verdict.LOSS)
    return WinLossSummary(wins, losses, len(cells) - wins - losses, tuple(cells))


# ---------------------------------------------------------------------------
# Logistic regression (density ablation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionFit:
    """IRLS fit of correct ~ score + benchmark fixed effects."""

    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    converged: bool
    iterations: int
    reference_benchmark: str
    separation_detected: bool = False


_MAX_ITER = 100
_TOL = 1e-8
_DIVERGENCE_BOUND = 30.0


def logistic_fit(
    observations: list[tuple[bool, float, str]],
    max_iter: int = _MAX_ITER,
    tol: float = _TOL,
) -> RegressionFit:
    """Maximum-likelihood logistic regression via Newton/IRLS.

    Observations are (correct, score, benchmark id) triples. Benchmarks
    enter as fixed-effect dummies against the lexicographically first
    benchmark. Diverging coefficients (complete separation) yield
    converged=False rather than fake estimates.
    """
    if len(observations) < 2:
        raise PromptDensityError("need at least two observations")
    scores = np.array([s for _, s, _ in observations], dtype=float)
    if np.ptp(scores) == 0.0:
        raise PromptDensityError("score has zero variance")
    y = np.array([1.0 if ok else 0.0 for ok, _, _ in observations])
    benchmarks = sorted({b for _, _, b in observations})
    reference = benchmarks[0]
    names = ["intercept", "sde"] + [f"benchmark[{b}]" for b in benchmarks[1:]]
    n, k = len(observations), 2 + len(benchmarks) - 1
    x = np.zeros((n, k))
    x[:, 0] = 1.0
    x[:, 1] = scores
    for j, bench in enumerate(benchmarks[1:], start=2):
        x[:, j] = [1.0 if b == bench else 0.0 for _, _, b in observations]

    beta = np.zeros(k)
    converged = False
    separated = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = np.clip(x @ beta, -500, 500)
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        hessian = x.T @ (w[:, None] * x)
        gradient = x.T @ (y - mu)
        try:
            delta = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            separated = True
            break
        beta = beta + delta
        if np.max(np.abs(beta)) > _DIVERGENCE_BOUND:
            separated = True
            break
        if np.max(np.abs(delta)) < tol:
            converged = True
            break

    eta = np.clip(x @ beta, -500, 500)
    mu = 1.0 / (1.0 + np.exp(-eta))
    w = mu * (1.0 - mu)
    info = x.T @ (w[:, None] * x)
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(k, float("nan"))
    return RegressionFit(
        coefficients=dict(zip(names, beta.tolist())),
        standard_errors=dict(zip(names, se.tolist())),
        converged=converged and not separated,
        iterations=iterations,
        reference_benchmark=reference,
        separation_detected=separated,
    )


def log_likelihood(
    observations: list[tuple[bool, float, str]], coefficients: dict[str, float]
) -> float:
    """Bernoulli log-likelihood at the given coefficients (for checks)."""
    benchmarks = sorted({b for _, _, b in observations})
    total = 0.0
    for ok, score, bench in observations:
        eta = coefficients["intercept"] + coefficients["sde"] * score
        if bench != benchmarks[0]:
            eta += coefficients.get(f"benchmark[{bench}]", 0.0)
        eta = max(min(eta, 500.0), -500.0)
        p = 1.0 / (1.0 + math.exp(-eta))
        p = min(max(p, 1e-15), 1.0 - 1e-15)
        total += math.log(p) if ok else math.log(1.0 - p)
    return total
