"""Acceptance suite: one test per shipped guarantee, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``)."""
from __future__ import annotations

import contextlib
import json
import math
import random
import time

import pytest

from promptdensity.cli import main
from promptdensity.harness import (
    BackendDescriptor,
    BackendKind,
    build_backend,
    make_synthetic_manifest,
    run_experiment,
)
from promptdensity.rewrite import densify, dilute, gradient_variants, pad
from promptdensity.scoring import DensityClass, analyze
from promptdensity.stats import (
    McNemarMethod,
    Verdict,
    logistic_fit,
    mcnemar_counts,
)
from promptdensity.tokens import tokenize

from conftest import ARC_CLASSES, ARC_TARGETS
from test_extraction import EXACT_CASES, INT_CASES, MC_CASES


@contextlib.contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:02d} [{title}]: FAIL")
        raise
    print(f"ACCEPTANCE {number:02d} [{title}]: PASS")


def test_01_calibration(arc_variants):
    with criterion(1, "calibration"):
        started = time.perf_counter()
        scores = {}
        for condition, text in arc_variants.items():
            a = analyze(text)
            scores[condition] = a.sde
            assert abs(a.sde - ARC_TARGETS[condition]) <= 0.15, (condition, a.sde)
            assert a.klass.value == ARC_CLASSES[condition], (condition, a.klass)
        assert scores["diluted"] < scores["standard"] < scores["ultra_dense"]
        assert time.perf_counter() - started < 1.0


def test_02_class_placement():
    with criterion(2, "class placement"):
        expected = {
            "Can you maybe help me understand what AI is?": DensityClass.DILUTED,
            "Explain artificial intelligence briefly.": DensityClass.STANDARD,
            "How does backpropagation update weights step-by-step?": DensityClass.DENSE,
            "Derive backpropagation gradient: dL/dW for cross-entropy loss.":
                DensityClass.ULTRA_DENSE,
        }
        placed = sum(1 for text, klass in expected.items() if analyze(text).klass is klass)
        assert placed == 4, f"{placed}/4 prompts placed"


def test_03_densify(arc_variants):
    with criterion(3, "densify"):
        result = densify(arc_variants["diluted"])
        for needle in ("A.", "B.", "C.", "D.", "mixture"):
            assert needle in result.output, needle
        assert result.sde_after >= 0.65, result.sde_after
        assert densify(result.output).output == result.output  # fixed point


def test_04_dilute(corpus):
    with criterion(4, "dilute"):
        assert len(corpus) == 20
        diluted_hits = 0
        for text in corpus:
            out = dilute(text, seed=11)
            assert out == dilute(text, seed=11)  # exact determinism
            assert tokenize(out).word_count >= 1.5 * tokenize(text).word_count
            if analyze(out).klass is DensityClass.DILUTED:
                diluted_hits += 1
        assert diluted_hits >= 18, f"{diluted_hits}/20 diluted"


def test_05_padding_control(corpus):
    with criterion(5, "padding control"):
        for text in corpus:
            padded = pad(text, 40)
            assert len(padded) > len(text)
            assert abs(analyze(padded).sde - analyze(text).sde) <= 0.01


def test_06_gradient(corpus):
    with criterion(6, "gradient"):
        targets = [0.20, 0.35, 0.50, 0.65, 0.80]
        total = hits = 0
        for text in corpus:
            for variant in gradient_variants(text, targets, seed=3):
                if not variant.reachable:
                    continue
                total += 1
                if abs(variant.achieved - variant.target) <= 0.07:
                    hits += 1
        assert total > 0
        assert hits / total >= 0.90, f"{hits}/{total} in band"


def test_07_extraction_fixture_suite():
    with criterion(7, "extraction"):
        from promptdensity.extraction import extract_integer, extract_mc_letter, match_exact

        assert len(MC_CASES) + len(INT_CASES) + len(EXACT_CASES) >= 40
        for response, letter, method in MC_CASES:
            got, got_method = extract_mc_letter(response)
            assert (got, got_method) == (letter, method), response
        for response, value in INT_CASES:
            assert extract_integer(response) == value, response
        for response, truth, expected in EXACT_CASES:
            assert match_exact(response, truth) is expected, (response, truth)


def test_08_mcnemar_oracle():
    with criterion(8, "mcnemar oracle"):
        exact = mcnemar_counts(10, 2)
        assert exact.method is McNemarMethod.EXACT_BINOMIAL
        assert abs(exact.p_value - 0.0386) <= 0.001

        corrected = mcnemar_counts(40, 20)
        assert corrected.method is McNemarMethod.CHI_SQUARE_CC
        assert abs(corrected.statistic - 6.017) <= 0.001
        assert abs(corrected.p_value - 0.0142) <= 0.001

        for b in (0, 1, 5, 20, 40):
            assert mcnemar_counts(b, b).p_value == 1.0

        rng = random.Random(77)
        flip = {Verdict.WIN: Verdict.LOSS, Verdict.LOSS: Verdict.WIN, Verdict.TIE: Verdict.TIE}
        for _ in range(1000):
            b, c = rng.randrange(0, 100), rng.randrange(0, 100)
            fwd, rev = mcnemar_counts(b, c), mcnemar_counts(c, b)
            assert fwd.p_value == pytest.approx(rev.p_value, abs=1e-15)
            assert rev.verdict is flip[fwd.verdict]


def test_09_logistic_ablation():
    with criterion(9, "logistic ablation"):
        rng = random.Random(42)
        observations = []
        for _ in range(5000):
            s = rng.uniform(0.1, 0.9)
            p = 1.0 / (1.0 + math.exp(-(-2.0 + 4.0 * s)))
            observations.append((rng.random() < p, s, "synthetic"))
        fit = logistic_fit(observations)
        assert fit.converged
        assert 3.4 <= fit.coefficients["sde"] <= 4.6, fit.coefficients["sde"]

        null_rng = random.Random(7)
        null_obs = [(null_rng.random() < 0.5, null_rng.uniform(0.1, 0.9), "b")
                    for _ in range(3000)]
        null_fit = logistic_fit(null_obs)
        assert abs(null_fit.coefficients["sde"]) < 2 * null_fit.standard_errors["sde"]

        separated = logistic_fit([(True, rng.uniform(0.1, 0.9), "b") for _ in range(200)])
        assert separated.separation_detected and not separated.converged


def test_10_end_to_end_desk_scale(tmp_path, capsys):
    with criterion(10, "end-to-end desk scale"):
        started = time.perf_counter()
        items = make_synthetic_manifest(100, seed=5)
        descriptor = BackendDescriptor(
            kind=BackendKind.MOCK, model_id="mock-1",
            params={"intercept": -2.0, "slope": 4.0},
        )
        out = tmp_path / "results.json"
        records = run_experiment(
            items, [build_backend(descriptor, seed=5)],
            runs_per_item=3, seed=5, out_path=str(out),
        )
        assert len(records) == 900
        assert len({r.key for r in records}) == 900

        accuracy = {}
        for condition in ("diluted", "ultra_dense"):
            cell = [r for r in records if r.condition == condition]
            accuracy[condition] = sum(r.correct for r in cell) / len(cell)
        assert accuracy["ultra_dense"] > accuracy["diluted"]

        code = main(["mcnemar", str(out), "--pair", "ultra_dense:diluted", "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["verdict"] == "win"
        assert payload["p_value"] < 0.10

        code = main(["analyze", str(out), "--csv"])
        table = capsys.readouterr().out
        assert code == 0
        lines = table.splitlines()
        assert lines[0] == "benchmark,diluted,standard,dense,delta,sig"
        accuracy_lines = []
        for line in lines[1:]:
            if not line.strip():
                break  # latency table follows
            accuracy_lines.append(line)
        deltas = [float(line.split(",")[4]) for line in accuracy_lines if line.split(",")[4]]
        assert deltas and all(d > 0 for d in deltas)

        assert time.perf_counter() - started < 60.0


def test_11_resume(tmp_path):
    with criterion(11, "resume"):
        items = make_synthetic_manifest(20, seed=9)
        descriptor = BackendDescriptor(
            kind=BackendKind.MOCK, model_id="mock-1",
            params={"intercept": -2.0, "slope": 4.0},
        )
        straight = tmp_path / "straight.json"
        run_experiment(items, [build_backend(descriptor, seed=9)],
                       runs_per_item=3, seed=9, out_path=str(straight))

        # Kill the run after ~half the records: keep a prefix of the partial.
        partial_lines = (tmp_path / "straight.json.partial").read_text().splitlines()
        resumed = tmp_path / "resumed.json"
        keep = partial_lines[: len(partial_lines) // 2]
        (tmp_path / "resumed.json.partial").write_text("\n".join(keep) + "\n")
        run_experiment(items, [build_backend(descriptor, seed=9)],
                       runs_per_item=3, seed=9, out_path=str(resumed), resume=True)

        def normalized(path):
            return [
                {k: v for k, v in record.items() if k != "timestamp"}
                for record in json.loads(path.read_text())
            ]

        assert normalized(straight) == normalized(resumed)
