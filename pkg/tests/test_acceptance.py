"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -s`` to see the
lines as they execute.

Numeric targets stated to d decimal places are asserted within
0.5 * 10^-d (plus a float-comparison epsilon); values stated as exact are
asserted as float equality against exact-ratio arithmetic.
"""

from __future__ import annotations

import json
import math
import random
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from evalgate.cascade import evaluate_cascade
from evalgate.cli import main
from evalgate.evaluator import evaluate_records
from evalgate.explanation import ProbeContext, evaluate_explanation
from evalgate.model import Dimension, EvalConfig
from evalgate.reliability import (
    detect_silent_degradation,
    latency_quality_correlation,
    partial_response_rate,
    tool_reliability_score,
)
from evalgate.simulate import (
    FM5_BASELINE_VALUES,
    FM5_ORIGINAL_VALUES,
    ScenarioSpec,
    generate,
    generate_fm1,
    generate_fm2,
    generate_fm5,
    reference_probe,
)
from evalgate.stats import cosine_similarity, normalized_entropy, pearson, spearman

CFG = EvalConfig()
SEED = 42


@contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} ({name}): FAIL")
        raise
    print(f"ACCEPTANCE {number} ({name}): PASS")


def printed(value: float, stated: float, decimals: int) -> bool:
    return abs(value - stated) <= 0.5 * 10.0 ** (-decimals) + 1e-9


def run_scenario_through_cli(tmp_path, scenario: str, seed: int, variant: str | None = None):
    trace = tmp_path / f"{scenario}.jsonl"
    report = tmp_path / f"{scenario}_report.json"
    argv = ["simulate", "--scenario", scenario, "--seed", str(seed), "--output", str(trace)]
    if variant:
        argv += ["--variant", variant]
    assert main(argv) == 0
    code = main(["evaluate", "--input", str(trace), "--output", str(report)])
    return code, json.loads(report.read_text())


def test_criterion_1_fm3_distribution_collapse(tmp_path):
    with criterion(1, "fm3 distribution collapse reproduction"):
        started = time.perf_counter()
        code, document = run_scenario_through_cli(tmp_path, "fm3", SEED)
        windows = document["dimensions"]["DISTRIBUTION"]["metadata"]["windows"]
        assert len(windows) == 5

        assert [w["diversity"] for w in windows] == [0.200, 0.200, 0.080, 0.080, 0.030]
        assert windows[4]["repeat_rate"] == 1.000
        assert windows[0]["entropy"] >= 0.95
        assert windows[1]["entropy"] >= 0.95
        assert windows[4]["entropy"] <= 0.90
        for w in windows:
            assert 0.86 <= w["mean_quality"] <= 0.88

        first_failing = next(i + 1 for i, w in enumerate(windows) if w["score"] < 0.6)
        assert 3 <= first_failing <= 5
        assert code == 1  # collapse blocks the gate

        assert time.perf_counter() - started < 5.0


def test_criterion_2_fm2_silent_degradation():
    with criterion(2, "fm2 silent tool degradation reproduction"):
        started = time.perf_counter()
        scenario = generate_fm2(SEED)

        rates, flags, scores = [], [], []
        previous_accuracy = None
        for stage in scenario.stages:
            prr = partial_response_rate(stage.calls)
            rho = latency_quality_correlation(stage.calls, stage.quality, stage.baseline_quality)
            score = tool_reliability_score(prr, rho)
            delta = 0.0 if previous_accuracy is None else stage.accuracy - previous_accuracy
            flags.append(detect_silent_degradation(prr, delta, CFG))
            previous_accuracy = stage.accuracy
            rates.append(prr)
            scores.append(score)
            # reported triple satisfies the scoring identity
            assert score == pytest.approx(
                min(1.0, max(0.0, 1 - prr * (1 + max(rho, 0.0)))), abs=1e-12
            )

        assert rates == [2 / 50, 11 / 50, 20 / 50, 29 / 50]
        assert [round(r, 3) for r in rates] == [0.040, 0.220, 0.400, 0.580]
        assert flags == [False, True, True, True]
        for got, want in zip(scores, (0.940, 0.650, 0.320, 0.110)):
            assert abs(got - want) <= 0.05

        assert time.perf_counter() - started < 5.0


def test_criterion_3_fm1_cascade_tables():
    with criterion(3, "fm1 cascade uncertainty reproduction"):
        expected = {
            "healthy": (0.906, 0.000, False, 0.906),
            "low1": (0.762, 0.875, True, 0.3245),
            "low2": (0.764, 0.887, True, 0.3205),
            "multi": (0.650, 0.738, True, 0.281),
        }
        for variant, (mean, illusion, fails, stated_score) in expected.items():
            result = evaluate_cascade(generate_fm1(variant), CFG)
            assert printed(result.mean_confidence, mean, 3)
            assert printed(result.cis, illusion, 3)
            assert result.propagation_failure is fails

            # literal formula identity at full precision
            assert result.raw_score == pytest.approx(
                result.mean_confidence - CFG.lambda_ * result.cis, abs=1e-15
            )
            # stated score values were derived from 3-decimal illusion figures,
            # so they carry up to 2.5e-4 of rounding; 5e-4 covers it
            assert abs(result.raw_score - stated_score) <= 5e-4

            if fails:
                # the discrepancy: a flat mean-minus-0.300 column is NOT what
                # the penalty formula produces
                assert abs((result.mean_confidence - result.raw_score) - 0.300) > 1e-2


def test_criterion_4_fm5_explanation_decoupling():
    with criterion(4, "fm5 explanation decoupling reproduction"):
        noiseless = generate_fm5("causal", SEED, noise_scale=0.0)
        causal = evaluate_explanation(
            noiseless.probe, noiseless.case, noiseless.baseline_values,
            noiseless.original_values, CFG,
        )
        assert causal.acs == 1.0
        assert causal.decoupled is False

        proxy = generate_fm5("proxy_first", SEED)
        proxy_result = evaluate_explanation(
            proxy.probe, proxy.case, proxy.baseline_values, proxy.original_values, CFG
        )
        assert proxy_result.acs < 0.5
        assert proxy_result.top_impact < 0.05
        assert proxy_result.decoupled is True

        partial = generate_fm5("proxy_second", SEED)
        partial_result = evaluate_explanation(
            partial.probe, partial.case, partial.baseline_values, partial.original_values, CFG
        )
        assert partial_result.decoupled is False

        decisions = {
            generate_fm5(v, SEED).case.decision_value
            for v in ("causal", "proxy_first", "proxy_second")
        }
        assert len(decisions) == 1  # attribution never alters the decision


def test_criterion_5_detection_matrix():
    with criterion(5, "detection matrix across all four scenarios"):
        probe_context = ProbeContext(reference_probe(), FM5_ORIGINAL_VALUES, FM5_BASELINE_VALUES)

        # fm1: every non-injected step stays in the healthy confidence band
        steps = generate_fm1("low1")
        assert all(s.confidence >= 0.85 for s in steps if s.confidence >= CFG.tau_u)
        report = evaluate_records(steps, CFG)
        assert not report.per_dimension[Dimension.CASCADE].passed

        # fm2: external accuracy never moves more than 0.03 from baseline
        scenario = generate_fm2(SEED)
        baseline = scenario.stages[0].accuracy
        assert all(abs(s.accuracy - baseline) <= 0.03 + 1e-12 for s in scenario.stages)
        report = evaluate_records(scenario.records, CFG)
        assert not report.per_dimension[Dimension.TOOL].passed

        # fm3: per-window accuracy stays within 0.03 of its baseline
        report = evaluate_records(generate(ScenarioSpec("fm3", seed=SEED)), CFG)
        windows = report.per_dimension[Dimension.DISTRIBUTION].metadata["windows"]
        quality_baseline = windows[0]["mean_quality"]
        assert all(abs(w["mean_quality"] - quality_baseline) <= 0.03 + 1e-12 for w in windows)
        assert not report.per_dimension[Dimension.DISTRIBUTION].passed

        # fm5: the decision signal is byte-flat across variants
        values = [generate_fm5(v, SEED).case.decision_value
                  for v in ("causal", "proxy_first", "proxy_second")]
        assert max(values) - min(values) == 0.0
        report = evaluate_records(
            generate(ScenarioSpec("fm5", seed=SEED, variant="proxy_first")),
            CFG, probe_context=probe_context,
        )
        assert not report.per_dimension[Dimension.EXPLANATION].passed


def test_criterion_6_numerics_property_suite():
    with criterion(6, "numerics properties and oracles"):
        # frozen brute-force oracle values
        assert normalized_entropy([2, 1, 1], 3) == pytest.approx(0.946394630357186, abs=1e-12)
        assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-12)
        assert spearman([0.55, 0.35, 0.05], [0.04, 0.45, 0.36]) == pytest.approx(-0.5, abs=1e-12)
        assert cosine_similarity([1.0, 2.0], [2.0, 1.0]) == pytest.approx(0.8, abs=1e-12)
        assert normalized_entropy([5] * 20, 20) == pytest.approx(1.0, abs=1e-12)
        assert normalized_entropy([9, 0, 0], 3) == 0.0

        # seeded randomized property sweep, 1000 cases per family
        rng = random.Random(1234)
        for _ in range(1000):
            k = rng.randint(1, 25)
            counts = [rng.randint(0, 30) for _ in range(k)]
            if sum(counts) == 0:
                counts[rng.randrange(k)] = 1
            h = normalized_entropy(counts, k)
            assert 0.0 <= h <= 1.0
            shuffled = list(counts)
            rng.shuffle(shuffled)
            assert normalized_entropy(shuffled, k) == h

        for _ in range(1000):
            n = rng.randint(2, 20)
            x = [rng.uniform(-100, 100) for _ in range(n)]
            y = [rng.uniform(-100, 100) for _ in range(n)]
            r = pearson(x, y)
            assert -1.0 <= r <= 1.0
            assert pearson(y, x) == r
            scale, shift = rng.uniform(0.1, 10), rng.uniform(-50, 50)
            assert pearson([scale * a + shift for a in x], y) == pytest.approx(r, abs=1e-9)

        for _ in range(1000):
            n = rng.randint(2, 20)
            x = [rng.uniform(-100, 100) for _ in range(n)]
            y = [rng.uniform(-100, 100) for _ in range(n)]
            rs = spearman(x, y)
            assert -1.0 <= rs <= 1.0
            assert spearman(y, x) == rs
            # strictly monotone transform of x leaves ranks unchanged
            assert spearman([math.atan(a) for a in x], y) == rs
            # tie-free data: equals pearson over integer ranks
            if len(set(x)) == n and len(set(y)) == n:
                rank = lambda v: [sorted(v).index(a) + 1 for a in v]
                assert rs == pearson(rank(x), rank(y))

        for _ in range(1000):
            n = rng.randint(1, 12)
            u = [rng.uniform(-10, 10) for _ in range(n)]
            v = [rng.uniform(-10, 10) for _ in range(n)]
            if all(a == 0 for a in u):
                u[0] = 1.0
            if all(b == 0 for b in v):
                v[0] = 1.0
            assert -1.0 <= cosine_similarity(u, v) <= 1.0
            assert cosine_similarity(u, u) == 1.0


ACCEPTANCE_SPECS = [
    ("fm1", "healthy"), ("fm1", "low1"), ("fm1", "low2"), ("fm1", "multi"),
    ("fm2", None), ("fm3", None),
    ("fm5", "causal"), ("fm5", "proxy_first"), ("fm5", "proxy_second"),
]


def test_criterion_7_determinism_across_processes(tmp_path):
    with criterion(7, "byte-identical reports across runs and process restarts"):
        for scenario, variant in ACCEPTANCE_SPECS:
            outputs = []
            for attempt in ("a", "b"):
                trace = tmp_path / f"{scenario}-{variant}-{attempt}.jsonl"
                report = tmp_path / f"{scenario}-{variant}-{attempt}.json"
                sim = [sys.executable, "-m", "evalgate.cli", "simulate",
                       "--scenario", scenario, "--seed", str(SEED), "--output", str(trace)]
                if variant:
                    sim += ["--variant", variant]
                assert subprocess.run(sim, capture_output=True).returncode == 0
                ev = subprocess.run(
                    [sys.executable, "-m", "evalgate.cli", "evaluate",
                     "--input", str(trace), "--output", str(report)],
                    capture_output=True,
                )
                assert ev.returncode in (0, 1)
                outputs.append((trace.read_bytes(), report.read_bytes()))
            assert outputs[0] == outputs[1], f"{scenario}/{variant} not reproducible"


def test_criterion_8_gate_exit_codes(tmp_path):
    with criterion(8, "gate exit code semantics"):
        healthy = tmp_path / "healthy.jsonl"
        assert main(["simulate", "--scenario", "fm1", "--variant", "healthy",
                     "--output", str(healthy)]) == 0
        assert main(["evaluate", "--input", str(healthy),
                     "--output", str(tmp_path / "h.json")]) == 0

        collapsing = tmp_path / "collapsing.jsonl"
        assert main(["simulate", "--scenario", "fm3", "--seed", str(SEED),
                     "--output", str(collapsing)]) == 0
        assert main(["evaluate", "--input", str(collapsing),
                     "--output", str(tmp_path / "c.json")]) == 1

        malformed = tmp_path / "malformed.jsonl"
        malformed.write_text("this is not a trace\n\x00\n")
        assert main(["evaluate", "--input", str(malformed),
                     "--output", str(tmp_path / "m.json")]) == 2
