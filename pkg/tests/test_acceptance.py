"""Acceptance criteria: twelve end-to-end checks with thresholds fixed up front.

Each test prints one `[criterion N] PASS/FAIL ...` line (run with -s to see
them live; pytest -v shows the same verdict per test name). The heavy 1-D
sweep is computed once and shared between criteria 6 and 7. Expected wall
time for the whole module is on the order of ten minutes, dominated by the
n = 2^22 sort runs and the d = 2 ratio sweep.
"""

import itertools
import math
import time

import numpy as np
import pytest

from phaseplace.core import DistributionSpec, compute_ell
from phaseplace.engine import next_phase_layout
from phaseplace.geometry import BlockPartition
from phaseplace.harness import (
    BinSimConfig,
    ExperimentConfig,
    run_experiment,
    run_trial,
    sample_input,
    summary_json_text,
    trials_csv_text,
    verify_fill_before_overflow,
    verify_lemma1,
)
from phaseplace.oracles import (
    block_tour_cost,
    tsp_path_bruteforce,
    tsp_path_exact,
    tsp_path_heuristic,
)
from phaseplace.rng import uniform_block

SEED = 0
DRIFT_TOLERANCE = 1.25  # normalized ratio may not grow by more than 25%


def _verdict(num: int, ok: bool, detail: str) -> None:
    line = f"[criterion {num:>2}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    assert ok, line


def _max_drift(summary: dict) -> float:
    q = summary["fit"]["normalized_ratios"]
    worst = 0.0
    for i, j in itertools.combinations(range(len(q)), 2):
        if q[i] > 0:
            worst = max(worst, q[j] / q[i])
    return worst


@pytest.fixture(scope="session")
def sweep_1d():
    cfg = ExperimentConfig(
        mode="sweep", n_list=(2**16, 2**18, 2**20, 2**22),
        d=1, trials=20, seed=SEED,
    )
    return run_experiment(cfg)


def test_criterion_01_toy_layout():
    got = next_phase_layout([25, 25, 25, 25], [25, 20, 10, 15], 50)
    ok = got == (40.0, [40, 40], [35, 15], 0)
    _verdict(1, ok, f"C2={got[0]}, caps={got[1]}, sizes={got[2]}")


def test_criterion_02_serpentine_exhaustive():
    t0 = time.monotonic()
    grids = 0
    blocks = 0
    for d in range(1, 5):
        for exps in itertools.product(range(13), repeat=d):
            if sum(exps) > 12:
                continue
            sides = tuple(1 << e for e in exps)
            part = BlockPartition(sides)
            coords = np.array(part.coords_by_order(), dtype=np.int64)
            flat = np.zeros(len(coords), dtype=np.int64)
            mult = 1
            for i, ni in enumerate(sides):
                flat += (coords[:, i] - 1) * mult
                mult *= ni
            assert len(np.unique(flat)) == part.num_blocks, sides
            if len(coords) > 1:
                diff = np.abs(np.diff(coords, axis=0))
                assert (diff.sum(axis=1) == 1).all(), sides
            for pos, v in enumerate(part.coords_by_order(), start=1):
                assert part.order_index(v) == pos, (sides, v)
            grids += 1
            blocks += part.num_blocks
    dt = time.monotonic() - t0
    _verdict(2, dt < 10.0, f"{grids} grids / {blocks} blocks in {dt:.1f}s")


def test_criterion_03_oracle_soundness():
    t0 = time.monotonic()
    worst_dp_bf = 0.0
    heuristic_ok = True
    for t in range(200):
        d = 1 + t % 3
        n = 2 + t % 7
        pts = uniform_block(9000 + t, n * d).reshape(n, d)
        dp = tsp_path_exact(pts).value
        bf = tsp_path_bruteforce(pts).value
        worst_dp_bf = max(worst_dp_bf, abs(dp - bf))
        if tsp_path_heuristic(pts).value < dp - 1e-9:
            heuristic_ok = False
    worst_span = 0.0
    for t in range(200):
        xs = uniform_block(9500 + t, 8)
        dp = tsp_path_exact(xs.reshape(-1, 1)).value
        worst_span = max(worst_span, abs(dp - float(xs.max() - xs.min())))
    dt = time.monotonic() - t0
    ok = worst_dp_bf == 0.0 and heuristic_ok and worst_span <= 1e-9 and dt < 30.0
    _verdict(3, ok, f"dp-bf gap {worst_dp_bf:.1e}, heuristic >= exact "
                    f"{heuristic_ok}, 1-d span gap {worst_span:.1e}, {dt:.1f}s")


def test_criterion_04_overflow_timing():
    t0 = time.monotonic()
    rep = verify_lemma1(
        BinSimConfig.uniform_caps(256, 100, rounds=500, seed=SEED,
                                  n_context=1 << 20)
    )
    row = [r for r in rep["slacks"] if r["a"] == 4.0][0]
    dt = time.monotonic() - t0
    ok = row["t_frac"] >= 0.95 and row["t_prime_frac"] >= 0.95 and dt < 60.0
    _verdict(4, ok, f"P[T >= M-4M/sqrt(log2 n)] = {row['t_frac']:.3f}, "
                    f"P[T' <= M+4M/sqrt(log2 n)] = {row['t_prime_frac']:.3f}, "
                    f"{dt:.0f}s")


def test_criterion_05_fill_before_overflow():
    rep = verify_fill_before_overflow(
        ExperimentConfig(mode="verify_fill", n_list=(2**20,), d=1,
                         trials=50, seed=SEED)
    )
    ok = (rep["overall_success"] >= 0.95 and rep["failure_rate"] <= 0.05
          and not rep["vacuous"])
    _verdict(5, ok, f"fill-before-overflow in {rep['overall_success']:.2f} "
                    f"of runs, failure rate {rep['failure_rate']:.2f}")


def test_criterion_06_ratio_scaling_1d(sweep_1d):
    _, summary = sweep_1d
    drift = _max_drift(summary)
    q = [f"{v:.4f}" for v in summary["fit"]["normalized_ratios"]]
    ok = drift <= DRIFT_TOLERANCE
    _verdict(6, ok, f"ratio/log2^2(n) = {q}, max pairwise growth "
                    f"{drift:.3f} (tolerance {DRIFT_TOLERANCE})")


def test_criterion_07_cost_decomposition(sweep_1d):
    trials, _ = sweep_1d
    checked = 0
    bad_sum = bad_sub = bad_total = 0
    for r in trials:
        if r.failed:
            continue
        checked += 1
        if abs(sum(r.breakdown.values()) - r.cost) > 1e-9 * max(1.0, r.cost):
            bad_sum += 1
        if any(v > 2.0 + 1e-9 for v in r.between_buckets_by_subarray):
            bad_sub += 1
        if r.breakdown["between_buckets"] > 2.0 * r.trace.k + 1e-9:
            bad_total += 1
    ok = checked > 0 and bad_sum == bad_sub == bad_total == 0
    _verdict(7, ok, f"{checked} trials: {bad_sum} bad sums, {bad_sub} "
                    f"subarrays over 2, {bad_total} totals over 2k")


def test_criterion_08_block_tour_bound():
    n, d, rounds = 2**14, 2, 20
    part = BlockPartition.build(d, compute_ell(n))
    worst = 0.0
    t0 = time.monotonic()
    for t in range(rounds):
        pts = sample_input(DistributionSpec.uniform(), n, d, SEED ^ t)
        ratio = block_tour_cost(pts, part).value / tsp_path_heuristic(pts).value
        worst = max(worst, ratio)
    dt = time.monotonic() - t0
    ok = worst <= 15.0 and dt < 300.0
    _verdict(8, ok, f"worst block_tour/heuristic = {worst:.3f} over "
                    f"{rounds} trials, {dt:.0f}s")


def test_criterion_09_ratio_scaling_2d():
    cfg = ExperimentConfig(
        mode="sweep", n_list=tuple(2**e for e in range(12, 17)),
        d=2, trials=10, seed=SEED,
    )
    _, summary = run_experiment(cfg)
    drift = _max_drift(summary)
    q = [f"{v:.4f}" for v in summary["fit"]["normalized_ratios"]]
    ok = drift <= DRIFT_TOLERANCE
    _verdict(9, ok, f"ratio/log2^2(n) = {q}, max pairwise growth "
                    f"{drift:.3f} (tolerance {DRIFT_TOLERANCE})")


def test_criterion_10_arrival_order_fallback():
    n, d, rounds = 2**10, 12, 100
    assert d >= compute_ell(n)
    cfg = ExperimentConfig(mode="tsp", n_list=(n,), d=d, trials=rounds,
                           seed=SEED)
    hits = 0
    for t in range(rounds):
        res = run_trial(cfg, cfg.seed ^ t, trial_index=t)
        assert res.trace.mode == "arrival_order"
        if res.ratio <= 10.0:
            hits += 1
    ok = hits >= 0.95 * rounds
    _verdict(10, ok, f"ratio <= 10 in {hits}/{rounds} trials")


def test_criterion_11_report_determinism():
    cfg = ExperimentConfig(mode="sort1d", n_list=(2**14,), d=1, trials=5,
                           seed=SEED)
    t1, s1 = run_experiment(cfg)
    t2, s2 = run_experiment(cfg)
    csv_same = trials_csv_text(t1) == trials_csv_text(t2)
    json_same = summary_json_text(s1) == summary_json_text(s2)
    _verdict(11, csv_same and json_same,
             f"csv identical {csv_same}, json identical {json_same}")


def test_criterion_12_general_distribution():
    n, rounds = 2**18, 10
    sqrt_dist = DistributionSpec.from_quantile(np.sqrt, name="sqrt_quantile")
    means = {}
    failures = 0
    for dist, tag in ((sqrt_dist, "sqrt"), (DistributionSpec.uniform(), "uniform")):
        cfg = ExperimentConfig(mode="sort1d", n_list=(n,), d=1, trials=rounds,
                               seed=SEED, distribution=dist)
        rs = [run_trial(cfg, cfg.seed ^ t, trial_index=t) for t in range(rounds)]
        means[tag] = float(np.mean([r.ratio for r in rs]))
        if tag == "sqrt":
            failures = sum(r.failed for r in rs)
    rel = means["sqrt"] / means["uniform"]
    ok = failures / rounds <= 0.1 and max(rel, 1.0 / rel) <= 2.0
    _verdict(12, ok, f"failure rate {failures / rounds:.2f}, "
                     f"sqrt/uniform ratio {rel:.3f}")
