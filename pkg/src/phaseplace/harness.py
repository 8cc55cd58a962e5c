"""Experiment harness: Monte Carlo trials, bin-timing and fill-order
verifiers, cost decomposition, sweep aggregation, and CSV/JSON reports.

Determinism contract: every random draw comes from the package's own
SplitMix64 stream, trial seeds derive as seed XOR trial_index, and report
writers sort keys and avoid timestamps, so identical (config, seed) pairs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import jsonschema

from .core import (
    AlgorithmConfig,
    DistributionSpec,
    compute_ell,
    opt_sort_cost,
    tour_cost,
)
from .engine import MODE_ARRIVAL, RunTrace, region_arrays
from .engine import run as engine_run
from .errors import InstanceTooSmall
from .oracles import OracleEstimate, tsp_path_heuristic
from .rng import uniform_block

__all__ = [
    "BinSimConfig",
    "BinState",
    "ExperimentConfig",
    "TrialResult",
    "simulate_bins",
    "verify_lemma1",
    "run_trial",
    "verify_fill_before_overflow",
    "run_experiment",
    "emit_report",
    "load_cdf_file",
    "CSV_HEADER",
    "CSV_SCHEMA_LINE",
    "SUMMARY_SCHEMA",
]

DEFAULT_SLACKS = (1.0, 2.0, 4.0)


# ------------------------------------------------------------ bin timing --


@dataclass(frozen=True)
class BinSimConfig:
    """Standalone balls-into-bins instance.

    capacities must be near-equal (max spread 1, as produced by splitting a
    budget across bins); n_context supplies the log term that scales the
    slack windows around M = sum(capacities).
    """

    capacities: tuple
    rounds: int
    seed: int
    n_context: int
    slacks: tuple = DEFAULT_SLACKS

    def __post_init__(self):
        caps = tuple(int(c) for c in self.capacities)
        object.__setattr__(self, "capacities", caps)
        if not caps or min(caps) < 1:
            raise ValueError("capacities must be positive")
        if max(caps) - min(caps) > 1:
            raise ValueError("capacities may differ by at most 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.n_context < 4:
            raise ValueError("n_context must be >= 4")
        if self.m_total > self.n_context:
            raise ValueError("M exceeds the context bound n")

    @property
    def k(self) -> int:
        return len(self.capacities)

    @property
    def m_total(self) -> int:
        return sum(self.capacities)

    @staticmethod
    def uniform_caps(k: int, capacity: int, rounds: int, seed: int,
                     n_context: int) -> "BinSimConfig":
        return BinSimConfig((capacity,) * k, rounds, seed, n_context)


@dataclass
class BinState:
    """Loads after t throws, with the two stopping times when reached."""

    loads: np.ndarray
    t: int
    first_overflow: int | None = None   # throws completed before the first reject
    all_full: int | None = None         # throw index that filled the last bin


def simulate_bins(capacities, seed: int) -> BinState:
    """Throw uniform balls until every bin is full; balls into full bins are
    rejected. first_overflow counts the throws before the first reject."""
    caps = np.asarray(capacities, dtype=np.int64)
    k = len(caps)
    m = int(caps.sum())
    length = m + int(12.0 * math.sqrt(m * max(1.0, math.log(k + 1)))) + 64
    while True:
        u = uniform_block(seed, length)
        bins = (u * k).astype(np.int64)        # u in [0, 1), so already < k
        order = np.argsort(bins, kind="stable")
        sorted_bins = bins[order]
        counts = np.bincount(bins, minlength=k)
        if np.any(counts < caps):
            length *= 2                        # longer prefix, same stream
            continue
        starts = np.zeros(k, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        occ = np.empty(length, dtype=np.int64)
        occ[order] = np.arange(length, dtype=np.int64) - starts[sorted_bins]
        overflow_positions = np.flatnonzero(occ >= caps[bins])
        fill_positions = order[starts + caps - 1]
        t_all_full = int(fill_positions.max()) + 1
        if overflow_positions.size:
            t_first_reject = int(overflow_positions[0]) + 1
        else:
            t_first_reject = t_all_full + 1    # next throw must reject
        loads = np.minimum(counts, caps)
        return BinState(
            loads=loads, t=max(t_all_full, t_first_reject),
            first_overflow=t_first_reject - 1, all_full=t_all_full,
        )


def verify_lemma1(cfg: BinSimConfig) -> dict:
    """Empirical check that the first overflow lands late and total fill
    lands early, within M -/+ a*M/sqrt(log2 n) for slack multipliers a."""
    m = cfg.m_total
    log_term = math.sqrt(math.log2(cfg.n_context))
    t_vals = np.empty(cfg.rounds, dtype=np.float64)
    tp_vals = np.empty(cfg.rounds, dtype=np.float64)
    for r in range(cfg.rounds):
        st = simulate_bins(cfg.capacities, cfg.seed ^ r)
        t_vals[r] = st.first_overflow
        tp_vals[r] = st.all_full
    qs = (0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0)
    labels = ("min", "p05", "p25", "median", "p75", "p95", "max")

    def quantiles(a):
        return {lab: float(np.quantile(a, q)) for lab, q in zip(labels, qs)}

    slack_rows = []
    for a in cfg.slacks:
        window = a * m / log_term
        t_lower = m - window
        tp_upper = m + window
        t_frac = float(np.mean(t_vals >= t_lower))
        tp_frac = float(np.mean(tp_vals <= tp_upper))
        slack_rows.append({
            "a": float(a),
            "t_lower": t_lower,
            "t_prime_upper": tp_upper,
            "t_frac": t_frac,
            "t_prime_frac": tp_frac,
            "both_frac": float(np.mean((t_vals >= t_lower) & (tp_vals <= tp_upper))),
        })
    # pass is judged at the largest slack multiplier (the widest window)
    widest = max(slack_rows, key=lambda row: row["a"])
    return {
        "k": cfg.k,
        "m": m,
        "rounds": cfg.rounds,
        "n_context": cfg.n_context,
        "seed": cfg.seed,
        "t_quantiles": quantiles(t_vals),
        "t_prime_quantiles": quantiles(tp_vals),
        "slacks": slack_rows,
        "passed": bool(widest["t_frac"] >= 0.95
                       and widest["t_prime_frac"] >= 0.95),
    }


# ----------------------------------------------------------------- trials --


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    n_list: tuple
    d: int = 1
    log_exponent: float = 2.0
    backyard_constant: float = 100.0
    trials: int = 10
    seed: int = 0
    distribution: DistributionSpec = field(default_factory=DistributionSpec.uniform)
    out_dir: str | None = None
    formats: tuple = ("csv", "json")

    def __post_init__(self):
        if self.mode not in ("sort1d", "tsp", "verify_bins", "verify_fill", "sweep"):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list:
            raise ValueError("need at least one n")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for f in self.formats:
            if f not in ("csv", "json"):
                raise ValueError(f"unknown format {f!r}")


@dataclass
class TrialResult:
    n: int
    d: int
    trial_index: int
    seed: int
    cost: float
    opt_estimate: OracleEstimate
    ratio: float
    failed: bool
    trace: RunTrace
    breakdown: dict
    between_buckets_by_subarray: tuple

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "trial_index": self.trial_index,
            "seed": self.seed,
            "cost": self.cost,
            "opt": self.opt_estimate.value,
            "opt_kind": self.opt_estimate.kind,
            "ratio": self.ratio,
            "failed": self.failed,
            "breakdown": dict(self.breakdown),
            "between_buckets_by_subarray": list(self.between_buckets_by_subarray),
            "trace": self.trace.to_dict(),
        }


def sample_input(dist: DistributionSpec, n: int, d: int, seed: int) -> np.ndarray:
    """n i.i.d. points in [0,1]^d: row i uses stream slots i*d..(i+1)*d-1,
    each coordinate pushed through the distribution's quantile."""
    u = uniform_block(seed, n * d)
    x = dist.transform(u)
    return x.reshape(n, d) if d > 1 else x


def _decompose(arr, trace: RunTrace):
    """Split the tour cost over region pairs; exact partition of the edges."""
    pts = arr.as_array()
    if pts.ndim == 1:
        edge = np.abs(np.diff(pts))
    else:
        dif = pts[1:] - pts[:-1]
        edge = np.sqrt((dif * dif).sum(axis=1))
    sub_ids, bucket_ids = region_arrays(trace, len(pts))
    sl, sr = sub_ids[:-1], sub_ids[1:]
    bl, br = bucket_ids[:-1], bucket_ids[1:]
    if trace.mode != MODE_ARRIVAL and trace.backyard_size > 0:
        in_backyard = (sl == trace.k) & (sr == trace.k)
    else:
        in_backyard = np.zeros(len(edge), dtype=bool)
    same_bucket = (bl == br) & ~in_backyard
    same_sub = (sl == sr) & (bl != br)
    cross_sub = sl != sr
    k_subs = int(sub_ids.max()) + 1
    per_sub = np.bincount(sl[same_sub], weights=edge[same_sub], minlength=k_subs)
    breakdown = {
        "within_buckets": float(edge[same_bucket].sum()),
        "between_buckets": float(edge[same_sub].sum()),
        "between_subarrays": float(edge[cross_sub].sum()),
        "backyard": float(edge[in_backyard].sum()),
    }
    return breakdown, tuple(float(v) for v in per_sub)


def run_trial(cfg: ExperimentConfig, trial_seed: int, n: int | None = None,
              trial_index: int = 0) -> TrialResult:
    """One seeded end-to-end run: sample, place, cost, baseline, decompose."""
    if n is None:
        n = cfg.n_list[0]
    acfg = AlgorithmConfig(
        n=n, d=cfg.d, log_exponent=cfg.log_exponent,
        backyard_constant=cfg.backyard_constant, seed=trial_seed,
        distribution=cfg.distribution,
    )
    xs = sample_input(cfg.distribution, n, cfg.d, trial_seed)
    result = engine_run(acfg, xs)
    cost = tour_cost(result.array)
    if cfg.d == 1:
        opt = OracleEstimate(opt_sort_cost(xs), "exact", n, 1)
    else:
        opt = tsp_path_heuristic(xs)
    if opt.value > 0.0:
        ratio = cost / opt.value
    else:
        ratio = 0.0 if cost == 0.0 else math.inf
    breakdown, per_sub = _decompose(result.array, result.trace)
    return TrialResult(
        n=n, d=cfg.d, trial_index=trial_index, seed=trial_seed,
        cost=cost, opt_estimate=opt, ratio=ratio,
        failed=result.trace.failure, trace=result.trace,
        breakdown=breakdown, between_buckets_by_subarray=per_sub,
    )


# ------------------------------------------------- fill-order verification --


def verify_fill_before_overflow(cfg: ExperimentConfig) -> dict:
    """Fraction of runs in which each A_j fills before A_{j+1} overflows."""
    n = cfg.n_list[0]
    boundary_hits: dict = {}
    boundary_runs: dict = {}
    all_ok = 0
    failures = 0
    vacuous_runs = 0
    for tr in range(cfg.trials):
        res = run_trial(cfg, cfg.seed ^ tr, n=n, trial_index=tr)
        trace = res.trace
        if trace.failure:
            failures += 1
        phases = trace.phases
        if len(phases) <= 1:
            vacuous_runs += 1
            all_ok += 1
            continue
        run_ok = True
        for j in range(len(phases) - 1):
            full_j = phases[j].full_arrival
            ov_next = phases[j + 1].overflow_arrival
            ok = (full_j is not None
                  and (ov_next is None or full_j < ov_next))
            boundary_runs[j + 1] = boundary_runs.get(j + 1, 0) + 1
            if ok:
                boundary_hits[j + 1] = boundary_hits.get(j + 1, 0) + 1
            else:
                run_ok = False
        if run_ok:
            all_ok += 1
    per_boundary = [
        {
            "j": j,
            "runs": boundary_runs[j],
            "frac": boundary_hits.get(j, 0) / boundary_runs[j],
        }
        for j in sorted(boundary_runs)
    ]
    overall = all_ok / cfg.trials
    failure_rate = failures / cfg.trials
    return {
        "n": n,
        "d": cfg.d,
        "rounds": cfg.trials,
        "seed": cfg.seed,
        "boundaries": per_boundary,
        "overall_success": overall,
        "failure_rate": failure_rate,
        "vacuous": vacuous_runs == cfg.trials,
        "passed": bool(overall >= 0.95 and failure_rate <= 0.05),
    }


# ------------------------------------------------------------- experiment --


def run_experiment(cfg: ExperimentConfig):
    """All trials for every n in the sweep; returns (trials, summary).

    Trials execute sequentially here but share nothing; the aggregate is a
    pure fold over results ordered by (n, trial_index), so any concurrent
    scheduler producing the same results yields the same summary.
    """
    trials: list[TrialResult] = []
    per_n = []
    skipped = []
    for n in cfg.n_list:
        try:
            compute_ell(n, cfg.log_exponent)
        except InstanceTooSmall as exc:
            skipped.append({"n": int(n), "reason": str(exc)})
            continue
        rows = []
        for tr in range(cfg.trials):
            res = run_trial(cfg, cfg.seed ^ tr, n=n, trial_index=tr)
            rows.append(res)
        trials.extend(rows)
        ratios = np.array([r.ratio for r in rows])
        log_sq = math.log2(n) ** 2
        mean_ratio = float(ratios.mean())
        comp_means = {
            key: float(np.mean([r.breakdown[key] for r in rows]))
            for key in ("within_buckets", "between_buckets",
                        "between_subarrays", "backyard")
        }
        per_n.append({
            "n": int(n),
            "trials": cfg.trials,
            "mean_cost": float(np.mean([r.cost for r in rows])),
            "mean_opt": float(np.mean([r.opt_estimate.value for r in rows])),
            "mean_ratio": mean_ratio,
            "median_ratio": float(np.median(ratios)),
            "p95_ratio": float(np.quantile(ratios, 0.95)),
            "failure_rate": float(np.mean([r.failed for r in rows])),
            "mean_breakdown": comp_means,
            "log2_sq": log_sq,
            "normalized_ratio": mean_ratio / log_sq,
        })
    q_values = [row["normalized_ratio"] for row in per_n]
    max_drift = 0.0
    for i in range(len(q_values)):
        for j in range(i + 1, len(q_values)):
            if q_values[i] > 0:
                max_drift = max(max_drift, q_values[j] / q_values[i])
    ls = np.array([row["log2_sq"] for row in per_n])
    mr = np.array([row["mean_ratio"] for row in per_n])
    slope = float((ls * mr).sum() / (ls * ls).sum()) if len(ls) else 0.0
    summary = {
        "schema": "phaseplace-summary v1",
        "config": {
            "mode": cfg.mode,
            "n_list": [int(n) for n in cfg.n_list],
            "d": cfg.d,
            "log_exponent": cfg.log_exponent,
            "backyard_constant": cfg.backyard_constant,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "distribution": cfg.distribution.name,
        },
        "per_n": per_n,
        "skipped": skipped,
        "fit": {
            "slope_vs_log2_sq": slope,
            "normalized_ratios": q_values,
            "max_drift": max_drift,
        },
    }
    return trials, summary


# -------------------------------------------------------------- reporting --

CSV_SCHEMA_LINE = "# phaseplace-csv v1"
CSV_HEADER = [
    "n", "d", "p", "seed", "cost", "opt", "ratio", "failed",
    "within_buckets", "between_buckets", "between_subarrays", "backyard",
    "k", "phase_stats",
]

SUMMARY_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "config", "per_n", "skipped", "fit"],
    "properties": {
        "schema": {"const": "phaseplace-summary v1"},
        "config": {
            "type": "object",
            "required": ["mode", "n_list", "d", "trials", "seed", "distribution"],
            "properties": {
                "mode": {"type": "string"},
                "n_list": {"type": "array", "items": {"type": "integer"}},
                "d": {"type": "integer", "minimum": 1},
                "log_exponent": {"type": "number"},
                "backyard_constant": {"type": "number"},
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "distribution": {"type": "string"},
            },
        },
        "per_n": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "n", "trials", "mean_cost", "mean_opt", "mean_ratio",
                    "median_ratio", "p95_ratio", "failure_rate",
                    "mean_breakdown", "log2_sq", "normalized_ratio",
                ],
                "properties": {
                    "n": {"type": "integer"},
                    "trials": {"type": "integer"},
                    "mean_cost": {"type": "number"},
                    "mean_opt": {"type": "number"},
                    "mean_ratio": {"type": "number"},
                    "median_ratio": {"type": "number"},
                    "p95_ratio": {"type": "number"},
                    "failure_rate": {"type": "number"},
                    "mean_breakdown": {
                        "type": "object",
                        "required": ["within_buckets", "between_buckets",
                                     "between_subarrays", "backyard"],
                    },
                    "log2_sq": {"type": "number"},
                    "normalized_ratio": {"type": "number"},
                },
            },
        },
        "skipped": {"type": "array"},
        "fit": {
            "type": "object",
            "required": ["slope_vs_log2_sq", "normalized_ratios", "max_drift"],
        },
    },
}


def _phase_stats_json(trace: RunTrace) -> str:
    rows = [
        {
            "i": rec.index,
            "T": rec.insertions_until_overflow,
            "Tp": rec.insertions_until_full,
            "N": rec.fills_at_overflow,
        }
        for rec in trace.phases
    ]
    return json.dumps(rows, separators=(",", ":"), sort_keys=True)


def trials_csv_text(results: list) -> str:
    """Render trial rows as versioned CSV text (deterministic bytes)."""
    buf = io.StringIO()
    buf.write(CSV_SCHEMA_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow([
            r.n, r.d, repr(float(r.trace.log_exponent)), r.seed,
            repr(float(r.cost)), repr(float(r.opt_estimate.value)),
            repr(float(r.ratio)), "true" if r.failed else "false",
            repr(float(r.breakdown["within_buckets"])),
            repr(float(r.breakdown["between_buckets"])),
            repr(float(r.breakdown["between_subarrays"])),
            repr(float(r.breakdown["backyard"])),
            r.trace.k, _phase_stats_json(r.trace),
        ])
    return buf.getvalue()


def summary_json_text(summary: dict) -> str:
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def emit_report(results: list, summary: dict, out_dir: str,
                formats=("csv", "json"), prefix: str = "phaseplace") -> list:
    """Write the trial CSV and the validated summary JSON; returns paths."""
    if not results:
        raise ValueError("no results to report")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if "csv" in formats:
        p = os.path.join(out_dir, f"{prefix}_trials.csv")
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(trials_csv_text(results))
        paths.append(p)
    if "json" in formats:
        p = os.path.join(out_dir, f"{prefix}_summary.json")
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(summary_json_text(summary))
        paths.append(p)
    return paths


def load_cdf_file(path: str) -> DistributionSpec:
    """Two-column (u, Q(u)) text file, linearly interpolated, as a
    distribution. u must be strictly increasing from 0 to 1."""
    table = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if table.shape[1] != 2:
        raise ValueError(f"expected two columns in {path}, got {table.shape[1]}")
    name = f"cdf:{os.path.basename(path)}"
    return DistributionSpec.from_samples(table[:, 0], table[:, 1], name=name)
