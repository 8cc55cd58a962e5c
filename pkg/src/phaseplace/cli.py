"""Command-line front end.

Subcommands:
  sort1d       Monte Carlo trials of the 1-D placement algorithm.
  tsp          Same for d >= 2 (tour cost against the heuristic baseline).
  verify-bins  Balls-into-bins overflow/fill timing check.
  verify-fill  Fill-before-overflow statistics from full engine runs.
  sweep        Multi-n competitive-ratio sweep with a log^2 n fit.

Verification subcommands exit 0 when their pass criterion holds, 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .core import DistributionSpec
from .harness import (
    BinSimConfig,
    ExperimentConfig,
    emit_report,
    load_cdf_file,
    run_experiment,
    verify_fill_before_overflow,
    verify_lemma1,
)


def _dist_arg(value: str) -> DistributionSpec:
    if value == "uniform":
        return DistributionSpec.uniform()
    if value.startswith("cdf:"):
        return load_cdf_file(value[len("cdf:"):])
    raise argparse.ArgumentTypeError(
        f"distribution must be 'uniform' or 'cdf:<file>', got {value!r}"
    )


def _formats_arg(value: str) -> tuple:
    parts = tuple(p for p in value.split(",") if p)
    for p in parts:
        if p not in ("csv", "json"):
            raise argparse.ArgumentTypeError(f"unknown format {p!r}")
    return parts


def _add_common(sp: argparse.ArgumentParser, *, multi_n: bool) -> None:
    sp.add_argument("--n", type=int, nargs="+", required=True,
                    help="instance size(s)" if multi_n else "instance size")
    sp.add_argument("--p", type=float, default=2.0, dest="log_exponent",
                    help="bucket-capacity exponent: capacities scale as log2(n)^p")
    sp.add_argument("--backyard-constant", type=float, default=100.0,
                    help="multiplier on log2(n)^p for the overflow region size")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dist", type=_dist_arg, default=DistributionSpec.uniform(),
                    help="uniform or cdf:<file> with (u, Q(u)) rows")
    sp.add_argument("--out", default=None, help="directory for report files")
    sp.add_argument("--format", type=_formats_arg, default=("csv", "json"),
                    help="comma-separated subset of csv,json")


def _experiment_config(args, mode: str, d: int) -> ExperimentConfig:
    return ExperimentConfig(
        mode=mode, n_list=tuple(args.n), d=d,
        log_exponent=args.log_exponent,
        backyard_constant=args.backyard_constant,
        trials=args.trials, seed=args.seed, distribution=args.dist,
        out_dir=args.out, formats=args.format,
    )


def _print_summary(summary: dict) -> None:
    for row in summary["per_n"]:
        print(
            f"n={row['n']:>9}  mean_ratio={row['mean_ratio']:.4f}  "
            f"ratio/log2^2(n)={row['normalized_ratio']:.6f}  "
            f"failure_rate={row['failure_rate']:.3f}"
        )
    for row in summary["skipped"]:
        print(f"n={row['n']:>9}  skipped: {row['reason']}")
    fit = summary["fit"]
    print(
        f"fit: slope={fit['slope_vs_log2_sq']:.6f}  "
        f"max_drift={fit['max_drift']:.4f}"
    )


def _run_experiment_cmd(args, mode: str, d: int) -> int:
    cfg = _experiment_config(args, mode, d)
    trials, summary = run_experiment(cfg)
    _print_summary(summary)
    if args.out:
        paths = emit_report(trials, summary, args.out,
                            formats=args.format, prefix=mode)
        for p in paths:
            print(f"wrote {p}")
    return 0


def _write_json(report: dict, out_dir: str, name: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="phaseplace",
        description="Online placement into an array with phase-spawning buckets.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sort1d", help="1-D placement trials (OPT = value span)")
    _add_common(sp, multi_n=False)

    sp = sub.add_parser("tsp", help="d-D placement trials (OPT = 2-opt heuristic)")
    _add_common(sp, multi_n=False)
    sp.add_argument("--d", type=int, default=2)

    sp = sub.add_parser("verify-bins", help="balls-into-bins timing bounds")
    sp.add_argument("--bins", type=int, default=256)
    sp.add_argument("--capacity", type=int, default=100)
    sp.add_argument("--n-context", type=int, default=1 << 20,
                    help="n whose log2 scales the slack windows")
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("verify-fill", help="subarray fill-before-overflow check")
    _add_common(sp, multi_n=False)

    sp = sub.add_parser("sweep", help="ratio sweep over several n")
    _add_common(sp, multi_n=True)
    sp.add_argument("--d", type=int, default=1)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command

    if cmd == "sort1d":
        return _run_experiment_cmd(args, "sort1d", d=1)

    if cmd == "tsp":
        return _run_experiment_cmd(args, "tsp", d=args.d)

    if cmd == "sweep":
        return _run_experiment_cmd(args, "sweep", d=args.d)

    if cmd == "verify-bins":
        cfg = BinSimConfig.uniform_caps(
            args.bins, args.capacity, args.trials, args.seed, args.n_context
        )
        report = verify_lemma1(cfg)
        for row in report["slacks"]:
            print(
                f"a={row['a']:.0f}  T>= {row['t_lower']:.1f}: {row['t_frac']:.3f}   "
                f"T'<= {row['t_prime_upper']:.1f}: {row['t_prime_frac']:.3f}"
            )
        print(f"passed: {report['passed']}")
        if args.out:
            _write_json(report, args.out, "verify_bins.json")
        return 0 if report["passed"] else 1

    if cmd == "verify-fill":
        cfg = _experiment_config(args, "verify_fill", d=1)
        report = verify_fill_before_overflow(cfg)
        for row in report["boundaries"]:
            print(f"boundary {row['j']}->{row['j'] + 1}: {row['frac']:.3f} "
                  f"over {row['runs']} runs")
        print(f"overall_success={report['overall_success']:.3f}  "
              f"failure_rate={report['failure_rate']:.3f}  "
              f"vacuous={report['vacuous']}")
        print(f"passed: {report['passed']}")
        if args.out:
            _write_json(report, args.out, "verify_fill.json")
        return 0 if report["passed"] else 1

    raise AssertionError(f"unhandled command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
