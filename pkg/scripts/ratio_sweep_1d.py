"""Headline 1-D experiment: competitive ratio against log2^2(n) over a sweep.

Default parameters match the acceptance run (n = 2^16..2^22, 20 trials per
size, uniform input); --quick shrinks it to a coffee-break version. The
normalized column ratio/log2^2(n) should stay flat if the O(log^2 n) bound
is doing its job.
"""

import argparse
import sys

from phaseplace.harness import ExperimentConfig, emit_report, run_experiment


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true",
                    help="n = 2^12..2^16, 5 trials (seconds instead of minutes)")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="directory for CSV/JSON reports")
    args = ap.parse_args(argv)

    if args.quick:
        n_list = tuple(2**e for e in range(12, 17, 2))
        trials = args.trials or 5
    else:
        n_list = tuple(2**e for e in range(16, 23, 2))
        trials = args.trials or 20

    cfg = ExperimentConfig(mode="sweep", n_list=n_list, d=1, trials=trials,
                           seed=args.seed)
    results, summary = run_experiment(cfg)
    print(f"{'n':>9}  {'mean ratio':>11}  {'ratio/log2^2':>13}  {'failures':>8}")
    for row in summary["per_n"]:
        print(f"{row['n']:>9}  {row['mean_ratio']:>11.3f}  "
              f"{row['normalized_ratio']:>13.5f}  {row['failure_rate']:>8.2f}")
    print(f"max pairwise growth of the normalized column: "
          f"{summary['fit']['max_drift']:.3f}")
    if args.out:
        for p in emit_report(results, summary, args.out, prefix="sweep1d"):
            print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
