"""Probabilistic guarantees behind the phase machine, checked empirically.

Part 1: standalone balls-into-bins timing (first overflow lands after
M - a*M/sqrt(log2 n), complete fill before M + a*M/sqrt(log2 n)).
Part 2: full engine runs at n = 2^20, checking that each subarray fills
before its successor overflows and that the backyard never overflows.
"""

import argparse
import sys

from phaseplace.harness import (
    BinSimConfig,
    ExperimentConfig,
    verify_fill_before_overflow,
    verify_lemma1,
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true",
                    help="fewer rounds and a smaller n for part 2")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rounds = 100 if args.quick else 500
    cfg_bins = BinSimConfig.uniform_caps(256, 100, rounds=rounds,
                                         seed=args.seed, n_context=1 << 20)
    rep = verify_lemma1(cfg_bins)
    print(f"bins: K={rep['k']} M={rep['m']} rounds={rep['rounds']}")
    for row in rep["slacks"]:
        print(f"  a={row['a']:.0f}: P[T >= {row['t_lower']:.0f}] = "
              f"{row['t_frac']:.3f}, P[T' <= {row['t_prime_upper']:.0f}] = "
              f"{row['t_prime_frac']:.3f}")
    print(f"  passed: {rep['passed']}")
    ok = rep["passed"]

    n = 2**18 if args.quick else 2**20
    trials = 10 if args.quick else 50
    rep = verify_fill_before_overflow(
        ExperimentConfig(mode="verify_fill", n_list=(n,), d=1,
                         trials=trials, seed=args.seed)
    )
    print(f"fill-before-overflow at n={n}, {trials} runs:")
    for row in rep["boundaries"]:
        print(f"  A_{row['j']} full before A_{row['j'] + 1} overflow: "
              f"{row['frac']:.3f}")
    print(f"  overall {rep['overall_success']:.3f}, "
          f"failure rate {rep['failure_rate']:.3f}, passed: {rep['passed']}")
    ok = ok and rep["passed"]
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
