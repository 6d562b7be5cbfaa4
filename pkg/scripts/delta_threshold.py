#!/usr/bin/env python3
"""Bracket the largest initial-data scale for which the remainder fixed
point still contracts, by bisection over delta."""

import argparse

from nstorus import RunConfig
from nstorus.runner import bisect_delta


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--delta-lo", type=float, default=1e-6)
    ap.add_argument("--delta-hi", type=float, default=1.0)
    ap.add_argument("--bisect-steps", type=int, default=20)
    ap.add_argument("--bisect-horizon", type=int, default=50)
    ap.add_argument("--output-dir", default="out_bisect")
    args = ap.parse_args()

    config = RunConfig(k_max=args.k_max, rng_seed=args.seed,
                       output_dir=args.output_dir)
    outcome = bisect_delta(config, args.delta_lo, args.delta_hi,
                           args.bisect_steps, args.bisect_horizon)
    for it, delta, ok in outcome.rows:
        print(f"step {it:>2}  delta={delta:.6e}  "
              f"{'converged' if ok else 'diverged'}")
    print(outcome.message)


if __name__ == "__main__":
    main()
