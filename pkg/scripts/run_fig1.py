#!/usr/bin/env python3
"""Minimum time for the end-to-end swap on the uniform chain versus the
closed-form lower and upper bounds, one row per dimension."""

import argparse
from dataclasses import replace

from gatetime.experiments import FIG1_CONFIG, exp_fig1, write_result_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-min", type=int, default=2)
    ap.add_argument("--d-max", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/fig1")
    args = ap.parse_args()

    config = replace(FIG1_CONFIG, seed=args.seed)
    result = exp_fig1(range(args.d_min, args.d_max + 1), config=config, jobs=args.jobs)
    print("  ".join(result.row_columns))
    for row in result.rows:
        print("  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    if result.violations:
        print(f"WARNING: {len(result.violations)} sandwich violations")
    paths = write_result_csv(result, args.out)
    print(f"wrote {paths}")


if __name__ == "__main__":
    main()
