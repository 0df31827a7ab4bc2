#!/usr/bin/env python3
"""Average and maximum minimum time for random single-pair rotations on
randomly weighted connected graphs, versus the linear-in-d bound."""

import argparse
from dataclasses import replace

from gatetime.experiments import FIG2_CONFIG, exp_fig2, write_result_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-min", type=int, default=2)
    ap.add_argument("--d-max", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10, help="trials per topology")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/fig2")
    args = ap.parse_args()

    config = replace(FIG2_CONFIG, seed=args.seed)
    result = exp_fig2(
        range(args.d_min, args.d_max + 1),
        trials_per_graph=args.trials,
        config=config,
        jobs=args.jobs,
    )
    print("  ".join(result.row_columns))
    for row in result.rows:
        print("  ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    if result.violations:
        print(f"WARNING: {len(result.violations)} sandwich violations")
    paths = write_result_csv(result, args.out)
    print(f"wrote {paths}")


if __name__ == "__main__":
    main()
