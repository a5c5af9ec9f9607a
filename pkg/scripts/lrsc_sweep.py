"""Initial R-SSC error against final LRSC error over seeds, for several protocols.

Each protocol varies the neighbour count, the RPCA weight, the number of
subgradient steps per relearn and whether T restarts from the identity.
"""
import argparse
import csv
import itertools
import sys

import numpy as np

from lrt import (
    ClustererSpec,
    LearnConfig,
    SyntheticSpec,
    generate_synthetic,
    lrsc,
    two_lines,
)

FIXTURES = {
    "two_lines": lambda s: two_lines(np.pi / 4, 200, 0.01, s)[0],
    "two_rays": lambda s: two_lines(np.pi / 4, 200, 0.01, s, coefficient_range=(0.0, 1.0))[0],
    "five_planes": lambda s: generate_synthetic(
        SyntheticSpec(10, [2] * 5, 80, 0.01, max_pairwise_angle=np.pi / 6), s)[0],
}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--fixtures", nargs="+", default=list(FIXTURES), choices=list(FIXTURES))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--max-outer", type=int, default=6)
    p.add_argument("--out", default="lrsc_sweep.csv")
    args = p.parse_args(argv)

    protocols = list(itertools.product([6, 10], [None, 1.0], [10, 100], [True, False]))
    rows = []
    for name in args.fixtures:
        for K, beta, iters, warm in protocols:
            pairs = []
            for seed in range(args.seeds):
                data = FIXTURES[name](seed)
                result, _ = lrsc(data.Y, data.num_classes, ClustererSpec(K=K, beta=beta),
                                 LearnConfig(iterations=iters), max_outer=args.max_outer,
                                 ground_truth=data.labels, seed=seed, warm_restart=warm)
                trace = result.misclassification_trace
                pairs.append((trace[0], trace[-1]))
                rows.append([name, K, beta, iters, warm, seed, trace[0], trace[-1], len(trace)])
            not_worse = sum(b <= a for a, b in pairs)
            lower = sum(b < a for a, b in pairs)
            print(f"{name:12s} K={K:2d} beta={beta} iters={iters:3d} warm={warm!s:5s} "
                  f"not worse {not_worse}/{len(pairs)} lower {lower}/{len(pairs)}", flush=True)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fixture", "K", "beta", "iterations", "warm_restart", "seed", "initial_error",
                    "final_error", "outer_iterations"])
        w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
