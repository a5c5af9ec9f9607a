"""Raw nearest neighbour against learned-transform classifiers on subspace fixtures."""
import argparse
import sys

import numpy as np

from lrt import (
    LearnConfig,
    SyntheticSpec,
    evaluate_accuracy,
    generate_synthetic,
    learn_global,
    split_dataset,
    train_classifier,
)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=30)
    p.add_argument("--subspace-dim", type=int, default=9)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--per-class", type=int, default=64)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--random-subspaces", action="store_true", help="draw independent random subspaces")
    p.add_argument("--seeds", type=int, default=10)
    args = p.parse_args(argv)

    print("seed,raw_nn,raw_omp,lrt_nn,lrt_omp")
    totals = []
    for seed in range(args.seeds):
        spec = SyntheticSpec(args.dim, [args.subspace_dim] * args.classes, args.per_class, args.sigma,
                             orthogonal=not args.random_subspaces)
        data, _ = generate_synthetic(spec, seed)
        train, test = split_dataset(data, 0.5, seed)
        T = learn_global(train, LearnConfig(seed=seed))
        accs = [evaluate_accuracy(train_classifier(train, None, "nn"), test),
                evaluate_accuracy(train_classifier(train, None, "omp"), test),
                evaluate_accuracy(train_classifier(train, T, "nn"), test),
                evaluate_accuracy(train_classifier(train, T, "omp"), test)]
        totals.append(accs)
        print(seed, *(f"{a:.4f}" for a in accs), sep=",")
    print("mean", *(f"{a:.4f}" for a in np.mean(totals, axis=0)), sep=",")
    return 0


if __name__ == "__main__":
    sys.exit(main())
