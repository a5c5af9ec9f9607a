"""Final objective of batch learning against mini-batch online learning."""
import argparse
import sys

import numpy as np

from lrt import LearnConfig, learn_global, learn_online, two_lines


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, nargs="+", default=list(range(10)) + [42])
    p.add_argument("--minibatches", type=int, default=5)
    args = p.parse_args(argv)

    print("seed,batch,sequential,summed,sequential_gap")
    for seed in args.seeds:
        data, _ = two_lines(np.pi / 4, 200, 0.01, seed)
        batch = learn_global(data, LearnConfig(seed=seed)).objective_trace[-1]
        seq = learn_online(data, LearnConfig(minibatches=args.minibatches, seed=seed)).objective_trace[-1]
        summed = learn_online(data, LearnConfig(minibatches=args.minibatches, online_mode="summed",
                                                seed=seed)).objective_trace[-1]
        print(seed, f"{batch:.5f}", f"{seq:.5f}", f"{summed:.5f}", f"{abs(seq - batch) / batch:.4f}", sep=",")
    return 0


if __name__ == "__main__":
    sys.exit(main())
