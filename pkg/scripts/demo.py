"""Small end-to-end walk through the package on one planted target."""
from fractions import Fraction

import numpy as np

from dtproper import funcspace as fs
from dtproper import oracle as bf
from dtproper import tree as dt
from dtproper.learner import learn_agnostic, learn_monotone, learn_realizable
from dtproper.prune import osss_check, prune_certificate


def main():
    n, s = 10, 8
    rng = np.random.default_rng(1)
    target = dt.random_tree(n, s, None, rng)
    table = fs.TruthTable.from_tree(target, n)
    print("target     ", dt.serialize(target))
    print("influences ", [str(v) for v in fs.influences_exact(table)])

    pruned, cert = prune_certificate(table, target, Fraction(1, 8))
    print("pruned     ", dt.serialize(pruned), cert.to_record())
    print("osss       ", osss_check(table, target).to_record())

    tree, rep = learn_realizable(fs.FunctionOracle.from_tree(target, n), s, 0.1, seed=0, reference=table)
    print("realizable ", dt.serialize(tree), f"dist={rep.dist_out} queries={rep.queries}")

    noisy = bf.planted_noise_target(target, n, 0.05, seed=0)
    tree, rep = learn_agnostic(noisy.oracle(), s, 0.1, reference=noisy.noisy)
    print("agnostic   ", dt.serialize(tree), f"dist={float(rep.dist_out):.4f} opt<={float(noisy.opt_upper):.4f}")

    mono = fs.TruthTable.from_tree(dt.random_monotone_tree(n, s, None, rng), n)
    tree, rep = learn_monotone(fs.FunctionOracle.from_table(mono, fs.Access.RANDOM_EXAMPLE), s, 0.2,
                               reference=mono)
    print("monotone   ", dt.serialize(tree), f"dist={rep.dist_out} examples={rep.examples} queries={rep.queries}")


if __name__ == "__main__":
    main()
