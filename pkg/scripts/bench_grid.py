"""Memo and candidate-set accounting over a grid of (mode, s, eps).

Writes the same columns as ``dtproper bench`` for every mode at once and
reports how memo size grows with the depth budget d.

    python3 scripts/bench_grid.py --n 10 --sizes 2,4,8 --eps 0.3,0.2,0.1 --seeds 3 > bench.csv
"""
import argparse
import csv
import sys
from collections import defaultdict
from statistics import mean

from dtproper.cli import BENCH_COLUMNS, bench_row
from dtproper.learner import MODES


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--sizes", default="2,4,8")
    ap.add_argument("--eps", default="0.3,0.2,0.1")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--modes", default=",".join(MODES))
    ap.add_argument("--timing", action="store_true")
    args = ap.parse_args()
    sizes = [int(v) for v in args.sizes.split(",")]
    epss = [float(v) for v in args.eps.split(",")]
    w = csv.DictWriter(sys.stdout, BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    by_d = defaultdict(list)
    for mode in args.modes.split(","):
        for s in sizes:
            for e in epss:
                for seed in range(args.seeds):
                    row = bench_row(mode, args.n, s, e, seed, args.timing)
                    w.writerow(row)
                    by_d[(mode, row["d"])].append(row["memo_entries"])
    for (mode, d), vals in sorted(by_d.items()):
        print(f"# {mode:<10} d={d:<2} mean memo entries {mean(vals):10.1f}", file=sys.stderr)


if __name__ == "__main__":
    main()
