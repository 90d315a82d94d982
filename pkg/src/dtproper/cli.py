"""Command-line experiment harness: ``dtproper {gen,learn,verify,bench}``.

Exit codes: 0 success, 1 usage or input error, 2 guarantee violation,
3 budget or feasibility error (including exact mode being unavailable).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import funcspace as fs
from . import learner as L
from . import oracle as O
from . import prune as P
from . import tree as dt

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_BUDGET = 0, 1, 2, 3

BENCH_COLUMNS = ("mode", "n", "s", "eps", "seed", "d", "tau", "delta", "memo_entries",
                 "recursive_calls", "max_candidate_set", "candidate_bound", "bound_ok", "wall_ms")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


# --------------------------------------------------------------------------
# target files

def load_tree(path: str, n: int | None = None) -> dt.Tree:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_USAGE) from None
    try:
        return dt.parse(text, n)
    except dt.TreeParseError as e:
        raise CliError(f"{path}: {e}", EXIT_USAGE) from None


def load_target(path: str, n: int | None = None) -> tuple[int, fs.TruthTable | None, dt.Tree | None]:
    """A ``.tt`` truth table or a ``.tree`` s-expression (dimension from ``n`` or the tree)."""
    if path.endswith(".tt"):
        try:
            table = fs.TruthTable.from_text(Path(path).read_text())
        except OSError as e:
            raise CliError(f"cannot read {path}: {e.strerror}", EXIT_USAGE) from None
        except ValueError as e:
            raise CliError(f"{path}: {e}", EXIT_USAGE) from None
        if n is not None and n != table.n:
            raise CliError(f"--n {n} disagrees with the table's n={table.n}", EXIT_USAGE)
        return table.n, table, None
    tree = load_tree(path, n)
    dim = n if n is not None else max(dt.variables(tree), default=1)
    table = fs.TruthTable.from_tree(tree, dim) if dim <= fs.exact_limit() else None
    return dim, table, tree


def _need_table(table, n):
    if table is None or n > fs.exact_limit():
        raise CliError(f"exact mode unavailable for n={n} (limit {fs.exact_limit()}; "
                       "raise DTPROPER_EXACT_N to override)", EXIT_BUDGET)
    return table


def _oracle(n, table, tree) -> fs.FunctionOracle:
    if table is not None:
        return fs.FunctionOracle.from_table(table, fs.Access.MEMBERSHIP)
    return fs.FunctionOracle.from_tree(tree, n, fs.Access.MEMBERSHIP)


# --------------------------------------------------------------------------
# gen

def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    try:
        if args.monotone:
            tree = dt.random_monotone_tree(args.n, args.size, args.depth_cap, rng)
        else:
            tree = dt.random_tree(args.n, args.size, args.depth_cap, rng)
    except dt.InfeasibleTreeError as e:
        raise CliError(str(e), EXIT_BUDGET) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = {"tree": str(out.with_suffix(".tree"))}
    Path(written["tree"]).write_text(dt.serialize(tree) + "\n")
    summary = {"n": args.n, "size": dt.size(tree), "depth": dt.depth(tree), "seed": args.seed}
    if args.n <= fs.exact_limit():
        if args.noise is not None:
            planted = O.planted_noise_target(tree, args.n, args.noise, args.seed)
            table = planted.noisy
            sidecar = {"eta": args.noise, "seed": args.seed, "flipped": planted.flipped,
                       "opt_upper": str(planted.opt_upper), "opt_upper_float": float(planted.opt_upper)}
            written["opt"] = str(out.with_suffix(".opt.json"))
            Path(written["opt"]).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        else:
            table = fs.TruthTable.from_tree(tree, args.n)
        written["table"] = str(out.with_suffix(".tt"))
        Path(written["table"]).write_text(table.to_text())
        if args.monotone:
            summary["monotone"] = fs.is_monotone(fs.TruthTable.from_tree(tree, args.n))
    elif args.noise is not None:
        raise CliError(f"--noise needs a truth table, n={args.n} exceeds the exact limit", EXIT_BUDGET)
    summary["files"] = written
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# learn

def _write_report(rec: dict, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(rec) + "\n")
        return
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(L.LearnReport.FIELDS)
    w.writerow(["" if rec[k] is None else rec[k] for k in L.LearnReport.FIELDS])


def cmd_learn(args) -> int:
    if args.mode == "monotone" and args.exact:
        raise CliError("mode/oracle mismatch: monotone mode uses random examples only, "
                       "so --exact (which needs queries) is refused", EXIT_USAGE)
    n, table, tree = load_target(args.target, args.n)
    if args.exact or args.exact_verify:
        _need_table(table, n)
    oracle = _oracle(n, table, tree)
    ref = table if args.exact_verify else None
    common = dict(seed=args.seed, reference=ref, rescale_eps=args.rescale_eps)
    try:
        if args.mode == "realizable":
            hyp, rep = L.learn_realizable(oracle, args.size, args.eps, exact=args.exact,
                                          engine=args.engine, **common)
        elif args.mode == "agnostic":
            hyp, rep = L.learn_agnostic(oracle, args.size, args.eps, exact=args.exact or None,
                                        engine=args.engine, **common)
        else:
            if table is not None and not fs.is_monotone(table):
                print("warning: target is not monotone; the guarantee does not apply",
                      file=sys.stderr)
            hyp, rep = L.learn_monotone(oracle, args.size, args.eps, **common)
    except fs.BudgetError as e:
        raise CliError(str(e), EXIT_BUDGET) from None
    except fs.AccessError as e:
        raise CliError(f"mode/oracle mismatch: {e}", EXIT_USAGE) from None
    rec = rep.to_record(timing=args.timing)
    if args.tree_out:
        Path(args.tree_out).write_text(dt.serialize(hyp) + "\n")
    _write_report(rec, args.format, sys.stdout)
    if args.check:
        if rep.dist_out is None:
            raise CliError("--check needs --exact-verify", EXIT_USAGE)
        opt = Fraction(0)
        if args.opt:
            opt = Fraction(json.loads(Path(args.opt).read_text())["opt_upper"])
        params = L.LearnerParams(args.size, args.eps, args.mode, rescale_eps=args.rescale_eps)
        if rep.dist_out > opt + Fraction(params.guarantee):
            print(f"guarantee violated: dist {rep.dist_out} > {opt} + {params.guarantee}", file=sys.stderr)
            return EXIT_VIOLATION
    return EXIT_OK


# --------------------------------------------------------------------------
# verify

def _random_instance(rng: np.random.Generator, n_max: int):
    n = int(rng.integers(2, n_max + 1))
    if rng.random() < 0.5:
        f = fs.TruthTable.from_tree(dt.random_tree(n, int(rng.integers(1, min(32, 1 << n) + 1)), None, rng), n)
    else:
        f = fs.random_truth_table(n, rng)
    t = dt.random_tree(n, int(rng.integers(1, min(64, 1 << n) + 1)), None, rng)
    return f, t


def cmd_verify(args) -> int:
    if args.random:
        rng = np.random.default_rng(args.seed)
        failures = 0
        n_max = min(args.n_max, fs.exact_limit())
        for k in range(args.random):
            f, t = _random_instance(rng, n_max)
            if args.check == "prune":
                tau = Fraction(1, 1 << int(rng.integers(1, 8)))
                ok = P.prune_certificate(f, t, tau)[1].holds
            else:
                ok = P.osss_check(f, t).holds
            failures += not ok
        print(json.dumps({"check": args.check, "instances": args.random, "seed": args.seed,
                          "failures": failures}, sort_keys=True))
        return EXIT_VIOLATION if failures else EXIT_OK
    if not args.target or not args.tree:
        raise CliError("verify needs --target and --tree (or --random K)", EXIT_USAGE)
    n, table, _ = load_target(args.target, args.n)
    table = _need_table(table, n)
    t = load_tree(args.tree, n)
    if args.check == "prune":
        if args.tau is None or args.tau <= 0:
            raise CliError("verify prune needs --tau > 0", EXIT_USAGE)
        pruned, cert = P.prune_certificate(table, t, args.tau)
        rec = cert.to_record()
        rec["pruned"] = dt.serialize(pruned)
        ok = cert.holds
    else:
        rep = P.osss_check(table, t)
        rec = rep.to_record()
        ok = rep.holds
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK if ok else EXIT_VIOLATION


# --------------------------------------------------------------------------
# bench

def bench_row(mode: str, n: int, s: int, eps: float, seed: int, timing: bool) -> dict:
    """One exact-mode accounting run on a freshly generated target."""
    rng = np.random.default_rng([seed, s, n])
    params = L.LearnerParams(s, eps, mode, seed, exact=True)
    if mode == "monotone":
        table = fs.TruthTable.from_tree(dt.random_monotone_tree(n, s, None, rng), n)
    else:
        tree = dt.random_tree(n, min(s, 1 << n), None, rng)
        table = fs.TruthTable.from_tree(tree, n)
    oracle = fs.FunctionOracle.from_table(table, fs.Access.MEMBERSHIP)
    if mode == "agnostic":
        table = O.planted_noise_target(tree, n, 0.05, seed).noisy
        oracle = fs.FunctionOracle.from_table(table, fs.Access.MEMBERSHIP)
        _, rep = L.learn_agnostic(oracle, s, eps, seed=seed, exact=True)
    else:
        # monotone accounting runs the DP on exact influences of the monotone target
        _, rep = L.learn_realizable(oracle, s, eps, seed=seed, exact=True)
    bound = params.candidate_bound()
    return {"mode": mode, "n": n, "s": s, "eps": eps, "seed": seed, "d": params.d,
            "tau": params.tau, "delta": params.delta, "memo_entries": rep.memo_entries,
            "recursive_calls": rep.recursive_calls, "max_candidate_set": rep.max_candidate_set,
            "candidate_bound": bound, "bound_ok": rep.max_candidate_set <= bound,
            "wall_ms": rep.wall_ms if timing else None}


def _bench_task(task):
    return bench_row(*task)


def cmd_bench(args) -> int:
    tasks = [(args.mode, args.n, s, e, args.seed + k, args.timing)
             for s in args.sizes for e in args.eps for k in range(args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_task, tasks))
    else:
        rows = [_bench_task(t) for t in tasks]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow(["" if r[c] is None else r[c] for c in BENCH_COLUMNS])
    return EXIT_OK if all(r["bound_ok"] for r in rows) else EXIT_VIOLATION


# --------------------------------------------------------------------------
# argument parsing

def _csv_list(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dtproper", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a target tree and its truth table")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--depth-cap", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--monotone", action="store_true", help="draw a monotone function (size <= --size)")
    g.add_argument("--noise", type=float, default=None,
                   help="flip each table entry with this probability; writes <out>.opt.json")
    g.add_argument("--out", required=True, help="output prefix; writes <out>.tree and <out>.tt")
    g.set_defaults(func=cmd_gen)

    fields = ",".join(L.LearnReport.FIELDS)
    lr = sub.add_parser("learn", help="run a learner on a target file",
                        epilog=f"CSV columns (fixed order): {fields}. JSON has the same keys.")
    lr.add_argument("--mode", choices=L.MODES, required=True)
    lr.add_argument("--target", required=True, help=".tt truth table or .tree s-expression")
    lr.add_argument("--n", type=int, default=None, help="dimension for .tree targets")
    lr.add_argument("--size", type=int, required=True)
    lr.add_argument("--eps", type=float, required=True)
    lr.add_argument("--seed", type=int, default=0)
    lr.add_argument("--exact", action="store_true", help="exact influences from the truth table")
    lr.add_argument("--engine", choices=L.ENGINES, default="auto", help="DP engine in exact mode")
    lr.add_argument("--exact-verify", action="store_true", help="report the exact output distance")
    lr.add_argument("--rescale-eps", action="store_true", help="divide eps by the proof constant")
    lr.add_argument("--check", action="store_true",
                    help="exit 2 if dist_out exceeds opt_upper plus the guarantee")
    lr.add_argument("--opt", default=None, help="opt sidecar from gen --noise (for --check)")
    lr.add_argument("--tree-out", default=None, help="write the hypothesis tree here")
    lr.add_argument("--format", choices=("csv", "json"), default="json")
    lr.add_argument("--timing", action="store_true", help="fill wall_ms (breaks byte-identity)")
    lr.set_defaults(func=cmd_learn)

    v = sub.add_parser("verify", help="certify the pruning guarantees or the OSSS inequality")
    v.add_argument("check", choices=("prune", "osss"))
    v.add_argument("--target", default=None)
    v.add_argument("--tree", default=None)
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--tau", type=_fraction, default=None, help="threshold, e.g. 1/8")
    v.add_argument("--random", type=int, default=0, metavar="K",
                   help="instead check K random seeded instances")
    v.add_argument("--n-max", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="exact-mode memo accounting over an (s, eps) grid",
                       epilog="CSV columns (fixed order): " + ",".join(BENCH_COLUMNS)
                       + ". Monotone rows run the DP on exact influences of a monotone target.")
    b.add_argument("--mode", choices=L.MODES, default="realizable")
    b.add_argument("--n", type=int, default=10)
    b.add_argument("--sizes", type=_csv_list(int), default=[2, 4, 8])
    b.add_argument("--eps", type=_csv_list(float), default=[0.2, 0.1])
    b.add_argument("--seeds", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--timing", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"dtproper: {e}", file=sys.stderr)
        return e.code
    except fs.EnumerationError as e:
        print(f"dtproper: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as e:
        print(f"dtproper: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
