"""Memoised dynamic program over restrictions, and the three learner pipelines.

The DP (:func:`build_dt`) talks to the target only through an *evaluator*:

* ``influences(pi)`` -- Inf_i(f_pi) for every variable (0 for fixed ones),
* ``leaf(pi)``       -- the best constant label for f_pi and its distance,
* ``threshold(tau)`` -- the cut-off a variable's influence must reach to
  become a candidate root.

:class:`ExactEvaluator` enumerates a truth table, :class:`SampledEvaluator`
issues membership queries, and :class:`MonotoneEvaluator` uses nothing but
a pool of random labelled examples.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import funcspace as fs
from . import tree as dt
from .dense import build_dt_dense
from .funcspace import EMPTY, Metric, Restriction

MODES = ("realizable", "agnostic", "monotone")
ENGINES = ("auto", "recursive", "dense")
# distance guarantee each pipeline's proof establishes, as a multiple of eps
PROOF_CONSTANT = {"realizable": 2, "agnostic": 4, "monotone": 2}


# --------------------------------------------------------------------------
# parameters

def _log2_clamped(s: int) -> float:
    return max(1.0, math.log2(s))


@dataclass(frozen=True)
class LearnerParams:
    """Depth budget, influence threshold and noise rate derived from (s, eps).

    d = ceil(log2(s/eps)), tau = eps / log2(s) with log2(s) clamped to >= 1,
    and delta = tau / (4d) in agnostic mode (0 otherwise).  With
    ``rescale_eps`` the working eps is divided by the mode's proof constant.
    """
    s: int
    eps: float
    mode: str = "realizable"
    seed: int = 0
    exact: bool = False
    rescale_eps: bool = False
    d: int = field(init=False)
    tau: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.s < 1:
            raise ValueError("size must be >= 1")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        eps = self.working_eps
        d = max(0, math.ceil(math.log2(self.s / eps) - 1e-12))
        tau = eps / _log2_clamped(self.s)
        delta = tau / (4 * d) if self.mode == "agnostic" and d > 0 else 0.0
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "delta", delta)

    @property
    def working_eps(self) -> float:
        return self.eps / PROOF_CONSTANT[self.mode] if self.rescale_eps else self.eps

    @property
    def guarantee(self) -> float:
        """Additive distance guarantee (beyond opt_s) in terms of the user's eps."""
        return PROOF_CONSTANT[self.mode] * self.working_eps

    def candidate_bound(self) -> float:
        """Upper bound on |S| at any node when influences are exact."""
        if self.mode == "realizable":
            return _log2_clamped(self.s) / self.tau
        if self.mode == "monotone":
            return 1.0 / (4 * self.tau ** 2)
        slack = self.tau - 2 * self.delta * self.d
        return 1.0 / (math.e * self.delta * slack ** 2)

    def estimate_confidence(self, n: int) -> float:
        """Per-estimate failure probability 1 / (n * B^d), B the candidate bound."""
        b = max(2.0, self.candidate_bound())
        return min(0.05, 1.0 / (max(n, 1) * b ** max(self.d, 1)))


# --------------------------------------------------------------------------
# evaluators

class ExactEvaluator:
    """Exact influences and leaf statistics for restrictions of one table.

    The flip discrepancies |f(x) - f(x with bit i flipped)| are tabulated once
    for every i; a restriction then only has to sum a sub-cube.
    """

    def __init__(self, table: fs.TruthTable, metric: Metric | None = None):
        self.table = table
        self.n = n = table.n
        self.metric = metric or (Metric.NOT_EQUAL if table.boolean else Metric.ABSOLUTE)
        if self.metric is Metric.NOT_EQUAL and not table.boolean:
            raise ValueError("not-equals metric needs a +-1 valued table")
        self.exact = table.exact
        v = table.values
        if self.exact and v.dtype.kind != "O":
            v = v.astype(np.int64)
        idx = np.arange(1 << n)
        rows = []
        for i in range(1, n + 1):
            other = v[idx ^ (1 << (i - 1))]
            if self.metric is Metric.NOT_EQUAL:
                rows.append((v != other).astype(np.uint8))
            else:
                rows.append(np.abs(v - other))
        self._flips = (np.stack(rows) if rows else np.zeros((0, 1 << n))).reshape((n,) + (2,) * n)
        self._cube = v.reshape((2,) * n) if n else v.reshape(())
        self._infl: dict[Restriction, list] = {}
        # NE distances/influences carry an extra factor 1/2 from |a-b| = 2[a != b]
        self._scale = 1 if self.metric is Metric.NOT_EQUAL else table.den

    def threshold(self, tau):
        return tau if self.exact else tau - fs.FLOAT_TOL

    def _select(self, pi: Restriction) -> tuple:
        sel = []
        for axis in range(self.n):
            var = self.n - axis
            sel.append(((pi.bits >> (var - 1)) & 1) if var in pi else slice(None))
        return tuple(sel)

    def _ratio(self, total, count):
        if self.exact:
            return Fraction(int(total), count)
        return float(total) / count

    def influences(self, pi: Restriction) -> list:
        got = self._infl.get(pi)
        if got is not None:
            return got
        m = 1 << (self.n - len(pi))
        sums = self._flips[(slice(None),) + self._select(pi)].reshape(self.n, -1).sum(axis=1)
        out = [0 if (i + 1) in pi else self._ratio(sums[i], 2 * m * self._scale) for i in range(self.n)]
        self._infl[pi] = out
        return out

    def mean(self, pi: Restriction):
        m = 1 << (self.n - len(pi))
        return self._ratio(self._cube[self._select(pi)].sum(), m * self.table.den)

    def leaf(self, pi: Restriction):
        e = self.mean(pi)
        # sign(0) = +1; float means within the slack of 0 count as 0
        label = 1 if e >= (0 if self.exact else -fs.FLOAT_TOL) else -1
        gap = 1 - abs(e)
        return label, (gap / 2 if self.metric is Metric.NOT_EQUAL else gap)


class SampledEvaluator:
    """Query-based estimates for a membership oracle or a Monte-Carlo smoothed function.

    Each restriction draws its own points from a generator seeded by
    ``(seed, pi)``, so results do not depend on the order of the recursion.
    """

    def __init__(self, f, accuracy: float, confidence: float, seed: int = 0,
                 metric: Metric | None = None):
        self.f = f
        self.n = f.n
        self.accuracy = accuracy
        self.confidence = confidence
        self.seed = seed
        if metric is None:
            metric = Metric.ABSOLUTE if isinstance(f, fs.SmoothedFunction) else Metric.NOT_EQUAL
        self.metric = metric
        self._infl: dict[Restriction, list] = {}

    def threshold(self, tau):
        return tau - self.accuracy

    def _rng(self, pi: Restriction, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream, pi.mask, pi.bits])

    def influences(self, pi: Restriction) -> list:
        got = self._infl.get(pi)
        if got is not None:
            return got
        free = [i for i in range(1, self.n + 1) if i not in pi]
        est = fs.influence_est_all(self.f, free, self.accuracy, self.confidence,
                                   self._rng(pi, 0), self.metric, pi)
        out = [est.get(i, 0) for i in range(1, self.n + 1)]
        self._infl[pi] = out
        return out

    def leaf(self, pi: Restriction):
        m = fs.hoeffding_samples(self.accuracy, self.confidence, spread=2.0)
        x = pi.apply_index(fs.uniform_indices(self.n, m, self._rng(pi, 1)))
        e = float(np.mean(fs._point_eval(self.f, x, rng=self._rng(pi, 2))))
        gap = 1 - min(1.0, abs(e))
        return (1 if e >= 0 else -1), (gap / 2 if self.metric is Metric.NOT_EQUAL else gap)


class MonotoneEvaluator:
    """Influences of a monotone target from labelled examples only.

    Uses Inf_i(f_pi) = 2^{|pi|-1} E[f(x) x_i 1[x consistent with pi]] and
    E[f_pi] = 2^{|pi|} E[f(x) 1[x consistent with pi]].
    """

    def __init__(self, examples: fs.ExampleSet, accuracy: float, confidence: float):
        self.examples = examples
        self.n = examples.n
        self.accuracy = accuracy
        self.confidence = confidence
        self._stats: dict[Restriction, tuple] = {}

    def threshold(self, tau):
        return tau - self.accuracy

    def _correlations(self, pi):
        got = self._stats.get(pi)
        if got is None:
            need = fs.mono_required_examples(len(pi), self.accuracy, self.confidence)
            if self.examples.count < need:
                raise fs.BudgetError(f"|pi|={len(pi)} needs {need} examples, "
                                     f"have {self.examples.count}")
            got = self._stats[pi] = self.examples.correlations(pi)
        return got

    def influences(self, pi: Restriction) -> list:
        _, corr = self._correlations(pi)
        scale = 2.0 ** (len(pi) - 1)
        return [0 if (i + 1) in pi else float(scale * corr[i]) for i in range(self.n)]

    def leaf(self, pi: Restriction):
        e0, _ = self._correlations(pi)
        e = 2.0 ** len(pi) * e0
        return (1 if e >= 0 else -1), (1 - min(1.0, abs(e))) / 2


# --------------------------------------------------------------------------
# the dynamic program

@dataclass(frozen=True)
class MemoEntry:
    tree: dt.Tree
    dist: object


class MemoMap:
    """(restriction, size budget) -> best tree found; entries are write-once."""

    def __init__(self):
        self._map: dict[tuple[Restriction, int], MemoEntry] = {}
        self.recursive_calls = 0
        self.candidate_sets: dict[Restriction, int] = {}

    def __contains__(self, key):
        return key in self._map

    def __getitem__(self, key) -> MemoEntry:
        return self._map[key]

    def get(self, key):
        return self._map.get(key)

    def __setitem__(self, key, entry: MemoEntry):
        if key in self._map:
            raise KeyError(f"memo entry {key} already written")
        self._map[key] = entry

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()

    @property
    def max_candidate_set(self) -> int:
        return max(self.candidate_sets.values(), default=0)


def build_dt(evaluator, s: int, d: int, tau, pi: Restriction = EMPTY,
             memo: Optional[MemoMap] = None) -> MemoEntry:
    """Best depth-(d - |pi|), size-<=s, everywhere tau-influential tree for f_pi.

    Roots are drawn from S = {i : Inf_i(f_pi) >= threshold}; every split of
    the size budget into (k, s-k) is tried and the closest tree kept, ties
    going to the lower variable index and then the smaller left budget.
    An empty S yields the constant leaf sign(E[f_pi]) (sign(0) = +1).
    """
    if s < 1:
        raise ValueError("size budget must be >= 1")
    if len(pi) > d:
        raise ValueError("restriction longer than the depth budget")
    memo = MemoMap() if memo is None else memo
    n = evaluator.n
    thr = evaluator.threshold(tau)
    tol = 0 if getattr(evaluator, "exact", False) else fs.FLOAT_TOL
    store = memo._map

    def leaf(pi):
        label, dist = evaluator.leaf(pi)
        return MemoEntry(dt.Leaf(label), dist)

    def rec(pi: Restriction, s: int) -> MemoEntry:
        key = (pi, s)
        got = store.get(key)
        if got is not None:
            return got
        memo.recursive_calls += 1
        if len(pi) == d or s == 1:
            entry = leaf(pi)
        else:
            infl = evaluator.influences(pi)
            cands = [i for i in range(1, n + 1) if (i not in pi) and infl[i - 1] >= thr]
            memo.candidate_sets[pi] = len(cands)
            if not cands:
                entry = leaf(pi)
            else:
                best = None
                for i in cands:
                    lo_pi, hi_pi = pi.extend(i, -1), pi.extend(i, 1)
                    for k in range(1, s):
                        lo = rec(lo_pi, k)
                        hi = rec(hi_pi, s - k)
                        dist = (lo.dist + hi.dist) / 2
                        if best is None or dist < best[0] - tol:
                            best = (dist, i, lo, hi)
                dist, i, lo, hi = best
                entry = MemoEntry(dt.Node(i, lo.tree, hi.tree), dist)
        memo[key] = entry
        return entry

    return rec(pi, s)


# --------------------------------------------------------------------------
# learner pipelines

@dataclass
class LearnReport:
    mode: str
    n: int
    s: int
    eps: float
    d: int
    tau: float
    delta: float
    seed: int
    dist_out: object
    size_out: int
    depth_out: int
    queries: int
    examples: int
    memo_entries: int
    recursive_calls: int
    max_candidate_set: int
    wall_ms: Optional[float]

    FIELDS = ("mode", "n", "s", "eps", "d", "tau", "delta", "seed", "dist_out", "size_out",
              "depth_out", "queries", "examples", "memo_entries", "recursive_calls",
              "max_candidate_set", "wall_ms")

    def to_record(self, timing: bool = True) -> dict:
        rec = asdict(self)
        if isinstance(rec["dist_out"], Fraction):
            rec["dist_out"] = float(rec["dist_out"])
        if not timing:
            rec["wall_ms"] = None
        return {k: rec[k] for k in self.FIELDS}


def _report(params: LearnerParams, n: int, tree: dt.Tree, memo: MemoMap, counters: fs.Counters,
            start: float, reference) -> LearnReport:
    dist_out = None
    if reference is not None:
        dist_out = fs.dist_exact(tree, fs.as_table(reference), Metric.NOT_EQUAL)
    return LearnReport(
        mode=params.mode, n=n, s=params.s, eps=params.eps, d=params.d, tau=params.tau,
        delta=params.delta, seed=params.seed, dist_out=dist_out, size_out=dt.size(tree),
        depth_out=dt.depth(tree), queries=counters.queries, examples=counters.examples,
        memo_entries=len(memo), recursive_calls=memo.recursive_calls,
        max_candidate_set=memo.max_candidate_set,
        wall_ms=round((time.perf_counter() - start) * 1000.0, 3))


def _check_engine(engine: str, exact: bool) -> None:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "dense" and not exact:
        raise ValueError("the dense engine needs exact mode")


def _run_exact(table: fs.TruthTable, params: LearnerParams, metric: Metric, dense: bool, memo):
    if dense:
        entry, stats = build_dt_dense(table, params.s, params.d, params.tau, metric)
        return entry.tree, stats
    memo = MemoMap() if memo is None else memo
    return build_dt(ExactEvaluator(table, metric), params.s, params.d, params.tau, EMPTY, memo).tree, memo


def learn_realizable(f: fs.FunctionOracle, s: int, eps: float, seed: int = 0, exact: bool = False,
                     reference=None, rescale_eps: bool = False, memo: MemoMap | None = None,
                     engine: str = "auto"):
    """Learn a size-s tree with membership queries; w.h.p. dist <= 2 eps for a size-s target.

    Influences are estimated to +-tau/2 (or computed exactly with ``exact``).
    ``reference`` (a table) is only used to report the exact output distance.
    Tree targets keep candidate sets small, so ``auto`` uses the recursive DP.
    """
    start = time.perf_counter()
    _check_engine(engine, exact)
    params = LearnerParams(s, eps, "realizable", seed, exact, rescale_eps)
    if exact:
        tree, memo = _run_exact(f.table(), params, Metric.NOT_EQUAL, engine == "dense", memo)
    else:
        ev = SampledEvaluator(f, params.tau / 2, params.estimate_confidence(f.n), seed)
        memo = MemoMap() if memo is None else memo
        tree = build_dt(ev, s, params.d, params.tau, EMPTY, memo).tree
    return tree, _report(params, f.n, tree, memo, f.counters, start, reference)


def learn_agnostic(f: fs.FunctionOracle, s: int, eps: float, seed: int = 0, exact: bool | None = None,
                   reference=None, rescale_eps: bool = False, memo: MemoMap | None = None,
                   engine: str = "auto"):
    """Learn against the smoothed target f_delta, delta = tau / (4d); dist <= opt_s + 4 eps.

    Exact mode tabulates f_delta (float arithmetic) and runs the DP under the
    absolute-difference metric.  Smoothing makes nearly every variable
    influential, so ``auto`` picks the dense engine there.  Otherwise smoothed
    values are Monte-Carlo estimates to +-tau/4, correct but only practical
    on toy instances.
    """
    start = time.perf_counter()
    if exact is None:
        exact = f.n <= fs.exact_limit() and f.access is not fs.Access.RANDOM_EXAMPLE
    _check_engine(engine, exact)
    params = LearnerParams(s, eps, "agnostic", seed, exact, rescale_eps)
    if exact:
        smoothed = fs.noise_operator(f.table(), float(params.delta))
        tree, memo = _run_exact(smoothed, params, Metric.ABSOLUTE, engine != "recursive", memo)
        return tree, _report(params, f.n, tree, memo, f.counters, start, reference)
    conf = params.estimate_confidence(f.n)
    sf = fs.SmoothedFunction(f, float(params.delta), "mc", accuracy=params.tau / 4,
                             confidence=conf, seed=seed)
    ev = SampledEvaluator(sf, params.tau / 4, conf, seed, Metric.ABSOLUTE)
    # outer sample error tau/4 plus point error tau/4 on each side
    ev.threshold = lambda tau: tau - tau / 2
    memo = MemoMap() if memo is None else memo
    tree = build_dt(ev, s, params.d, params.tau, EMPTY, memo).tree
    return tree, _report(params, f.n, tree, memo, f.counters, start, reference)


def monotone_examples_needed(params: LearnerParams, n: int) -> int:
    return fs.mono_required_examples(params.d, params.tau / 2, params.estimate_confidence(n))


def learn_monotone(f: fs.FunctionOracle, s: int, eps: float, seed: int = 0, reference=None,
                   rescale_eps: bool = False, examples: fs.ExampleSet | None = None,
                   memo: MemoMap | None = None):
    """Learn a monotone target from uniform random labelled examples only.

    The oracle is wrapped in a random-example view, so any point query raises.
    """
    start = time.perf_counter()
    params = LearnerParams(s, eps, "monotone", seed, False, rescale_eps)
    view = f if f.access is fs.Access.RANDOM_EXAMPLE else f.examples_only()
    conf = params.estimate_confidence(f.n)
    if examples is None:
        need = monotone_examples_needed(params, f.n)
        examples = fs.ExampleSet.draw(view, need, np.random.default_rng([seed, 7]))
    ev = MonotoneEvaluator(examples, params.tau / 2, conf)
    memo = MemoMap() if memo is None else memo
    tree = build_dt(ev, s, params.d, params.tau, EMPTY, memo).tree
    return tree, _report(params, f.n, tree, memo, view.counters, start, reference)
