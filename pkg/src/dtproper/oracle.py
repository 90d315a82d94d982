"""Brute-force ground truth, written independently of :mod:`funcspace`.

Everything here works on plain Python lists of ``Fraction`` values and loops
over points one at a time.  It is slow on purpose: the point is to share no
code path with the vectorised implementations it is used to check.  The
learners never import this module.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from . import funcspace as fs
from . import tree as dt

EXHAUSTIVE_LIMITS = {"n": 4, "s": 4, "d": 3}
DEFINITION_N_MAX = 12


class InstanceTooLarge(ValueError):
    """Brute force refused: the enumeration would not finish in reasonable time."""


def _values(f, n_max: int) -> tuple[int, list]:
    """Point values of ``f`` as a list of Fractions (index j <-> packed point j)."""
    t = fs.as_table(f)
    if t.n > n_max:
        raise InstanceTooLarge(f"n={t.n} exceeds the brute-force limit {n_max}")
    if t.exact:
        vals = [Fraction(int(v), t.den) for v in t.values.tolist()]
    else:
        vals = [Fraction(float(v)) for v in t.values.tolist()]
    return t.n, vals


def _rho(a, b, not_equal: bool):
    if not_equal:
        return Fraction(int(a != b))
    return abs(a - b)


def _is_pm1(vals) -> bool:
    return all(v in (1, -1) for v in vals)


def _metric_flag(vals, metric) -> bool:
    if metric is None:
        return _is_pm1(vals)
    return metric is fs.Metric.NOT_EQUAL


def _points(n: int) -> Iterator[tuple[int, ...]]:
    # point j as a +-1 tuple, x_1 is bit 0
    for j in range(1 << n):
        yield tuple(1 if (j >> k) & 1 else -1 for k in range(n))


def _index(x) -> int:
    return sum(1 << k for k, v in enumerate(x) if v > 0)


# --------------------------------------------------------------------------
# definitional statistics

def influence_by_definition(f, i: int, metric: fs.Metric | None = None) -> Fraction:
    """Average of rho(f(x), f(x')) over x and a fresh uniform value for x'_i."""
    n, vals = _values(f, DEFINITION_N_MAX)
    if not 1 <= i <= n:
        raise ValueError(f"variable x{i} out of range for n={n}")
    ne = _metric_flag(vals, metric)
    total = Fraction(0)
    for x in _points(n):
        for b in (-1, 1):
            y = list(x)
            y[i - 1] = b
            total += _rho(vals[_index(x)], vals[_index(y)], ne)
    return total / (2 << n)


def dist_by_definition(f, g, metric: fs.Metric | None = None) -> Fraction:
    n, a = _values(f, DEFINITION_N_MAX)
    m, b = _values(g, DEFINITION_N_MAX)
    if n != m:
        raise ValueError("dimension mismatch")
    ne = _metric_flag(a + b, metric)
    return sum((_rho(u, v, ne) for u, v in zip(a, b)), Fraction(0)) / (1 << n)


def expectation_by_definition(f) -> Fraction:
    n, vals = _values(f, DEFINITION_N_MAX)
    return sum(vals, Fraction(0)) / (1 << n)


def bias_by_definition(f) -> Fraction:
    """min over constants b of Pr[f(x) != b]."""
    n, vals = _values(f, DEFINITION_N_MAX)
    return min(Fraction(sum(1 for v in vals if v != b), 1 << n) for b in (-1, 1))


def fourier_coefficient_by_definition(f, S) -> Fraction:
    n, vals = _values(f, DEFINITION_N_MAX)
    S = tuple(S)
    total = Fraction(0)
    for x in _points(n):
        chi = 1
        for i in S:
            chi *= x[i - 1]
        total += vals[_index(x)] * chi
    return total / (1 << n)


def smooth_by_definition(f, delta, n_max: int = 8) -> list:
    """f_delta at every point: sum_y f(y) (delta/2)^{ham(x,y)} (1 - delta/2)^{n - ham(x,y)}."""
    n, vals = _values(f, n_max)
    p = Fraction(delta) / 2
    weight = [p ** h * (1 - p) ** (n - h) for h in range(n + 1)]
    out = []
    for x in range(1 << n):
        out.append(sum((vals[y] * weight[bin(x ^ y).count("1")] for y in range(1 << n)), Fraction(0)))
    return out


def is_monotone_by_definition(f) -> bool:
    """f(x) <= f(y) for every comparable pair x <= y (coordinatewise)."""
    n, vals = _values(f, DEFINITION_N_MAX)
    full = (1 << n) - 1
    for x in range(1 << n):
        free = full & ~x
        sub = free
        while sub:
            if vals[x] > vals[x | sub]:
                return False
            sub = (sub - 1) & free
    return True


# --------------------------------------------------------------------------
# exhaustive tree search

def _trees(free: tuple, depth: int, size: int) -> Iterator[dt.Tree]:
    """Every tree with exactly ``size`` leaves and depth <= ``depth``, no variable repeated on a path."""
    if size == 1:
        yield dt.Leaf(-1)
        yield dt.Leaf(1)
        return
    if depth == 0 or size > (1 << min(depth, len(free))):
        return
    for var in free:
        rest = tuple(v for v in free if v != var)
        for k in range(1, size):
            for lo in _trees(rest, depth - 1, k):
                for hi in _trees(rest, depth - 1, size - k):
                    yield dt.Node(var, lo, hi)


def all_trees(n: int, s: int, d: int) -> list[dt.Tree]:
    """Every tree of size <= s and depth <= d over x_1..x_n (no repeated variable on a path)."""
    free = tuple(range(1, n + 1))
    return [t for k in range(1, s + 1) for t in _trees(free, d, k)]


@dataclass
class SearchResult:
    tree: dt.Tree
    dist: Fraction
    candidates: int     # trees enumerated
    survivors: int      # of which everywhere tau-influential


def exhaustive_best_tree(f, s: int, d: int, tau, metric: fs.Metric | None = None,
                         limits: Optional[dict] = None) -> SearchResult:
    """Closest everywhere tau-influential tree of size <= s and depth <= d, by enumeration."""
    lim = dict(EXHAUSTIVE_LIMITS, **(limits or {}))
    n, vals = _values(f, lim["n"])
    if s > lim["s"] or d > lim["d"]:
        raise InstanceTooLarge(f"(s={s}, d={d}) exceeds the exhaustive limits {lim}")
    if s < 1 or d < 0:
        raise ValueError("need s >= 1 and d >= 0")
    ne = _metric_flag(vals, metric)
    tau = Fraction(tau)
    points = list(_points(n))
    cache: dict = {}

    def influence(fixed: tuple, i: int) -> Fraction:
        # fixed: sorted ((var, value), ...) describing the restriction
        key = (fixed, i)
        got = cache.get(key)
        if got is None:
            fx = dict(fixed)
            total = Fraction(0)
            for x in points:
                y = [fx.get(k + 1, v) for k, v in enumerate(x)]
                for b in (-1, 1):
                    z = list(y)
                    z[i - 1] = b
                    total += _rho(vals[_index(y)], vals[_index(z)], ne)
            got = cache[key] = total / (2 << n)
        return got

    def influential(t, fixed) -> bool:
        if isinstance(t, dt.Leaf):
            return True
        if influence(fixed, t.var) < tau:
            return False
        return all(influential(child, tuple(sorted(fixed + ((t.var, b),))))
                   for b, child in ((-1, t.lo), (1, t.hi)))

    def dist(t) -> Fraction:
        total = Fraction(0)
        for x in points:
            total += _rho(Fraction(dt.evaluate(t, x)), vals[_index(x)], ne)
        return total / (1 << n)

    best, best_d, count, alive = None, None, 0, 0
    for t in all_trees(n, s, d):
        count += 1
        if not influential(t, ()):
            continue
        alive += 1
        e = dist(t)
        if best is None or e < best_d:
            best, best_d = t, e
    return SearchResult(best, best_d, count, alive)


# --------------------------------------------------------------------------
# planted targets

@dataclass
class PlantedTarget:
    clean: fs.TruthTable
    noisy: fs.TruthTable
    flipped: int
    opt_upper: Fraction     # dist(noisy, planted tree), an upper bound on opt_s

    def oracle(self, access: fs.Access = fs.Access.MEMBERSHIP) -> fs.FunctionOracle:
        return fs.FunctionOracle.from_table(self.noisy, access)


def planted_noise_target(tree: dt.Tree, n: int, eta: float, seed: int) -> PlantedTarget:
    """Flip each truth-table entry of ``tree`` independently with probability ``eta``."""
    if not 0 <= eta <= 1:
        raise ValueError("noise rate must lie in [0, 1]")
    if n > fs.exact_limit():
        raise fs.EnumerationError(f"n={n} exceeds the exact limit {fs.exact_limit()}")
    clean = fs.TruthTable.from_tree(tree, n)
    flips = np.random.default_rng([seed, 101]).random(1 << n) < eta
    noisy = fs.TruthTable(n, np.where(flips, -clean.values, clean.values).astype(np.int8))
    k = int(flips.sum())
    return PlantedTarget(clean, noisy, k, Fraction(k, 1 << n))


def iter_small_tables(n: int) -> Iterator[fs.TruthTable]:
    """All 2^(2^n) Boolean functions on n variables (keep n <= 3)."""
    if n > 3:
        raise InstanceTooLarge("full function enumeration is limited to n <= 3")
    for bits in itertools.product((-1, 1), repeat=1 << n):
        yield fs.TruthTable(n, np.array(bits, dtype=np.int8))
