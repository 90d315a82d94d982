"""Pruning a tree until every internal node queries an influential variable.

``prune`` takes injected ``influence_fn(f, i)`` and ``dist_fn(tree, f)`` so the
same recursion serves exact tables and sampled oracles.  The certifying
checks (:func:`prune_certificate`, :func:`osss_check`) only run in exact mode.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional

from . import funcspace as fs
from . import tree as dt


def _exact_influence(f, i):
    return fs.influence_exact(f, i)


def _exact_dist(t: dt.Tree, f):
    return fs.dist_exact(t, f)


def prune(f, tree: dt.Tree, tau, influence_fn: Callable = _exact_influence,
          dist_fn: Callable = _exact_dist) -> dt.Tree:
    """Recursively drop root queries whose influence on ``f`` is at most ``tau``.

    A root on ``x_i`` survives iff Inf_i(f) > tau, in which case both subtrees
    are pruned against the matching restriction of ``f``.  Otherwise the root
    is replaced by whichever pruned subtree is closer to ``f`` (ties go to
    the ``lo`` side).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if isinstance(tree, dt.Leaf):
        return tree
    i = tree.var
    if influence_fn(f, i) > tau:
        lo = prune(fs.restrict(f, fs.Restriction.of({i: -1})), tree.lo, tau, influence_fn, dist_fn)
        hi = prune(fs.restrict(f, fs.Restriction.of({i: 1})), tree.hi, tau, influence_fn, dist_fn)
        return dt.Node(i, lo, hi)
    lo = prune(f, tree.lo, tau, influence_fn, dist_fn)
    hi = prune(f, tree.hi, tau, influence_fn, dist_fn)
    return lo if dist_fn(lo, f) <= dist_fn(hi, f) else hi


@dataclass
class InfluenceCheck:
    ok: bool
    # root-to-node path of the first violating node, as (var, branch) pairs
    witness: Optional[tuple[tuple[int, int], ...]] = None
    witness_var: Optional[int] = None

    def __bool__(self):
        return self.ok


def is_everywhere_influential(tree: dt.Tree, f, tau, influence_fn: Callable = _exact_influence) -> InfluenceCheck:
    """Every internal node v must satisfy Inf_{i(v)}(f_v) >= tau."""
    def walk(node, g, path):
        if isinstance(node, dt.Leaf):
            return None
        if influence_fn(g, node.var) < tau:
            return path, node.var
        for b, child in ((-1, node.lo), (1, node.hi)):
            bad = walk(child, fs.restrict(g, fs.Restriction.of({node.var: b})), path + ((node.var, b),))
            if bad is not None:
                return bad
        return None

    bad = walk(tree, f, ())
    if bad is None:
        return InfluenceCheck(True)
    return InfluenceCheck(False, bad[0], bad[1])


def _num(x):
    """Fractions as 'p/q' strings, everything else unchanged (for JSON)."""
    if isinstance(x, Fraction):
        return str(x)
    return x


@dataclass
class PruneCertificate:
    size_before: int
    size_after: int
    depth_before: int
    depth_after: int
    dist_before: object
    dist_after: object
    tau: object
    delta_avg_depth: object
    g1: bool
    g2: bool
    g3: bool

    @property
    def holds(self) -> bool:
        return self.g1 and self.g2 and self.g3

    def to_record(self) -> dict:
        return {k: _num(v) for k, v in asdict(self).items()}


def prune_certificate(f, tree: dt.Tree, tau) -> tuple[dt.Tree, PruneCertificate]:
    """Prune in exact mode and check size/depth, influence and distance guarantees."""
    t = fs.as_table(f)
    pruned = prune(t, tree, tau)
    before, after = fs.dist_exact(tree, t), fs.dist_exact(pruned, t)
    avg = dt.avg_depth(tree)
    g1 = dt.size(pruned) <= dt.size(tree) and dt.depth(pruned) <= dt.depth(tree)
    g2 = bool(is_everywhere_influential(pruned, t, tau))
    g3 = after <= before + avg * tau
    cert = PruneCertificate(dt.size(tree), dt.size(pruned), dt.depth(tree), dt.depth(pruned),
                            before, after, tau, avg, g1, g2, g3)
    return pruned, cert


@dataclass
class OsssReport:
    """max_i Inf_i(f) >= (bias(f) - dist(T, f)) / avg_depth(T), plus the
    size-based form max_i Inf_i(f) >= Var(f) / (2 log2 s) when T computes f."""
    lhs: object
    rhs: object
    holds: bool
    bias: object
    dist: object
    avg_depth: object
    degenerate: bool = False
    variance: object = None
    size_rhs: object = None
    size_holds: Optional[bool] = None
    tight: bool = False

    def to_record(self) -> dict:
        return {k: _num(v) for k, v in asdict(self).items()}


def osss_check(f, tree: dt.Tree) -> OsssReport:
    t = fs.as_table(f)
    if not t.boolean:
        raise ValueError("the OSSS check needs a +-1 valued function")
    lhs = max(fs.influences_exact(t), default=Fraction(0))
    b = fs.bias(t)
    dist = fs.dist_exact(tree, t)
    avg = dt.avg_depth(tree)
    var = fs.variance(t)
    if avg == 0:
        # constant tree: the inequality has no content
        rep = OsssReport(lhs, None, True, b, dist, avg, degenerate=True, variance=var)
    else:
        rhs = (b - dist) / avg
        rep = OsssReport(lhs, rhs, lhs >= rhs, b, dist, avg, variance=var, tight=lhs == rhs)
    s = dt.size(tree)
    if dist == 0 and s >= 2:
        size_rhs = var / (2 * math.log2(s)) if s & (s - 1) else var / (2 * (s.bit_length() - 1))
        rep.size_rhs = size_rhs
        rep.size_holds = bool(lhs >= size_rhs)
        rep.holds = rep.holds and rep.size_holds
    return rep
