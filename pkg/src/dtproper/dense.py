"""Bottom-up tabulation of the restriction DP for exact truth tables.

Computes the same recurrence as :func:`dtproper.learner.build_dt`, but
level by level: every restriction with ``j`` fixed variables is handled in
one batch of numpy operations instead of one Python call per memo key.
This pays off when almost every variable is influential (smoothed targets),
where the recursive version touches ~10^6 keys.

Restrictions at level ``j`` are laid out as ``(combo, bits)``: ``combo`` is
the sorted tuple of fixed variables (lexicographic rank) and bit ``t`` of
``bits`` is set when ``combo[t]`` is fixed to +1.

Sub-cube sums for all 3^n restrictions come from a ternary transform of the
cube (digit 0 -> x=-1, 1 -> x=+1, 2 -> free).  Distances are kept
un-normalised (``W = dist * norm``) so a parent's value is exactly the sum
of its children's; in exact mode everything stays in int64.

Tie-breaks, thresholds and memo accounting match the recursive version:
``memo_entries`` and ``recursive_calls`` are recovered by propagating
reachability from ``(empty, s)`` through the candidate sets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import funcspace as fs
from . import tree as dt
from .funcspace import Metric


def ternary_sums(cube: np.ndarray) -> np.ndarray:
    """Sums over every sub-cube: axis of length 2 becomes length 3 (-1, +1, both)."""
    a = cube
    for ax in range(a.ndim):
        a = np.concatenate([a, a.sum(axis=ax, keepdims=True)], axis=ax)
    return a


@dataclass
class DenseStats:
    memo_entries: int
    recursive_calls: int
    max_candidate_set: int

    def __len__(self):
        return self.memo_entries


@dataclass
class _Level:
    j: int
    combos: list            # tuples of fixed vars
    index: dict             # bitmask of fixed vars -> combo rank
    digits: np.ndarray      # (N, n) int64, digit of var v in column v-1

    @property
    def width(self) -> int:
        return 1 << self.j

    @property
    def size(self) -> int:
        return len(self.combos) << self.j


def _make_level(n: int, j: int) -> _Level:
    combos = list(itertools.combinations(range(1, n + 1), j))
    index = {sum(1 << (v - 1) for v in c): r for r, c in enumerate(combos)}
    width = 1 << j
    digits = np.full((len(combos), width, n), 2, dtype=np.int64)
    if j:
        c_arr = np.array(combos, dtype=np.int64) - 1
        bits = (np.arange(width)[:, None] >> np.arange(j)[None, :]) & 1
        rows = np.arange(len(combos))[:, None, None]
        cols = np.arange(width)[None, :, None]
        digits[rows, cols, c_arr[:, None, :]] = bits[None, :, :]
    return _Level(j, combos, index, digits.reshape(-1, n))


def _child_maps(n: int, lev: _Level, nxt: _Level) -> dict:
    """For each var i: parent flat indices with i free, and lo/hi child flat indices."""
    out = {}
    w = lev.width
    b = np.arange(w, dtype=np.int64)[None, :]
    for i in range(1, n + 1):
        rows, child, rank = [], [], []
        for r, c in enumerate(lev.combos):
            if i in c:
                continue
            mask = sum(1 << (v - 1) for v in c) | (1 << (i - 1))
            rows.append(r)
            child.append(nxt.index[mask])
            rank.append(sum(1 for v in c if v < i))
        if not rows:
            continue
        rows = np.array(rows, dtype=np.int64)[:, None]
        child = np.array(child, dtype=np.int64)[:, None]
        rank = np.array(rank, dtype=np.int64)[:, None]
        low = b & ((1 << rank) - 1)
        high = (b >> rank) << (rank + 1)
        base = child * (w << 1) + low + high
        out[i] = ((rows * w + b).ravel(), base.ravel(), (base + (1 << rank)).ravel())
    return out


def build_dt_dense(table: fs.TruthTable, s: int, d: int, tau, metric: Metric | None = None):
    """Best depth-d, size-<=s, everywhere tau-influential tree for ``table``.

    Returns ``(MemoEntry-like (tree, dist), DenseStats)``.  Exact integer
    tables give a Fraction distance; float tables give a float and use the
    same 1e-12 comparison slack as the recursive DP.
    """
    from .learner import MemoEntry

    if s < 1:
        raise ValueError("size budget must be >= 1")
    n = table.n
    metric = metric or (Metric.NOT_EQUAL if table.boolean else Metric.ABSOLUTE)
    if metric is Metric.NOT_EQUAL and not table.boolean:
        raise ValueError("not-equals metric needs a +-1 valued table")
    exact = table.exact
    vals = table.values
    if exact:
        if vals.dtype.kind == "O":
            raise fs.EnumerationError("dense DP needs int64-representable table values")
        vals = vals.astype(np.int64)
    else:
        vals = vals.astype(np.float64)
    den = table.den if metric is Metric.ABSOLUTE else 1
    # flip discrepancy weight per metric: NE counts disagreements, ABS uses |a - b|
    scale = 1 if metric is Metric.NOT_EQUAL else table.den
    tol = 0.0 if exact else fs.FLOAT_TOL

    top = min(d, s - 1, n)          # deepest level any memo key can sit at
    levels = [_make_level(n, j) for j in range(top + 1)]
    cube = vals.reshape((2,) * n) if n else vals.reshape(())

    # leaf data per level
    pow3 = 3 ** np.arange(n, dtype=np.int64)
    tern = ternary_sums(cube)
    tflat = tern.reshape(-1)
    sums = [tflat[lev.digits @ pow3] for lev in levels]
    del tern, tflat

    def amp(j):   # W of a leaf is amp - |sum|
        return den << (n - j) if exact else float(den * 2.0 ** (n - j))

    def norm(j):  # dist = W / norm
        return amp(j) * 2 if metric is Metric.NOT_EQUAL else amp(j)

    leafw = [amp(j) - np.abs(sums[j]) for j in range(top + 1)]

    # candidate masks: cand[j][i] aligned with maps[j][i][0]
    parent_top = min(top - 1, d - 1) if s >= 2 else -1
    maps = [_child_maps(n, levels[j], levels[j + 1]) for j in range(parent_top + 1)]
    cand = [dict() for _ in range(parent_top + 1)]
    flat = vals.reshape(-1)
    idx = np.arange(1 << n)
    for i in range(1, n + 1):
        if parent_top < 0:
            break
        other = flat[idx ^ (1 << (i - 1))]
        if metric is Metric.NOT_EQUAL:
            disc = (flat != other).astype(np.int64)
        else:
            disc = np.abs(flat - other)
        red = ternary_sums(disc.reshape((2,) * n).sum(axis=n - i))
        rflat = red.reshape(-1)
        stride = pow3.copy()
        stride[i:] //= 3          # vars above i shift down one ternary digit
        stride[i - 1] = 0
        for j in range(parent_top + 1):
            if i not in maps[j]:
                continue
            pflat = maps[j][i][0]
            dsum = rflat[levels[j].digits[pflat] @ stride]
            m = n - j
            if exact:
                need = math.ceil(Fraction(tau) * (scale << (m + 1)))
                cand[j][i] = dsum >= need
            else:
                cand[j][i] = dsum >= (tau - fs.FLOAT_TOL) * scale * 2.0 ** (m + 1)
        del red, rflat

    # bottom-up DP: W[j][b] for budgets b = 1 .. s - j
    W = [dict() for _ in range(top + 1)]
    choice = [dict() for _ in range(top + 1)]
    counts = [None] * (top + 1)
    for j in range(top, -1, -1):
        W[j][1] = leafw[j]
        if j > parent_top:
            for b in range(2, s - j + 1):
                W[j][b] = leafw[j]
            continue
        cnt = np.zeros(levels[j].size, dtype=np.int64)
        for i, mask in cand[j].items():
            cnt += np.bincount(maps[j][i][0][mask], minlength=cnt.size)
        counts[j] = cnt
        # compare on the normalised scale: W_parent / norm(j) = (W_lo + W_hi) / norm(j)
        tolw = tol * norm(j)
        for b in range(2, s - j + 1):
            best = np.zeros(levels[j].size, dtype=leafw[j].dtype)
            found = np.zeros(levels[j].size, dtype=bool)
            arg_i = np.zeros(levels[j].size, dtype=np.int16)
            arg_k = np.zeros(levels[j].size, dtype=np.int16)
            for i in range(1, n + 1):
                if i not in cand[j]:
                    continue
                pflat, lo, hi = maps[j][i]
                ok = cand[j][i]
                if not ok.any():
                    continue
                pf, lo, hi = pflat[ok], lo[ok], hi[ok]
                for k in range(1, b):
                    val = W[j + 1][k][lo] + W[j + 1][b - k][hi]
                    upd = ~found[pf] | (val < best[pf] - tolw)
                    tgt = pf[upd]
                    best[tgt] = val[upd]
                    found[tgt] = True
                    arg_i[tgt] = i
                    arg_k[tgt] = k
            W[j][b] = np.where(found, best, leafw[j])
            choice[j][b] = (found, arg_i, arg_k)

    # reachability from (empty, s), for memo accounting
    reach = [{b: np.zeros(levels[j].size, dtype=bool) for b in range(1, s - j + 1)}
             for j in range(top + 1)]
    reach[0][s][0] = True
    max_cand = 0
    for j in range(parent_top + 1):
        for b in range(2, s - j + 1):
            here = reach[j][b]
            if not here.any():
                continue
            max_cand = max(max_cand, int(counts[j][here].max()))
            for i, mask in cand[j].items():
                pflat, lo, hi = maps[j][i]
                sel = mask & here[pflat]
                if not sel.any():
                    continue
                for k in range(1, b):
                    reach[j + 1][k][lo[sel]] = True
                    reach[j + 1][b - k][hi[sel]] = True
    visited = sum(int(r.sum()) for lev in reach for r in lev.values())

    # rebuild the tree from the recorded choices
    def build(j, p, b):
        if b == 1 or j > parent_top or not choice[j][b][0][p]:
            return dt.Leaf(1 if sums[j][p] >= -tol * amp(j) else -1)
        _, arg_i, arg_k = choice[j][b]
        i, k = int(arg_i[p]), int(arg_k[p])
        lev = levels[j]
        r, bits = divmod(p, lev.width)
        c = lev.combos[r]
        rank = sum(1 for v in c if v < i)
        mask = sum(1 << (v - 1) for v in c) | (1 << (i - 1))
        base = levels[j + 1].index[mask] * (lev.width << 1)
        low = bits & ((1 << rank) - 1)
        high = (bits >> rank) << (rank + 1)
        lo_p = base + low + high
        return dt.Node(i, build(j + 1, lo_p, k), build(j + 1, lo_p + (1 << rank), b - k))

    tree = build(0, 0, s)
    w_root = W[0][s][0]
    dist = Fraction(int(w_root), norm(0)) if exact else float(w_root) / norm(0)
    return MemoEntry(tree, dist), DenseStats(visited, visited, max_cand)
