"""Functions over the hypercube {-1,+1}^n.

Exact quantities are computed from a :class:`TruthTable`, whose values are
stored as integer numerators over a common denominator so that expectations,
distances and influences come out as exact ``Fraction`` objects.  Tables
with float values (used for smoothed functions at awkward noise rates) give
floats instead.

Inputs are packed integers: bit ``i-1`` of index ``j`` is set iff ``x_i = +1``.
"""
from __future__ import annotations

import enum
import math
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Union

import numpy as np

from . import tree as dt

EXACT_N_DEFAULT = 20
FOURIER_N_MAX = 16
FLOAT_TOL = 1e-12


def exact_limit() -> int:
    """Largest n for which full enumeration is allowed (env ``DTPROPER_EXACT_N``)."""
    return int(os.environ.get("DTPROPER_EXACT_N", EXACT_N_DEFAULT))


class EnumerationError(RuntimeError):
    """Exact (enumeration) mode is unavailable for this object."""


class AccessError(RuntimeError):
    """The oracle's access mode forbids the requested operation."""


class BudgetError(RuntimeError):
    """Not enough samples/examples to meet the requested accuracy."""


class Metric(enum.Enum):
    NOT_EQUAL = "ne"
    ABSOLUTE = "abs"

    def __call__(self, a, b):
        if self is Metric.NOT_EQUAL:
            return 0 if a == b else 1
        return abs(a - b)

    @property
    def spread(self) -> float:
        """Range of the metric on its codomain ({-1,1} or [-1,1])."""
        return 1.0 if self is Metric.NOT_EQUAL else 2.0


def hoeffding_samples(accuracy: float, confidence: float, spread: float = 1.0) -> int:
    """Two-sided Hoeffding sample count for a mean of variables with range ``spread``.

    ``ceil(spread^2 * ln(2/confidence) / (2 accuracy^2))``
    """
    if not (0 < accuracy) or not (0 < confidence < 1):
        raise ValueError("accuracy must be > 0 and confidence in (0, 1)")
    return math.ceil(spread * spread * math.log(2.0 / confidence) / (2.0 * accuracy * accuracy))


# --------------------------------------------------------------------------
# restrictions

@dataclass(frozen=True)
class Restriction:
    """A partial assignment, stored canonically as a (mask, bits) pair.

    ``mask`` has bit ``i-1`` set for each fixed variable ``x_i``; ``bits`` has
    it set when that variable is fixed to +1.
    """
    mask: int = 0
    bits: int = 0

    def __post_init__(self):
        if self.bits & ~self.mask:
            raise ValueError("bits set outside the mask")

    @classmethod
    def of(cls, assignment) -> "Restriction":
        """Build from a mapping or iterable of ``(var, +-1)`` pairs."""
        items = assignment.items() if hasattr(assignment, "items") else assignment
        mask = bits = 0
        for var, val in items:
            var = int(var)
            if var < 1:
                raise ValueError(f"variable index out of range: x{var}")
            if val not in (-1, 1):
                raise ValueError(f"restriction value must be +-1, got {val!r}")
            b = 1 << (var - 1)
            if mask & b:
                prev = 1 if bits & b else -1
                if prev != val:
                    raise ValueError(f"conflicting values for x{var}")
            mask |= b
            if val == 1:
                bits |= b
        return cls(mask, bits)

    def extend(self, var: int, val: int) -> "Restriction":
        b = 1 << (var - 1)
        if self.mask & b:
            raise ValueError(f"x{var} already fixed")
        return Restriction(self.mask | b, self.bits | (b if val == 1 else 0))

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        out = []
        m, i = self.mask, 1
        while m:
            if m & 1:
                out.append((i, 1 if (self.bits >> (i - 1)) & 1 else -1))
            m >>= 1
            i += 1
        return tuple(out)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, var: int) -> bool:
        return bool(self.mask >> (var - 1) & 1)

    def max_var(self) -> int:
        return self.mask.bit_length()

    def check(self, n: int) -> None:
        if self.max_var() > n:
            raise ValueError(f"restriction fixes x{self.max_var()}, out of range for n={n}")

    def apply_index(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.uint64)
        if not self.mask:
            return idx
        return (idx & np.uint64(~self.mask & ((1 << 64) - 1))) | np.uint64(self.bits)

    def consistent_index(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.uint64)
        return (idx & np.uint64(self.mask)) == np.uint64(self.bits)

    def __str__(self):
        return "{" + ", ".join(f"x{i}={v:+d}" for i, v in self.pairs) + "}"


EMPTY = Restriction()


# --------------------------------------------------------------------------
# truth tables

def _fit(arr: np.ndarray) -> np.ndarray:
    """Promote integer arrays to Python ints when int64 arithmetic might overflow."""
    if arr.dtype.kind in "iu" and arr.size and int(np.abs(arr.astype(np.int64)).max()) > (1 << 40):
        return arr.astype(object)
    return arr


@dataclass(eq=False)
class TruthTable:
    """Values ``values[j] / den`` over all 2^n packed points."""
    n: int
    values: np.ndarray
    den: int = 1

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (1 << self.n,):
            raise ValueError(f"table for n={self.n} needs {1 << self.n} entries, got {self.values.shape}")
        if self.values.dtype.kind == "b":
            self.values = np.where(self.values, 1, -1).astype(np.int8)

    @property
    def exact(self) -> bool:
        return self.values.dtype.kind in "iuO"

    @property
    def boolean(self) -> bool:
        if "_boolean" not in self.__dict__:
            self._boolean = (self.exact and self.den == 1
                             and bool(np.all((self.values == 1) | (self.values == -1))))
        return self._boolean

    @classmethod
    def from_tree(cls, tree: dt.Tree, n: int) -> "TruthTable":
        return cls(n, dt.tree_table(tree, n))

    @classmethod
    def from_function(cls, fn: Callable, n: int) -> "TruthTable":
        """Tabulate ``fn`` applied to +-1 tuples."""
        vals = [fn(index_to_point(j, n)) for j in range(1 << n)]
        return cls(n, np.array(vals, dtype=np.int8))

    def ratio(self, total, count: int):
        """``total / (den * count)`` as Fraction (exact tables) or float."""
        if self.exact:
            return Fraction(int(total), self.den * count)
        return float(total) / (self.den * count)

    def at(self, j: int):
        return self.ratio(self.values[j], 1)

    def __call__(self, x):
        return self.at(point_to_index(x))

    def cube(self) -> np.ndarray:
        """Values reshaped to ``(2,)*n``; variable ``x_i`` lives on axis ``n - i``."""
        return self.values.reshape((2,) * self.n) if self.n else self.values.reshape(())

    def restrict(self, pi: Restriction) -> "TruthTable":
        pi.check(self.n)
        idx = pi.apply_index(np.arange(1 << self.n, dtype=np.uint64))
        return TruthTable(self.n, self.values[idx], self.den)

    def negate(self) -> "TruthTable":
        return TruthTable(self.n, -self.values, self.den)

    def as_float(self) -> "TruthTable":
        return TruthTable(self.n, self.values.astype(np.float64) / self.den)

    def equals(self, other: "TruthTable") -> bool:
        if self.n != other.n:
            return False
        if self.exact and other.exact:
            a = _fit(np.asarray(self.values, dtype=object) * other.den)
            b = _fit(np.asarray(other.values, dtype=object) * self.den)
            return bool(np.all(a == b))
        return bool(np.allclose(self.as_float().values, other.as_float().values, atol=FLOAT_TOL, rtol=0))

    # text format ----------------------------------------------------------
    def to_text(self, width: int = 64) -> str:
        if not self.boolean:
            raise ValueError("only +-1 tables have a text form")
        chars = "".join("1" if v == 1 else "0" for v in self.values.tolist())
        lines = [chars[k:k + width] for k in range(0, len(chars), width)] or [""]
        return f"n={self.n}\n" + "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TruthTable":
        lines = text.strip().splitlines()
        if not lines or not lines[0].strip().startswith("n="):
            raise ValueError("truth-table file must start with 'n=<k>'")
        try:
            n = int(lines[0].strip()[2:])
        except ValueError:
            raise ValueError(f"bad header {lines[0]!r}") from None
        body = "".join("".join(line.split()) for line in lines[1:])
        if len(body) != 1 << n:
            raise ValueError(f"expected {1 << n} table characters, got {len(body)}")
        if set(body) - {"0", "1"}:
            raise ValueError("table characters must be 0 or 1")
        arr = np.frombuffer(body.encode(), dtype=np.uint8) - ord("0")
        return cls(n, np.where(arr == 1, 1, -1).astype(np.int8))


def point_to_index(x) -> int:
    j = 0
    for k, v in enumerate(x):
        if v not in (-1, 1):
            raise ValueError(f"coordinate must be +-1, got {v!r}")
        if v == 1:
            j |= 1 << k
    return j


def index_to_point(j: int, n: int) -> tuple[int, ...]:
    return tuple(1 if (j >> k) & 1 else -1 for k in range(n))


def index_to_points(idx: np.ndarray, n: int) -> np.ndarray:
    """``(m, n)`` int8 matrix of +-1 coordinates."""
    idx = np.asarray(idx, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)
    return (2 * bits.astype(np.int8) - 1).astype(np.int8)


def random_truth_table(n: int, rng: np.random.Generator) -> TruthTable:
    return TruthTable(n, rng.choice(np.array([-1, 1], dtype=np.int8), size=1 << n))


def is_monotone(f) -> bool:
    """Check f(x) <= f(y) along every hypercube edge x -> y (x_i: -1 -> +1)."""
    t = as_table(f)
    v = t.values
    idx = np.arange(1 << t.n)
    for i in range(t.n):
        lo = idx[(idx >> i) & 1 == 0]
        if np.any(v[lo] > v[lo | (1 << i)]):
            return False
    return True


# --------------------------------------------------------------------------
# oracles

class Access(enum.Enum):
    TRUTH_TABLE = "truth-table"
    MEMBERSHIP = "membership-query"
    RANDOM_EXAMPLE = "random-example"


@dataclass
class Counters:
    queries: int = 0
    examples: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, queries: int = 0, examples: int = 0) -> None:
        with self._lock:
            self.queries += queries
            self.examples += examples


class FunctionOracle:
    """Access to f: {-1,1}^n -> {-1,1} through a chosen access mode.

    Point queries increment ``counters.queries``; :meth:`sample` increments
    ``counters.examples``.  In random-example mode point queries and
    enumeration raise :class:`AccessError`.
    """

    def __init__(self, n: int, evaluator: Callable[[np.ndarray], np.ndarray],
                 access: Access = Access.MEMBERSHIP, table: TruthTable | None = None,
                 counters: Counters | None = None):
        if n > 63:
            raise ValueError("packed indices support n <= 63")
        if access is Access.TRUTH_TABLE and n > exact_limit():
            raise EnumerationError(f"truth-table mode needs n <= {exact_limit()}, got n={n}")
        self.n = n
        self.access = access
        self._eval = evaluator
        self._table = table
        self.counters = counters if counters is not None else Counters()

    @classmethod
    def from_table(cls, table: TruthTable, access: Access = Access.TRUTH_TABLE) -> "FunctionOracle":
        vals = table.values
        return cls(table.n, lambda idx: vals[np.asarray(idx, dtype=np.int64)], access, table)

    @classmethod
    def from_tree(cls, tree: dt.Tree, n: int, access: Access = Access.MEMBERSHIP) -> "FunctionOracle":
        dt.validate(tree, n)
        if n <= min(exact_limit(), 22):
            # a lookup table is just a faster evaluator; counting is unchanged
            return cls.from_table(TruthTable.from_tree(tree, n), access)
        return cls(n, lambda idx: dt.evaluate_index(tree, idx), access)

    def with_access(self, access: Access, share_counters: bool = False) -> "FunctionOracle":
        return FunctionOracle(self.n, self._eval, access, self._table,
                              self.counters if share_counters else None)

    def examples_only(self) -> "FunctionOracle":
        """A random-example view sharing this oracle's counters."""
        return self.with_access(Access.RANDOM_EXAMPLE, share_counters=True)

    # point access -------------------------------------------------------
    def _check_queries(self):
        if self.access is Access.RANDOM_EXAMPLE:
            raise AccessError("random-example oracle refuses point queries")

    def query_index(self, idx) -> np.ndarray:
        self._check_queries()
        idx = np.asarray(idx, dtype=np.uint64)
        self.counters.add(queries=int(idx.size))
        return self._eval(idx)

    def query(self, x) -> int:
        if len(x) != self.n:
            raise ValueError(f"point has {len(x)} coordinates, expected {self.n}")
        return int(self.query_index(np.array([point_to_index(x)], dtype=np.uint64))[0])

    __call__ = query

    def sample(self, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """``m`` uniform labelled examples ``(idx, labels)``."""
        idx = uniform_indices(self.n, m, rng)
        self.counters.add(examples=m)
        return idx, self._eval(idx)

    def table(self) -> TruthTable:
        """Full truth table; a membership oracle pays 2^n queries for it."""
        self._check_queries()
        if self.n > exact_limit():
            raise EnumerationError(f"enumeration needs n <= {exact_limit()}, got n={self.n}")
        if self.access is Access.MEMBERSHIP:
            self.counters.add(queries=1 << self.n)
        if self._table is None:
            self._table = TruthTable(self.n, self._eval(np.arange(1 << self.n, dtype=np.uint64)))
        return self._table

    def restrict(self, pi: Restriction) -> "FunctionOracle":
        pi.check(self.n)
        base = self._eval
        table = self._table.restrict(pi) if self._table is not None else None
        return FunctionOracle(self.n, lambda idx: base(pi.apply_index(idx)),
                              self.access, table, self.counters)


def uniform_indices(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.zeros(m, dtype=np.uint64)
    return rng.integers(0, 1 << n, size=m, dtype=np.uint64)


# --------------------------------------------------------------------------
# smoothing

def _as_delta(delta) -> Union[Fraction, float]:
    if isinstance(delta, (Fraction, int)):
        d = Fraction(delta)
    elif isinstance(delta, str):
        d = Fraction(delta)
    else:
        d = float(delta)
    if not 0 <= d <= 1:
        raise ValueError(f"noise rate must lie in [0, 1], got {delta}")
    return d


class SmoothedFunction:
    """The delta-smoothed view f_delta(x) = E[f(x~)], each bit flipped w.p. delta/2.

    ``strategy="exact"`` tabulates f_delta by damping Fourier coefficients
    (exact rationals when ``delta`` is a Fraction, floats otherwise).
    ``strategy="mc"`` averages queries to the base oracle at resampled
    neighbours, with a Hoeffding-sized sample per point.  An optional
    restriction is applied *after* smoothing, giving (f_delta)_pi.
    """

    def __init__(self, base, delta, strategy: str = "exact", accuracy: float = 0.05,
                 confidence: float = 0.01, seed: int = 0, pi: Restriction = EMPTY):
        if strategy not in ("exact", "mc"):
            raise ValueError(f"unknown smoothing strategy {strategy!r}")
        self.base = base
        self.delta = _as_delta(delta)
        self.strategy = strategy
        self.accuracy = accuracy
        self.confidence = confidence
        self.seed = seed
        self.pi = pi
        self.n = base.n
        self._full = None
        self._rng = np.random.default_rng(seed)

    def restrict(self, pi: Restriction) -> "SmoothedFunction":
        pi.check(self.n)
        merged = Restriction.of(self.pi.pairs + pi.pairs)
        out = SmoothedFunction(self.base, self.delta, self.strategy, self.accuracy,
                               self.confidence, self.seed, merged)
        out._full = self._full
        return out

    @property
    def samples_per_point(self) -> int:
        return hoeffding_samples(self.accuracy, self.confidence, spread=2.0)

    def table(self) -> TruthTable:
        if self.strategy != "exact":
            raise EnumerationError("monte-carlo smoothing has no exact table")
        full = self.full_table()
        return full.restrict(self.pi) if self.pi.mask else full

    def full_table(self) -> TruthTable:
        """Table of f_delta ignoring the restriction."""
        if self.strategy != "exact":
            raise EnumerationError("monte-carlo smoothing has no exact table")
        if self._full is None:
            base = as_table(self.base)
            if base.n > FOURIER_N_MAX and not isinstance(self.delta, float):
                raise EnumerationError(f"exact rational smoothing supports n <= {FOURIER_N_MAX}")
            self._full = noise_operator(base, self.delta)
        return self._full

    def values_index(self, idx: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        """Values at packed points (floats; exact tables are converted)."""
        idx = self.pi.apply_index(np.asarray(idx, dtype=np.uint64))
        if self.strategy == "exact":
            t = self.full_table()
            return t.values[idx.astype(np.int64)].astype(np.float64) / t.den
        rng = rng if rng is not None else self._rng
        m = self.samples_per_point
        p = float(self.delta) / 2.0
        flips = np.zeros((idx.size, m), dtype=np.uint64)
        for i in range(self.n):
            hit = rng.random((idx.size, m)) < p
            flips |= hit.astype(np.uint64) << np.uint64(i)
        noisy = (idx[:, None] ^ flips).ravel()
        vals = _point_eval(self.base, noisy).reshape(idx.size, m)
        return vals.mean(axis=1)

    def value(self, x):
        j = point_to_index(x)
        if self.strategy == "exact":
            return self.table().at(j)
        return float(self.values_index(np.array([j], dtype=np.uint64))[0])

    __call__ = value


def smooth(f, delta, strategy: str = "exact", **kw) -> SmoothedFunction:
    return SmoothedFunction(f, delta, strategy, **kw)


def smooth_eval(sf: SmoothedFunction, x):
    return sf.value(x)


# --------------------------------------------------------------------------
# conversions

def as_table(f, n: int | None = None) -> TruthTable:
    """Exact table of a table/oracle/smoothed function/tree."""
    if isinstance(f, TruthTable):
        return f
    if isinstance(f, (FunctionOracle, SmoothedFunction)):
        return f.table()
    if isinstance(f, (dt.Leaf, dt.Node)):
        if n is None:
            raise ValueError("a tree needs an explicit dimension")
        return TruthTable.from_tree(f, n)
    raise TypeError(f"cannot tabulate {type(f).__name__}")


def _dim(*fs) -> int | None:
    for f in fs:
        n = getattr(f, "n", None)
        if n is not None:
            return n
    return None


def _point_eval(f, idx: np.ndarray, n: int | None = None,
                rng: np.random.Generator | None = None) -> np.ndarray:
    if isinstance(f, FunctionOracle):
        return f.query_index(idx)
    if isinstance(f, SmoothedFunction):
        return f.values_index(idx, rng)
    if isinstance(f, TruthTable):
        return f.values[idx.astype(np.int64)] / f.den
    if isinstance(f, (dt.Leaf, dt.Node)):
        return dt.evaluate_index(f, idx)
    if callable(f):
        return np.array([f(index_to_point(int(j), n)) for j in idx])
    raise TypeError(f"cannot evaluate {type(f).__name__}")


def _default_metric(a: TruthTable, b: TruthTable | None = None) -> Metric:
    if a.boolean and (b is None or b.boolean):
        return Metric.NOT_EQUAL
    return Metric.ABSOLUTE


# --------------------------------------------------------------------------
# exact statistics

def expectation(f):
    t = as_table(f)
    return t.ratio(t.values.sum(), 1 << t.n)


def variance(f):
    t = as_table(f)
    sq = _fit(t.values.astype(object) if t.exact else t.values)
    second = (Fraction(int((sq * sq).sum()), t.den * t.den * (1 << t.n)) if t.exact
              else float((sq * sq).sum()) / (t.den * t.den * (1 << t.n)))
    mean = expectation(t)
    return second - mean * mean


def bias(f):
    """min over b in {-1,1} of Pr[f(x) != b] for +-1 valued f."""
    t = as_table(f)
    if not t.boolean:
        raise ValueError("bias is defined for +-1 valued functions")
    ones = int((t.values == 1).sum())
    return Fraction(min(ones, (1 << t.n) - ones), 1 << t.n)


def dist_exact(f, g, metric: Metric | None = None):
    """E_x[rho(f(x), g(x))] by enumeration."""
    n = _dim(f, g)
    a, b = as_table(f, n), as_table(g, n)
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    metric = metric or _default_metric(a, b)
    N = 1 << a.n
    if metric is Metric.NOT_EQUAL:
        if not (a.boolean and b.boolean):
            raise ValueError("not-equals metric needs +-1 valued functions")
        return Fraction(int((a.values != b.values).sum()), N)
    if a.exact and b.exact:
        if a.den == b.den:
            x, y, den = _int_values(a), _int_values(b), a.den
        else:
            x = a.values.astype(object) * b.den
            y = b.values.astype(object) * a.den
            den = a.den * b.den
        return Fraction(int(np.abs(x - y).sum()), den * N)
    return float(np.abs(a.as_float().values - b.as_float().values).sum()) / N


def _int_values(t: TruthTable) -> np.ndarray:
    return t.values if t.values.dtype.kind == "O" else _fit(t.values.astype(np.int64))


def _flip(values: np.ndarray, n: int, i: int) -> np.ndarray:
    idx = np.arange(1 << n) ^ (1 << (i - 1))
    return values[idx]


def influence_exact(f, i: int, metric: Metric | None = None):
    """Inf_i(f) = E[rho(f(x), f(x^i))] with coordinate i rerandomised.

    Computed as half the expectation under a hard flip of coordinate i.
    """
    t = as_table(f)
    if not 1 <= i <= t.n:
        raise ValueError(f"variable index {i} out of range for n={t.n}")
    metric = metric or _default_metric(t)
    N = 1 << t.n
    other = _flip(t.values, t.n, i)
    if metric is Metric.NOT_EQUAL:
        if not t.boolean:
            raise ValueError("not-equals metric needs a +-1 valued function")
        return Fraction(int((t.values != other).sum()), 2 * N)
    if t.exact:
        v = _int_values(t)
        o = _flip(v, t.n, i)
        return Fraction(int(np.abs(v - o).sum()), 2 * N * t.den)
    return float(np.abs(t.values - other).sum()) / (2 * N * t.den)


def influences_exact(f, metric: Metric | None = None) -> list:
    t = as_table(f)
    return [influence_exact(t, i, metric) for i in range(1, t.n + 1)]


def restrict(f, pi: Restriction):
    """f_pi: f with pi's coordinates overridden (same dimension)."""
    if isinstance(pi, dict):
        pi = Restriction.of(pi)
    if isinstance(f, (TruthTable, FunctionOracle, SmoothedFunction)):
        return f.restrict(pi)
    raise TypeError(f"cannot restrict {type(f).__name__}")


# --------------------------------------------------------------------------
# Fourier

def _wht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, sum_j a[j] (-1)^{popcount(j & k)}."""
    a = a.copy()
    N = a.size
    h = 1
    while h < N:
        a = a.reshape(-1, 2, h)
        x, y = a[:, 0, :].copy(), a[:, 1, :].copy()
        a[:, 0, :] = x + y
        a[:, 1, :] = x - y
        a = a.reshape(N)
        h *= 2
    return a


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        pc += (idx >> k) & 1
    return pc


def subset_mask(S) -> int:
    return reduce(lambda m, i: m | (1 << (i - 1)), S, 0)


def fourier(f) -> np.ndarray:
    """Coefficients f^(S) = E[f(x) prod_{i in S} x_i], indexed by subset mask.

    Exact tables give an object array of Fractions; float tables give floats.
    """
    t = as_table(f)
    if t.n > FOURIER_N_MAX:
        raise EnumerationError(f"full Fourier table supports n <= {FOURIER_N_MAX}")
    N = 1 << t.n
    sign = np.where(_popcounts(t.n) % 2 == 1, -1, 1)
    if t.exact:
        w = _wht(t.values.astype(object))
        return np.array([Fraction(int(c) * int(s), t.den * N) for c, s in zip(w, sign)], dtype=object)
    return _wht(t.values.astype(np.float64)) * sign / (t.den * N)


def noise_operator(f, delta) -> TruthTable:
    """Table of f_delta via Fourier damping f^(S) -> (1-delta)^{|S|} f^(S)."""
    t = as_table(f)
    delta = _as_delta(delta)
    n, N = t.n, 1 << t.n
    pc = _popcounts(n)
    if isinstance(delta, Fraction) and t.exact:
        p, q = delta.numerator, delta.denominator
        w = _wht(t.values.astype(object))
        up = [(q - p) ** k * q ** (n - k) for k in range(n + 1)]
        damped = np.array([int(c) * up[k] for c, k in zip(w, pc)], dtype=object)
        num = _wht(damped)
        den = t.den * N * q ** n
        g = reduce(math.gcd, (int(v) for v in num), den)
        num = np.array([int(v) // g for v in num], dtype=object)
        if max(abs(int(v)) for v in num) < (1 << 40):
            num = num.astype(np.int64)
        return TruthTable(n, num, den // g)
    rho = 1.0 - float(delta)
    w = _wht(t.values.astype(np.float64) / t.den)
    return TruthTable(n, _wht(w * rho ** pc) / N)


def total_squared_influence_fourier(f, delta):
    """2 * sum_S |S| (1-delta)^{2|S|} f^(S)^2, the total squared influence of f_delta."""
    coeffs = fourier(f)
    pc = _popcounts(as_table(f).n)
    delta = _as_delta(delta)
    rho = 1 - delta
    if isinstance(delta, Fraction) and coeffs.dtype == object:
        return 2 * sum((int(k) * rho ** (2 * int(k)) * c * c for c, k in zip(coeffs, pc)), Fraction(0))
    return 2.0 * float(sum(int(k) * float(rho) ** (2 * int(k)) * float(c) ** 2 for c, k in zip(coeffs, pc)))


def total_squared_influence_direct(f):
    """sum_i E[(f(x) - f(x^{~i}))^2] by enumeration (coordinate i rerandomised)."""
    t = as_table(f)
    N = 1 << t.n
    total = 0
    for i in range(1, t.n + 1):
        d = (t.values.astype(object) - _flip(t.values, t.n, i).astype(object)) if t.exact \
            else t.values - _flip(t.values, t.n, i)
        total += (d * d).sum()
    if t.exact:
        return Fraction(int(total), 2 * N * t.den * t.den)
    return float(total) / (2 * N * t.den * t.den)


# --------------------------------------------------------------------------
# sampled estimators

def dist_est(f, g, accuracy: float, confidence: float, rng: np.random.Generator,
             metric: Metric = Metric.NOT_EQUAL) -> float:
    """Monte-Carlo distance with ``hoeffding_samples(accuracy, confidence, metric.spread)`` points."""
    n = _dim(f, g)
    m = hoeffding_samples(accuracy, confidence, metric.spread)
    idx = uniform_indices(n, m, rng)
    a = np.asarray(_point_eval(f, idx, n), dtype=np.float64)
    b = np.asarray(_point_eval(g, idx, n), dtype=np.float64)
    if metric is Metric.NOT_EQUAL:
        return float(np.mean(a != b))
    return float(np.mean(np.abs(a - b)))


def influence_est_all(f, free: list[int], accuracy: float, confidence: float,
                      rng: np.random.Generator, metric: Metric = Metric.NOT_EQUAL,
                      pi: Restriction = EMPTY) -> dict[int, float]:
    """Estimates of Inf_i(f_pi) for every i in ``free`` from one shared point sample.

    Each estimate individually uses ``hoeffding_samples(accuracy, confidence)``
    query pairs (x, x with bit i flipped); the halved flip discrepancy lies in [0, 1].
    """
    n = f.n
    m = hoeffding_samples(accuracy, confidence)
    x = pi.apply_index(uniform_indices(n, m, rng))
    base = np.asarray(_point_eval(f, x, rng=rng), dtype=np.float64)
    out = {}
    for i in free:
        y = pi.apply_index(x ^ np.uint64(1 << (i - 1)))
        other = np.asarray(_point_eval(f, y, rng=rng), dtype=np.float64)
        if metric is Metric.NOT_EQUAL:
            out[i] = 0.5 * float(np.mean(base != other))
        else:
            out[i] = 0.5 * float(np.mean(np.abs(base - other)))
    return out


def influence_est(f, i: int, accuracy: float, confidence: float, rng: np.random.Generator,
                  metric: Metric = Metric.NOT_EQUAL) -> float:
    """Monte-Carlo estimate of Inf_i(f) to within ``accuracy`` w.p. >= 1 - ``confidence``."""
    if not 1 <= i <= f.n:
        raise ValueError(f"variable index {i} out of range for n={f.n}")
    return influence_est_all(f, [i], accuracy, confidence, rng, metric)[i]


class ExampleSet:
    """A finite stream of uniform labelled examples, consumed up front.

    For n within the enumeration limit the stream is compressed to per-point
    counts and label sums; every statistic is identical to the raw sample mean.
    """

    def __init__(self, n: int, points: np.ndarray, label_sum: np.ndarray, count: int):
        self.n = n
        self.points = points
        self.label_sum = label_sum.astype(np.float64)
        self.count = count
        self._coords = None

    @classmethod
    def draw(cls, oracle: FunctionOracle, m: int, rng: np.random.Generator,
             chunk: int = 1 << 21) -> "ExampleSet":
        n = oracle.n
        if n <= min(exact_limit(), 22):
            counts = np.zeros(1 << n, dtype=np.int64)
            sums = np.zeros(1 << n, dtype=np.int64)
            left = m
            while left > 0:
                k = min(chunk, left)
                idx, lab = oracle.sample(k, rng)
                ii = idx.astype(np.int64)
                counts += np.bincount(ii, minlength=1 << n)
                sums += np.bincount(ii, weights=lab.astype(np.float64), minlength=1 << n).astype(np.int64)
                left -= k
            seen = np.nonzero(counts)[0]
            return cls(n, seen.astype(np.uint64), sums[seen], m)
        idx, lab = oracle.sample(m, rng)
        return cls(n, idx, lab.astype(np.float64), m)

    @property
    def coords(self) -> np.ndarray:
        if self._coords is None:
            self._coords = index_to_points(self.points, self.n).astype(np.float64)
        return self._coords

    def correlations(self, pi: Restriction) -> tuple[float, np.ndarray]:
        """(E[y 1[x ~ pi]], E[y x_i 1[x ~ pi]] for all i) as sample means."""
        cons = pi.consistent_index(self.points)
        ls = self.label_sum[cons]
        return float(ls.sum()) / self.count, (ls @ self.coords[cons]) / self.count


def mono_required_examples(depth: int, accuracy: float, confidence: float) -> int:
    """Examples needed to estimate 2^{|pi|-1} E[f x_i 1[x ~ pi]] to +-accuracy with |pi| = depth."""
    return hoeffding_samples(accuracy, confidence, spread=float(2 ** depth))


def influence_mono_est(examples: ExampleSet, pi: Restriction, i: int, accuracy: float,
                       confidence: float) -> float:
    """Inf_i(f_pi) for monotone f from random examples only: 2^{|pi|-1} E[f(x) x_i 1[x ~ pi]]."""
    if i in pi:
        raise ValueError(f"x{i} is fixed by the restriction")
    need = mono_required_examples(len(pi), accuracy, confidence)
    if examples.count < need:
        raise BudgetError(f"need {need} examples for |pi|={len(pi)}, have {examples.count}")
    _, corr = examples.correlations(pi)
    return float(2.0 ** (len(pi) - 1) * corr[i - 1])
