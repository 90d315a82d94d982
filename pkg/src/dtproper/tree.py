"""Decision trees over {-1,+1}^n.

Trees are immutable: a tree is either a ``Leaf`` holding a label in {-1, +1}
or a ``Node`` querying a 1-based variable index, with ``lo`` followed when
the variable is -1 and ``hi`` when it is +1.

Points are either +-1 vectors or packed integer indices in which bit ``i-1``
is set exactly when ``x_i = +1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np


@dataclass(frozen=True)
class Leaf:
    value: int

    def __post_init__(self):
        if self.value not in (-1, 1):
            raise ValueError(f"leaf label must be +-1, got {self.value!r}")


@dataclass(frozen=True)
class Node:
    var: int
    lo: "Tree"
    hi: "Tree"

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")


Tree = Union[Leaf, Node]


class InfeasibleTreeError(ValueError):
    """Requested (size, depth) combination cannot be realised."""


class TreeParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# --------------------------------------------------------------------------
# evaluation

def evaluate(tree: Tree, x, n: int | None = None) -> int:
    """Label of the leaf reached by the +-1 point ``x``."""
    x = tuple(int(v) for v in x)
    if n is not None and len(x) != n:
        raise ValueError(f"point has {len(x)} coordinates, expected {n}")
    node = tree
    while isinstance(node, Node):
        if node.var > len(x):
            raise ValueError(f"tree queries x{node.var} but point has dimension {len(x)}")
        node = node.hi if x[node.var - 1] > 0 else node.lo
    return node.value


def evaluate_index(tree: Tree, idx: np.ndarray) -> np.ndarray:
    """Vectorised evaluation on packed indices; returns an int8 array of +-1."""
    idx = np.asarray(idx, dtype=np.uint64)
    out = np.empty(idx.shape, dtype=np.int8)

    def walk(node, sel):
        if sel.size == 0:
            return
        if isinstance(node, Leaf):
            out[sel] = node.value
            return
        bit = (flat[sel] >> np.uint64(node.var - 1)) & np.uint64(1)
        on = bit.astype(bool)
        walk(node.lo, sel[~on])
        walk(node.hi, sel[on])

    flat = idx.ravel()
    out = out.ravel()

    walk(tree, np.arange(flat.size))
    return out.reshape(idx.shape)


def tree_table(tree: Tree, n: int) -> np.ndarray:
    """Full truth table (length 2^n, x_1 least significant)."""
    validate(tree, n)
    return evaluate_index(tree, np.arange(1 << n, dtype=np.uint64))


# --------------------------------------------------------------------------
# structure

def size(tree: Tree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return size(tree.lo) + size(tree.hi)


def depth(tree: Tree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.lo), depth(tree.hi))


def leaves(tree: Tree, path: tuple = ()) -> Iterator[tuple[tuple[tuple[int, int], ...], int]]:
    """Yield ``(path, label)`` per leaf, path being ``((var, +-1), ...)`` from the root."""
    if isinstance(tree, Leaf):
        yield path, tree.value
        return
    yield from leaves(tree.lo, path + ((tree.var, -1),))
    yield from leaves(tree.hi, path + ((tree.var, 1),))


def avg_depth(tree: Tree) -> Fraction:
    """Expected depth of the leaf reached by a uniform input, as an exact dyadic rational."""
    return sum((Fraction(len(p), 1 << len(p)) for p, _ in leaves(tree)), Fraction(0))


def variables(tree: Tree) -> set[int]:
    if isinstance(tree, Leaf):
        return set()
    return {tree.var} | variables(tree.lo) | variables(tree.hi)


def repeats_variable(tree: Tree) -> bool:
    """True if some root-to-leaf path queries a variable twice."""
    def walk(node, seen):
        if isinstance(node, Leaf):
            return False
        if node.var in seen:
            return True
        seen = seen | {node.var}
        return walk(node.lo, seen) or walk(node.hi, seen)
    return walk(tree, frozenset())


def validate(tree: Tree, n: int) -> None:
    bad = [v for v in variables(tree) if v > n]
    if bad:
        raise ValueError(f"variable index x{max(bad)} out of range for n={n}")


def truncate(tree: Tree, d: int) -> Tree:
    """Cut every path at depth ``d``; new leaves are labelled +1."""
    if d < 0:
        raise ValueError("truncation depth must be >= 0")
    if isinstance(tree, Leaf):
        return tree
    if d == 0:
        return Leaf(1)
    return Node(tree.var, truncate(tree.lo, d - 1), truncate(tree.hi, d - 1))


# --------------------------------------------------------------------------
# generation

def random_tree(n: int, s: int, depth_cap: int | None, rng: np.random.Generator) -> Tree:
    """A random tree with exactly ``s`` leaves, depth <= ``depth_cap``, uniform labels.

    No variable is repeated on any root-to-leaf path.
    """
    if depth_cap is None:
        depth_cap = min(n, max(s - 1, 0))
    if s < 1 or depth_cap < 0 or s > 2 ** min(depth_cap, n):
        raise InfeasibleTreeError(f"no tree of size {s} with depth <= {depth_cap} over n={n}")

    def grow(s, budget, free):
        if s == 1:
            return Leaf(int(rng.choice((-1, 1))))
        half = 1 << (budget - 1)
        k = int(rng.integers(max(1, s - half), min(s - 1, half) + 1))
        var = int(rng.choice(free))
        rest = [v for v in free if v != var]
        return Node(var, grow(k, budget - 1, rest), grow(s - k, budget - 1, rest))

    return grow(s, min(depth_cap, n), list(range(1, n + 1)))


def _tree_from_table(table: np.ndarray, order: list[int]) -> Tree:
    # table indexed by bits of `order` (order[0] least significant); equal halves collapse
    if table.min() == table.max():
        return Leaf(int(table[0]))
    var, rest = order[-1], order[:-1]
    half = table.size // 2
    lo = _tree_from_table(table[:half], rest)
    hi = _tree_from_table(table[half:], rest)
    return lo if lo == hi else Node(var, lo, hi)


def random_monotone_tree(n: int, s: int, depth_cap: int | None, rng: np.random.Generator,
                         max_tries: int = 10_000) -> Tree:
    """A random monotone function of size <= ``s`` and depth <= ``depth_cap``, as a tree.

    Draws a random monotone DNF over a handful of variables and expands it by
    Shannon decomposition, rejecting expansions that are too large.
    """
    if depth_cap is None:
        depth_cap = min(n, max(s - 1, 0))
    if s < 1:
        raise InfeasibleTreeError("size must be >= 1")
    kmax = min(n, depth_cap, max(1, s.bit_length()))
    for _ in range(max_tries):
        if s == 1 or kmax == 0:
            return Leaf(int(rng.choice((-1, 1))))
        k = int(rng.integers(1, kmax + 1))
        rel = [int(v) for v in rng.choice(np.arange(1, n + 1), size=k, replace=False)]
        nterms = int(rng.integers(1, k + 1))
        terms = [int(rng.integers(1, 1 << k)) for _ in range(nterms)]
        pts = np.arange(1 << k)
        table = np.where(np.any([(pts & t) == t for t in terms], axis=0), 1, -1).astype(np.int8)
        tree = _tree_from_table(table, rel)
        if size(tree) <= s and depth(tree) <= depth_cap:
            return tree
    raise InfeasibleTreeError(f"could not draw a monotone tree of size <= {s}")


# --------------------------------------------------------------------------
# text format

def serialize(tree: Tree) -> str:
    if isinstance(tree, Leaf):
        return "(leaf +1)" if tree.value == 1 else "(leaf -1)"
    return f"(x{tree.var} {serialize(tree.lo)} {serialize(tree.hi)})"


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse(text: str, n: int | None = None) -> Tree:
    """Parse the s-expression format produced by :func:`serialize`."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise TreeParseError("unexpected character", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    if not tokens:
        raise TreeParseError("empty input", 0)

    i = 0

    def expect(tok):
        nonlocal i
        if i >= len(tokens):
            raise TreeParseError(f"expected {tok!r}, got end of input", len(text))
        got, where = tokens[i]
        if got != tok:
            raise TreeParseError(f"expected {tok!r}, got {got!r}", where)
        i += 1

    def node():
        nonlocal i
        expect("(")
        if i >= len(tokens):
            raise TreeParseError("unexpected end of input", len(text))
        head, where = tokens[i]
        i += 1
        if head == "leaf":
            if i >= len(tokens):
                raise TreeParseError("missing leaf label", len(text))
            lab, lwhere = tokens[i]
            if lab not in ("+1", "-1", "1"):
                raise TreeParseError(f"bad leaf label {lab!r}", lwhere)
            i += 1
            expect(")")
            return Leaf(-1 if lab == "-1" else 1)
        m = re.fullmatch(r"x(\d+)", head)
        if m is None:
            raise TreeParseError(f"unknown head {head!r}", where)
        var = int(m.group(1))
        if var < 1 or (n is not None and var > n):
            raise TreeParseError(f"variable index out of range: x{var}", where)
        lo = node()
        hi = node()
        expect(")")
        return Node(var, lo, hi)

    tree = node()
    if i != len(tokens):
        raise TreeParseError("trailing input", tokens[i][1])
    return tree


# handy constructors used across tests and the CLI

def dictator(i: int) -> Tree:
    return Node(i, Leaf(-1), Leaf(1))


def parity_tree(vars_: list[int]) -> Tree:
    """Tree computing prod_{i in vars_} x_i."""
    def build(rest, sign):
        if not rest:
            return Leaf(sign)
        return Node(rest[0], build(rest[1:], -sign), build(rest[1:], sign))
    return build(list(vars_), 1)


def complete_tree(vars_: list[int], labels: list[int]) -> Tree:
    """Complete tree querying ``vars_`` in order; leaves labelled left to right."""
    it = iter(labels)

    def build(rest):
        if not rest:
            return Leaf(next(it))
        return Node(rest[0], build(rest[1:]), build(rest[1:]))
    return build(list(vars_))
