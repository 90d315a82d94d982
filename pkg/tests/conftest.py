import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dtproper import funcspace as fs
from dtproper import tree as dt

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def maj(k: int, n: int | None = None) -> fs.TruthTable:
    n = k if n is None else n
    return fs.TruthTable.from_function(lambda x: 1 if sum(x[:k]) > 0 else -1, n)


def parity(vars_, n: int) -> fs.TruthTable:
    return fs.TruthTable.from_tree(dt.parity_tree(list(vars_)), n)


def dictator(i: int, n: int) -> fs.TruthTable:
    return fs.TruthTable.from_tree(dt.dictator(i), n)


def const(b: int, n: int) -> fs.TruthTable:
    return fs.TruthTable(n, np.full(1 << n, b, dtype=np.int8))


@st.composite
def trees(draw, n_max=8, s_max=16):
    n = draw(st.integers(1, n_max))
    s = draw(st.integers(1, min(s_max, 1 << n)))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return n, dt.random_tree(n, s, None, np.random.default_rng(seed))


@st.composite
def tables(draw, n_min=1, n_max=6):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return fs.random_truth_table(n, np.random.default_rng(seed))


deltas = st.fractions(min_value=0, max_value=1, max_denominator=12)
taus = st.sampled_from([Fraction(1, 2 ** k) for k in range(1, 8)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --------------------------------------------------------------------------
# acceptance reporting: one line per criterion, echoed in the terminal summary

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
