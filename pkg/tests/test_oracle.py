"""Brute-force oracle: reproduces the frozen reference values and agrees
with the vectorised implementations."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
from conftest import const, dictator, maj, parity, tables, trees
from dtproper import funcspace as fs
from dtproper import learner as L
from dtproper import oracle as O
from dtproper import tree as dt


class TestFrozenValues:
    def test_influences(self):
        assert O.influence_by_definition(dictator(1, 3), 1) == frozen.INF_DICTATOR
        assert all(O.influence_by_definition(maj(3), i) == frozen.INF_MAJ3 for i in (1, 2, 3))

    def test_fourier(self):
        for S, v in frozen.FOURIER_MAJ3.items():
            assert O.fourier_coefficient_by_definition(maj(3), S) == v

    def test_bias_mean(self):
        assert O.bias_by_definition(maj(3)) == frozen.BIAS_MAJ3
        assert O.expectation_by_definition(maj(3)) == frozen.MEAN_MAJ3
        assert O.bias_by_definition(dictator(1, 3)) == frozen.BIAS_DICTATOR

    def test_smoothing(self):
        assert O.smooth_by_definition(dictator(1, 2), Fraction(1, 2)) == frozen.SMOOTH_DICTATOR_HALF

    def test_distance(self):
        assert O.dist_by_definition(dictator(1, 2), dictator(2, 2)) == frozen.DIST_X1_X2

    def test_parity_table(self):
        x = list(O._points(2))
        assert [x1 * x2 for x1, x2 in x] == frozen.PARITY2_TABLE

    def test_exhaustive_values(self):
        assert O.exhaustive_best_tree(parity([1, 2], 2), 2, 2, Fraction(1, 10)).dist == frozen.BEST_PARITY_S2
        assert O.exhaustive_best_tree(maj(3), 4, 3, Fraction(1, 10)).dist == frozen.BEST_MAJ3_S4


class TestExhaustive:
    def test_dictator(self):
        res = O.exhaustive_best_tree(dictator(1, 3), 2, 1, 0.1)
        assert res.dist == 0 and res.tree == dt.dictator(1)

    def test_size_one_is_bias(self, rng):
        for _ in range(5):
            f = fs.random_truth_table(3, rng)
            assert O.exhaustive_best_tree(f, 1, 3, Fraction(1, 8)).dist == O.bias_by_definition(f)

    def test_refuses_large(self):
        with pytest.raises(O.InstanceTooLarge):
            O.exhaustive_best_tree(const(1, 5), 2, 2, 0.1)
        with pytest.raises(O.InstanceTooLarge):
            O.exhaustive_best_tree(const(1, 3), 5, 2, 0.1)

    def test_enumeration_counts(self):
        # sizes 1 and 2 over one variable: 2 leaves + 1 var * 2 * 2 labelings
        assert len(O.all_trees(1, 2, 1)) == 6
        ts = O.all_trees(3, 4, 3)
        assert len(ts) == len(set(ts))
        assert all(not dt.repeats_variable(t) and dt.size(t) <= 4 and dt.depth(t) <= 3 for t in ts)

    def test_tau_zero_means_no_filter(self):
        res = O.exhaustive_best_tree(const(1, 2), 2, 2, 0)
        assert res.survivors == res.candidates


class TestCrossValidation:
    @given(tables(n_max=6), st.integers(1, 6))
    def test_influence(self, f, i):
        i = min(i, f.n)
        assert O.influence_by_definition(f, i) == fs.influence_exact(f, i)

    @given(tables(n_max=6), st.integers(0, 2 ** 32 - 1))
    def test_distance_bias_mean(self, f, seed):
        g = fs.random_truth_table(f.n, np.random.default_rng(seed))
        assert O.dist_by_definition(f, g) == fs.dist_exact(f, g)
        assert O.bias_by_definition(f) == fs.bias(f)
        assert O.expectation_by_definition(f) == fs.expectation(f)

    @settings(max_examples=20)
    @given(tables(n_max=5))
    def test_fourier(self, f):
        coef = fs.fourier(f)
        for mask in range(1 << f.n):
            S = [i + 1 for i in range(f.n) if mask >> i & 1]
            assert O.fourier_coefficient_by_definition(f, S) == coef[mask]

    @settings(max_examples=20)
    @given(tables(n_max=5), st.fractions(0, 1, max_denominator=10))
    def test_smoothing(self, f, delta):
        sm = fs.noise_operator(f, delta)
        want = O.smooth_by_definition(f, delta)
        assert [sm.at(j) for j in range(1 << f.n)] == want

    @settings(max_examples=20)
    @given(tables(n_max=4), st.fractions(0, 1, max_denominator=6), st.integers(1, 4))
    def test_influence_real_valued(self, f, delta, i):
        sm = fs.noise_operator(f, delta)
        i = min(i, f.n)
        assert O.influence_by_definition(sm, i) == fs.influence_exact(sm, i)

    @given(trees(n_max=6))
    def test_monotone_checkers_agree(self, nt):
        n, t = nt
        f = fs.TruthTable.from_tree(t, n)
        assert O.is_monotone_by_definition(f) == fs.is_monotone(f)

    def test_monotone_generator(self, rng):
        for _ in range(20):
            t = dt.random_monotone_tree(8, 8, None, rng)
            assert O.is_monotone_by_definition(fs.TruthTable.from_tree(t, 8))


class TestPlanted:
    def test_no_noise(self):
        p = O.planted_noise_target(dt.dictator(1), 6, 0.0, 1)
        assert p.opt_upper == 0 and p.noisy.equals(p.clean)

    def test_full_noise(self):
        p = O.planted_noise_target(dt.dictator(1), 6, 1.0, 1)
        assert p.opt_upper == 1 == fs.dist_exact(p.noisy, p.clean)

    def test_opt_upper_is_exact_distance(self):
        t = dt.random_tree(10, 8, None, np.random.default_rng(3))
        p = O.planted_noise_target(t, 10, 0.1, 4)
        assert p.opt_upper == fs.dist_exact(p.noisy, fs.TruthTable.from_tree(t, 10))

    def test_concentration(self):
        # Bernoulli(0.05) over 2^14 entries: sd ~ 0.0017, well inside 2^-7
        t = dt.random_tree(14, 8, None, np.random.default_rng(0))
        for seed in range(20):
            assert abs(float(O.planted_noise_target(t, 14, 0.05, seed).opt_upper) - 0.05) <= 2 ** -7

    def test_oracle_counts_queries(self):
        p = O.planted_noise_target(dt.dictator(2), 4, 0.2, 0)
        o = p.oracle()
        o.query_index(np.arange(3, dtype=np.uint64))
        assert o.counters.queries == 3


def test_small_table_enumeration():
    assert sum(1 for _ in O.iter_small_tables(2)) == 16
    with pytest.raises(O.InstanceTooLarge):
        next(O.iter_small_tables(4))


def test_dp_matches_exhaustive_spot(rng):
    for _ in range(10):
        f = fs.random_truth_table(3, rng)
        got = L.build_dt(L.ExactEvaluator(f), 3, 2, Fraction(1, 8)).dist
        assert got == O.exhaustive_best_tree(f, 3, 2, Fraction(1, 8)).dist
