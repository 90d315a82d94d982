import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
from conftest import const, deltas, dictator, maj, parity, tables, trees
from dtproper import funcspace as fs
from dtproper import tree as dt
from dtproper.funcspace import Metric, Restriction


# --------------------------------------------------------------------------
# basics

class TestMetric:
    def test_values(self):
        assert Metric.NOT_EQUAL(1, -1) == 1 and Metric.NOT_EQUAL(1, 1) == 0
        assert Metric.ABSOLUTE(Fraction(1, 2), -1) == Fraction(3, 2)

    @given(st.lists(st.fractions(-1, 1, max_denominator=20), min_size=3, max_size=3))
    def test_absolute_is_a_metric(self, xs):
        a, b, c = xs
        m = Metric.ABSOLUTE
        assert m(a, b) == m(b, a) >= 0 and m(a, a) == 0
        assert m(a, c) <= m(a, b) + m(b, c)

    @given(st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3))
    def test_not_equal_is_a_metric(self, xs):
        a, b, c = xs
        m = Metric.NOT_EQUAL
        assert m(a, b) == m(b, a) >= 0
        assert m(a, c) <= m(a, b) + m(b, c)


def test_hoeffding_formula():
    assert fs.hoeffding_samples(0.1, 0.05) == math.ceil(math.log(40) / 0.02)
    assert fs.hoeffding_samples(0.1, 0.05, spread=2) == math.ceil(4 * math.log(40) / 0.02)
    with pytest.raises(ValueError):
        fs.hoeffding_samples(0, 0.1)
    with pytest.raises(ValueError):
        fs.hoeffding_samples(0.1, 1.0)


class TestRestriction:
    def test_canonical(self):
        a = Restriction.of([(3, 1), (1, -1)])
        b = Restriction.of({1: -1, 3: 1})
        assert a == b and hash(a) == hash(b)
        assert a.pairs == ((1, -1), (3, 1)) and len(a) == 2
        assert 3 in a and 2 not in a

    def test_extend(self):
        assert fs.EMPTY.extend(2, 1).extend(1, -1) == Restriction.of({1: -1, 2: 1})
        with pytest.raises(ValueError):
            Restriction.of({1: 1}).extend(1, -1)

    def test_errors(self):
        with pytest.raises(ValueError):
            Restriction.of({0: 1})
        with pytest.raises(ValueError):
            Restriction.of({1: 0})
        with pytest.raises(ValueError):
            Restriction.of([(1, 1), (1, -1)])
        with pytest.raises(ValueError):
            Restriction.of({5: 1}).check(4)

    @given(st.dictionaries(st.integers(1, 12), st.sampled_from([-1, 1])))
    def test_pairs_round_trip(self, d):
        r = Restriction.of(d)
        assert dict(r.pairs) == d
        assert [v for v, _ in r.pairs] == sorted(d)


class TestRestrict:
    def test_empty(self):
        f = maj(3)
        assert fs.restrict(f, fs.EMPTY).equals(f)

    def test_dictator_fixed(self):
        assert fs.restrict(dictator(1, 3), {1: 1}).equals(const(1, 3))

    def test_parity(self):
        got = fs.restrict(parity([1, 2], 2), {1: -1})
        assert got.equals(dictator(2, 2).negate())

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            fs.restrict(maj(3), {4: 1})

    def test_oracle_restrict_shares_counters(self):
        o = fs.FunctionOracle.from_table(parity([1, 2], 2), fs.Access.MEMBERSHIP)
        r = o.restrict(Restriction.of({1: -1}))
        assert r.query((1, 1)) == -1 and r.query((1, -1)) == 1
        assert o.counters.queries == 2


# --------------------------------------------------------------------------
# exact statistics

class TestDistance:
    def test_examples(self):
        f = maj(3)
        assert fs.dist_exact(f, f) == 0
        assert fs.dist_exact(dictator(1, 2), dictator(1, 2).negate()) == 1
        assert fs.dist_exact(dictator(1, 2), dictator(2, 2)) == frozen.DIST_X1_X2

    def test_tree_against_table(self):
        assert fs.dist_exact(dt.dictator(1), dictator(1, 4)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fs.dist_exact(maj(3), maj(3, 4))

    def test_absolute_metric_on_pm1_is_twice_ne(self, rng):
        f, g = fs.random_truth_table(5, rng), fs.random_truth_table(5, rng)
        assert fs.dist_exact(f, g, Metric.ABSOLUTE) == 2 * fs.dist_exact(f, g)

    def test_enumeration_limit(self, monkeypatch):
        monkeypatch.setenv("DTPROPER_EXACT_N", "4")
        o = fs.FunctionOracle.from_tree(dt.dictator(1), 6)
        with pytest.raises(fs.EnumerationError):
            fs.dist_exact(o, dt.dictator(1))


class TestInfluence:
    def test_examples(self):
        assert fs.influences_exact(const(1, 3)) == [0, 0, 0]
        assert fs.influence_exact(dictator(1, 3), 1) == frozen.INF_DICTATOR
        assert fs.influences_exact(maj(3)) == [frozen.INF_MAJ3] * 3

    def test_range(self):
        with pytest.raises(ValueError):
            fs.influence_exact(maj(3), 4)

    @given(tables(n_max=7), st.integers(1, 7))
    def test_restriction_identity(self, f, i):
        # rerandomised influence = dist(f, f with x_i fixed), for either value
        i = min(i, f.n)
        inf = fs.influence_exact(f, i)
        assert inf == fs.dist_exact(f, fs.restrict(f, {i: 1})) == fs.dist_exact(f, fs.restrict(f, {i: -1}))

    @given(trees(n_max=10, s_max=32))
    def test_total_influence_bounded_by_avg_depth(self, nt):
        n, t = nt
        total = sum(fs.influences_exact(fs.TruthTable.from_tree(t, n)))
        a = dt.avg_depth(t)
        assert total <= a
        assert float(a) <= math.log2(dt.size(t)) + 1e-12

    @given(tables(n_max=5), deltas, st.integers(1, 5))
    def test_real_valued_restriction_identity(self, f, delta, i):
        i = min(i, f.n)
        g = fs.noise_operator(f, delta)
        inf = fs.influence_exact(g, i)
        assert inf == fs.dist_exact(g, fs.restrict(g, {i: 1})) == fs.dist_exact(g, fs.restrict(g, {i: -1}))


class TestBiasVariance:
    def test_examples(self):
        c = const(-1, 3)
        assert fs.bias(c) == 0 and fs.variance(c) == 0
        d = dictator(1, 3)
        assert fs.bias(d) == frozen.BIAS_DICTATOR and fs.variance(d) == frozen.VAR_DICTATOR
        assert fs.bias(maj(3)) == frozen.BIAS_MAJ3 and fs.expectation(maj(3)) == frozen.MEAN_MAJ3

    @given(tables(n_max=8))
    def test_relations(self, f):
        e, v, b = fs.expectation(f), fs.variance(f), fs.bias(f)
        assert v == 1 - e * e
        assert 0 <= b <= Fraction(1, 2)
        assert b == (1 - abs(e)) / 2

    def test_bias_needs_boolean(self):
        with pytest.raises(ValueError):
            fs.bias(fs.noise_operator(maj(3), Fraction(1, 2)))


# --------------------------------------------------------------------------
# Fourier and smoothing

class TestFourier:
    def test_constant(self):
        c = fs.fourier(const(1, 4))
        assert c[0] == 1 and all(v == 0 for v in c[1:])

    def test_maj3(self):
        c = fs.fourier(maj(3))
        for S, v in frozen.FOURIER_MAJ3.items():
            assert c[fs.subset_mask(S)] == v

    @given(tables(n_max=9))
    def test_parseval(self, f):
        assert sum(v * v for v in fs.fourier(f)) == 1

    @given(tables(n_max=6))
    def test_inversion(self, f):
        c = fs.fourier(f)
        for j in range(1 << f.n):
            x = fs.index_to_point(j, f.n)
            val = sum(c[m] * math.prod(x[i] for i in range(f.n) if m >> i & 1) for m in range(1 << f.n))
            assert val == f.at(j)

    def test_too_large(self, monkeypatch):
        monkeypatch.setattr(fs, "FOURIER_N_MAX", 3)
        with pytest.raises(fs.EnumerationError):
            fs.fourier(maj(3, 4))

    def test_float_tables(self, rng):
        f = fs.random_truth_table(6, rng)
        exact = fs.fourier(f)
        approx = fs.fourier(f.as_float())
        assert np.allclose([float(v) for v in exact], approx, atol=1e-12)


class TestSmoothing:
    def test_zero_noise(self, rng):
        f = fs.random_truth_table(5, rng)
        assert fs.smooth(f, 0).table().equals(f)

    def test_full_noise(self, rng):
        f = fs.random_truth_table(5, rng)
        sm = fs.smooth(f, 1).table()
        assert all(sm.at(j) == fs.expectation(f) for j in range(32))

    def test_dictator_half(self):
        sm = fs.smooth(dictator(1, 2), Fraction(1, 2))
        assert [sm.value(fs.index_to_point(j, 2)) for j in range(4)] == frozen.SMOOTH_DICTATOR_HALF
        assert fs.smooth_eval(sm, (1, -1)) == Fraction(1, 2)

    def test_float_delta(self, rng):
        f = fs.random_truth_table(6, rng)
        a = fs.noise_operator(f, Fraction(1, 10))
        b = fs.noise_operator(f, 0.1)
        assert a.equals(b)

    @given(tables(n_max=7), deltas)
    def test_range(self, f, delta):
        sm = fs.noise_operator(f, delta)
        vals = [sm.at(j) for j in range(1 << f.n)]
        assert all(-1 <= v <= 1 for v in vals)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            fs.smooth(maj(3), Fraction(3, 2))

    def test_monte_carlo_close_to_exact(self):
        f = maj(3, 5)
        exact = fs.noise_operator(f, Fraction(1, 5))
        mc = fs.SmoothedFunction(fs.FunctionOracle.from_table(f, fs.Access.MEMBERSHIP), 0.2, "mc",
                                 accuracy=0.02, confidence=1e-6, seed=3)
        got = mc.values_index(np.arange(32, dtype=np.uint64))
        assert np.max(np.abs(got - exact.as_float().values)) <= 0.02

    def test_monte_carlo_has_no_table(self):
        mc = fs.smooth(maj(3), 0.2, "mc")
        with pytest.raises(fs.EnumerationError):
            mc.table()

    def test_restricted_view(self):
        f = maj(3)
        sm = fs.smooth(f, Fraction(1, 3)).restrict(Restriction.of({1: 1}))
        full = fs.noise_operator(f, Fraction(1, 3))
        assert sm.table().equals(full.restrict(Restriction.of({1: 1})))


class TestNoiseFacts:
    @given(trees(n_max=8, s_max=16), st.integers(0, 10))
    def test_smoothing_moves_a_tree_little(self, nt, k):
        n, t = nt
        delta = Fraction(k, 10)
        f = fs.TruthTable.from_tree(t, n)
        assert fs.dist_exact(fs.noise_operator(f, delta), f, Metric.ABSOLUTE) <= dt.avg_depth(t) * delta

    @given(tables(n_max=7), st.integers(0, 2 ** 32 - 1), deltas)
    def test_self_adjoint(self, f, seed, delta):
        g = fs.random_truth_table(f.n, np.random.default_rng(seed))
        lhs = fs.dist_exact(fs.noise_operator(f, delta), g, Metric.ABSOLUTE)
        rhs = fs.dist_exact(f, fs.noise_operator(g, delta), Metric.ABSOLUTE)
        assert lhs == rhs

    @given(tables(n_max=8), st.fractions(Fraction(1, 50), 1, max_denominator=50))
    def test_total_squared_influence(self, f, delta):
        fourier_side = fs.total_squared_influence_fourier(f, delta)
        assert fourier_side == fs.total_squared_influence_direct(fs.noise_operator(f, delta))
        assert float(fourier_side) <= 1 / (math.e * float(delta)) + 1e-12

    @given(tables(n_max=7), deltas, st.dictionaries(st.integers(1, 7), st.sampled_from([-1, 1]), max_size=4))
    def test_restriction_commutes_approximately(self, f, delta, assign):
        pi = Restriction.of({k: v for k, v in assign.items() if k <= f.n})
        a = fs.noise_operator(f.restrict(pi), delta)
        b = fs.noise_operator(f, delta).restrict(pi)
        gap = max(abs(a.at(j) - b.at(j)) for j in range(1 << f.n))
        assert gap <= delta * len(pi)

    def test_monotone_influential_count(self, rng):
        for _ in range(30):
            t = dt.random_monotone_tree(10, 16, None, rng)
            infl = fs.influences_exact(fs.TruthTable.from_tree(t, 10))
            for tau in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)):
                assert sum(1 for v in infl if v >= tau) <= 1 / (4 * tau * tau)


# --------------------------------------------------------------------------
# tables and oracles

class TestTruthTable:
    @given(tables(n_max=9))
    def test_text_round_trip(self, f):
        assert fs.TruthTable.from_text(f.to_text()).equals(f)

    def test_text_format(self):
        text = dictator(1, 2).to_text()
        assert text == "n=2\n0101\n"
        assert fs.TruthTable.from_text("n=2\n01\n 01 \n").equals(dictator(1, 2))

    @pytest.mark.parametrize("text", ["", "m=2\n0101", "n=2\n010", "n=2\n0121", "n=x\n01"])
    def test_bad_text(self, text):
        with pytest.raises(ValueError):
            fs.TruthTable.from_text(text)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            fs.TruthTable(3, np.ones(7, dtype=np.int8))

    def test_point_index_round_trip(self):
        for j in range(16):
            assert fs.point_to_index(fs.index_to_point(j, 4)) == j
        pts = fs.index_to_points(np.arange(16), 4)
        assert [fs.point_to_index(p) for p in pts.tolist()] == list(range(16))

    def test_is_monotone(self):
        assert fs.is_monotone(maj(3)) and fs.is_monotone(dictator(2, 3))
        assert not fs.is_monotone(parity([1, 2], 2))


class TestOracle:
    def test_counters(self, rng):
        o = fs.FunctionOracle.from_tree(dt.dictator(1), 4)
        o.query((1, -1, -1, -1))
        o.query_index(np.arange(5, dtype=np.uint64))
        o.sample(7, rng)
        assert (o.counters.queries, o.counters.examples) == (6, 7)
        o.table()
        assert o.counters.queries == 6 + 16

    def test_random_example_mode_refuses_queries(self, rng):
        o = fs.FunctionOracle.from_tree(dt.dictator(1), 4, fs.Access.RANDOM_EXAMPLE)
        with pytest.raises(fs.AccessError):
            o.query((1, 1, 1, 1))
        with pytest.raises(fs.AccessError):
            o.table()
        idx, lab = o.sample(10, rng)
        assert np.array_equal(lab, np.where(idx & 1, 1, -1))

    def test_examples_only_view_shares_counters(self, rng):
        o = fs.FunctionOracle.from_tree(dt.dictator(1), 4)
        v = o.examples_only()
        v.sample(3, rng)
        assert o.counters.examples == 3
        with pytest.raises(fs.AccessError):
            v.query_index([0])

    def test_truth_table_mode_limit(self, monkeypatch):
        monkeypatch.setenv("DTPROPER_EXACT_N", "5")
        with pytest.raises(fs.EnumerationError):
            fs.FunctionOracle(6, lambda idx: idx, fs.Access.TRUTH_TABLE)

    def test_dimension_mismatch(self):
        o = fs.FunctionOracle.from_tree(dt.dictator(1), 3)
        with pytest.raises(ValueError):
            o.query((1, 1))

    def test_large_n_tree_oracle(self, rng):
        t = dt.random_tree(40, 8, None, rng)
        o = fs.FunctionOracle.from_tree(t, 40)
        idx = fs.uniform_indices(40, 100, rng)
        assert np.array_equal(o.query_index(idx), dt.evaluate_index(t, idx))


# --------------------------------------------------------------------------
# sampled estimators

class TestEstimators:
    def test_dist_est_equal(self, rng):
        f = fs.FunctionOracle.from_table(maj(3, 6), fs.Access.MEMBERSHIP)
        assert fs.dist_est(f, f, 0.05, 0.01, rng) == 0

    def test_dist_est_x1_x2(self):
        hits = 0
        a = dictator(1, 4)
        b = dictator(2, 4)
        for seed in range(200):
            est = fs.dist_est(a, b, 0.05, 0.01, np.random.default_rng(seed))
            hits += abs(est - 0.5) <= 0.05
        assert hits >= 198

    def test_dist_est_refuses_random_examples(self, rng):
        o = fs.FunctionOracle.from_table(maj(3), fs.Access.RANDOM_EXAMPLE)
        with pytest.raises(fs.AccessError):
            fs.dist_est(o, maj(3), 0.1, 0.1, rng)

    def test_influence_est(self, rng):
        assert fs.influence_est(const(1, 4), 2, 0.05, 0.01, rng) == 0
        est = fs.influence_est(fs.FunctionOracle.from_table(dictator(1, 4)), 1, 0.05, 0.01, rng)
        assert abs(est - 0.5) <= 0.05

    def test_influence_est_sample_count(self, rng):
        o = fs.FunctionOracle.from_table(maj(3, 5), fs.Access.MEMBERSHIP)
        fs.influence_est(o, 1, 0.1, 0.05, rng)
        assert o.counters.queries == 2 * fs.hoeffding_samples(0.1, 0.05)

    def test_influence_est_refuses_random_examples(self, rng):
        o = fs.FunctionOracle.from_table(maj(3), fs.Access.RANDOM_EXAMPLE)
        with pytest.raises(fs.AccessError):
            fs.influence_est(o, 1, 0.1, 0.1, rng)

    def test_influence_est_on_smoothed_function(self, rng):
        f = maj(3, 5)
        sm = fs.smooth(f, Fraction(1, 4))
        est = fs.influence_est(sm, 1, 0.02, 0.001, rng, Metric.ABSOLUTE)
        assert abs(est - float(fs.influence_exact(sm.table(), 1))) <= 0.02


class TestMonotoneEstimator:
    def _examples(self, f, m, seed=0):
        o = fs.FunctionOracle.from_table(f, fs.Access.RANDOM_EXAMPLE)
        return fs.ExampleSet.draw(o, m, np.random.default_rng(seed)), o

    def test_dictator(self):
        ex, o = self._examples(dictator(1, 6), 20000)
        assert abs(fs.influence_mono_est(ex, fs.EMPTY, 1, 0.05, 0.01) - 0.5) <= 0.05
        assert abs(fs.influence_mono_est(ex, fs.EMPTY, 2, 0.05, 0.01)) <= 0.05
        assert o.counters.queries == 0 and o.counters.examples == 20000

    def test_majority(self):
        ex, _ = self._examples(maj(3, 6), 20000)
        for i in (1, 2, 3):
            assert abs(fs.influence_mono_est(ex, fs.EMPTY, i, 0.05, 0.01) - 0.25) <= 0.05

    def test_restricted_identity_is_exact_on_the_full_cube(self):
        # with exactly one example per point the estimator is the exact influence
        f = maj(3, 5)
        o = fs.FunctionOracle.from_table(f, fs.Access.RANDOM_EXAMPLE)
        pts = np.arange(32, dtype=np.uint64)
        ex = fs.ExampleSet(5, pts, f.values.astype(np.float64), 32)
        pi = Restriction.of({2: 1})
        got = 2.0 ** (len(pi) - 1) * ex.correlations(pi)[1][0]
        assert got == float(fs.influence_exact(f.restrict(pi), 1))

    def test_budget(self):
        ex, _ = self._examples(dictator(1, 6), 100)
        with pytest.raises(fs.BudgetError):
            fs.influence_mono_est(ex, Restriction.of({3: 1}), 1, 0.05, 0.01)

    def test_fixed_variable(self):
        ex, _ = self._examples(dictator(1, 4), 1000)
        with pytest.raises(ValueError):
            fs.influence_mono_est(ex, Restriction.of({1: 1}), 1, 0.5, 0.5)

    def test_compressed_matches_raw(self):
        f = maj(3, 8)
        o = fs.FunctionOracle.from_table(f, fs.Access.RANDOM_EXAMPLE)
        ex = fs.ExampleSet.draw(o, 5000, np.random.default_rng(9), chunk=777)
        # redraw the same stream chunk by chunk and average directly
        rng = np.random.default_rng(9)
        parts = [o.sample(k, rng) for k in [777] * 6 + [5000 - 6 * 777]]
        idx = np.concatenate([p[0] for p in parts])
        lab = np.concatenate([p[1] for p in parts]).astype(np.float64)
        x = fs.index_to_points(idx, 8).astype(np.float64)
        pi = Restriction.of({4: -1})
        cons = pi.consistent_index(idx)
        e0, corr = ex.correlations(pi)
        assert math.isclose(e0, float((lab * cons).mean()), abs_tol=1e-12)
        assert np.allclose(corr, (lab * cons) @ x / 5000, atol=1e-12)

    def test_required_examples_scale(self):
        a = fs.mono_required_examples(0, 0.1, 0.01)
        b = fs.mono_required_examples(3, 0.1, 0.01)
        assert 60 <= b / a <= 68
