import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnsim import (RunConfig, SchemeKind, WeightedSample, blanket_update,
                   divergence, exact_marginals, merge, normalize, run,
                   simple_update)
from bnsim.errors import ZeroScoreError
from bnsim.scoring import BeliefScores

from conftest import make_polytree


def ws(values, p):
    return WeightedSample(np.array(values, dtype=np.int32), p)


class TestSimpleUpdate:
    def test_zero_weight_is_noop(self, fixture3):
        scores = BeliefScores(fixture3)
        simple_update(scores, ws([0, 1, 0], 0.0))
        assert not scores.table.any()

    def test_fixture_sample(self, fixture3):
        scores = BeliefScores(fixture3)
        simple_update(scores, ws([0, 1, 0], 0.175))
        assert scores.table[0, 0] == 0.175
        assert scores.table[1, 1] == 0.175
        assert scores.table[2, 0] == 0.175
        assert scores.table.sum() == pytest.approx(3 * 0.175)

    def test_additivity(self, fixture3):
        scores = BeliefScores(fixture3)
        simple_update(scores, ws([1, 0, 1], 0.25))
        simple_update(scores, ws([1, 0, 1], 0.5))
        assert scores.table[0, 1] == 0.75


class TestBlanketUpdate:
    def test_point_mass_blanket_matches_simple(self):
        from bnsim import load_network
        net = load_network(
            "net d\nvar x 2\nvar y 2\nparents y x\n"
            "cpt x\n0.5 0.5\ncpt y\n1.0 0.0\n0.0 1.0\n")
        a = BeliefScores(net)
        blanket_update(a, net, ws([1, 1], 1.0))
        # y's blanket conditional is a point mass at its sampled value
        assert a.table[1, 1] == pytest.approx(1.0, abs=1e-15)

    def test_fixture_hand_value(self, fixture3):
        scores = BeliefScores(fixture3)
        blanket_update(scores, fixture3, ws([0, 0, 0], 1.0))
        assert scores.table[1] == pytest.approx([0.3, 0.7], abs=1e-12)

    def test_mass_per_variable_equals_p(self, fixture3):
        scores = BeliefScores(fixture3)
        blanket_update(scores, fixture3, ws([0, 1, 1], 0.6))
        assert np.allclose(scores.table.sum(axis=1), 0.6, atol=1e-12)

    def test_evidence_scored_at_observed_value(self, fixture3):
        scores = BeliefScores(fixture3)
        blanket_update(scores, fixture3, ws([0, 1, 1], 1.0), evidence={1: 1})
        assert scores.table[1, 1] == 1.0 and scores.table[1, 0] == 0.0


class TestNormalize:
    def test_plain_rows(self, fixture3):
        scores = BeliefScores(fixture3)
        scores.table[:] = [[2, 6], [0.175, 0.175], [1, 3]]
        out = normalize(scores)
        assert out[0] == pytest.approx([0.25, 0.75])
        assert out[1] == pytest.approx([0.5, 0.5])

    def test_zero_row_raises(self, fixture3):
        scores = BeliefScores(fixture3)
        with pytest.raises(ZeroScoreError):
            normalize(scores)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    def test_scale_invariance(self, c):
        arr = np.array([[1.0, 3.0], [2.0, 2.0]])

        class Box:
            table = arr

        class Scaled:
            table = arr * c

        assert np.allclose(normalize(Box), normalize(Scaled), atol=1e-12)


class TestMerge:
    def test_merge_adds(self, fixture3):
        a = BeliefScores(fixture3)
        b = BeliefScores(fixture3)
        simple_update(a, ws([0, 0, 0], 1.0))
        simple_update(b, ws([1, 1, 1], 2.0))
        c = merge(a, b)
        assert c.total_weight == 3.0
        assert c.table[0, 0] == 1.0 and c.table[0, 1] == 2.0
        # merging does not disturb the inputs
        assert a.total_weight == 1.0


class TestDivergence:
    def test_identical_tables_zero(self):
        t = np.array([[0.3, 0.7]])
        assert divergence(t, t, [2]) == 0.0

    def test_hand_value(self):
        exact = np.array([[0.5, 0.5]])
        est = np.array([[0.25, 0.75]])
        want = 0.5 * math.log2(2.0) + 0.5 * math.log2(2.0 / 3.0)
        assert divergence(exact, est, [2]) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(0.2075, abs=1e-4)

    def test_mean_over_variables(self):
        exact = np.array([[0.5, 0.5], [0.5, 0.5]])
        est = np.array([[0.25, 0.75], [0.5, 0.5]])
        single = divergence(exact[:1], est[:1], [2])
        assert divergence(exact, est, [2, 2]) \
            == pytest.approx(single / 2, abs=1e-12)

    def test_evidence_excluded(self):
        exact = np.array([[1.0, 0.0], [0.5, 0.5]])
        est = np.array([[1.0, 0.0], [0.5, 0.5]])
        assert divergence(exact, est, [2, 2], exclude={0}) == 0.0

    def test_zero_exact_term_contributes_nothing(self):
        exact = np.array([[1.0, 0.0]])
        est = np.array([[0.5, 0.5]])
        assert divergence(exact, est, [2]) == pytest.approx(1.0)

    def test_clamp_keeps_finite(self):
        exact = np.array([[0.5, 0.5]])
        est = np.array([[1.0, 0.0]])
        val = divergence(exact, est, [2])
        assert np.isfinite(val)
        assert val == pytest.approx(0.5 * math.log2(0.5 / 1e-12) - 0.5,
                                    abs=1e-9)

    @settings(max_examples=50)
    @given(st.lists(st.floats(min_value=1e-6, max_value=1.0),
                    min_size=2, max_size=2),
           st.lists(st.floats(min_value=1e-6, max_value=1.0),
                    min_size=2, max_size=2))
    def test_nonnegative_for_honest_estimates(self, e, q):
        exact = np.array([e]) / sum(e)
        est = np.array([q]) / sum(q)
        assert divergence(exact, est, [2]) >= -1e-9


class TestDivergenceShrinksWithM:
    def test_median_divergence_drops_10x_samples(self):
        net = make_polytree(8, seed=4)
        exact = exact_marginals(net)
        for scheme in SchemeKind:
            lo_m, hi_m = [], []
            for seed in range(10):
                for m, acc in ((100, lo_m), (10000, hi_m)):
                    cfg = RunConfig(scheme=scheme, m=m, seed=seed,
                                    point_rule="random", burn_in=100)
                    res = run(net, {}, cfg)
                    acc.append(divergence(exact, res.marginals, net.arities))
            assert np.median(hi_m) < np.median(lo_m), scheme
