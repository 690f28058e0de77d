import numpy as np
import pytest

from bnsim import (RunConfig, SchemeKind, ScoringRule, ZeroScoreError,
                   exact_marginals, load_network, lw_draw, pearl_step, run,
                   simple_draw, topological_order)
from bnsim.samplers import RunCounters

from conftest import make_polytree


class Seq:
    """Deterministic stand-in rng yielding a fixed uniform sequence."""

    def __init__(self, us):
        self.us = list(us)

    def random(self):
        return self.us.pop(0)


class TestSimpleDraw:
    def test_weight_is_full_joint(self, fixture3):
        rng = Seq([0.1, 0.9, 0.2])   # a=0, b=1, c=0
        ws = simple_draw(fixture3, {}, rng)
        assert list(ws.values) == [0, 1, 0]
        assert ws.p == pytest.approx(0.175, abs=1e-15)

    def test_all_evidence_forces_sample(self, fixture3):
        ev = {0: 0, 1: 1, 2: 0}
        ws = simple_draw(fixture3, ev, Seq([]))
        assert list(ws.values) == [0, 1, 0]
        assert ws.p == pytest.approx(0.175, abs=1e-15)

    def test_normalized_estimates_near_posterior(self, fixture3):
        exact = exact_marginals(fixture3)
        res = run(fixture3, {}, RunConfig(scheme=SchemeKind.SIMPLE,
                                          m=200_000, seed=1))
        assert np.allclose(res.marginals[:, :2], exact[:, :2], atol=0.02)


class TestLwDraw:
    def test_no_evidence_weight_one(self, fixture3):
        order = topological_order(fixture3)
        rng = np.random.default_rng(0)
        for _ in range(500):
            assert lw_draw(fixture3, {}, order, rng).p == 1.0

    def test_evidence_weight_is_cpt_entry(self, fixture3):
        order = topological_order(fixture3)
        ws = lw_draw(fixture3, {2: 0}, order, Seq([0.1, 0.9]))  # a=0, b=1
        assert list(ws.values) == [0, 1, 0]
        assert ws.p == 0.5

    def test_posterior_convergence(self, fixture3):
        exact = exact_marginals(fixture3, {2: 0})
        res = run(fixture3, {2: 0},
                  RunConfig(scheme=SchemeKind.LIKELIHOOD, m=200_000, seed=2))
        assert np.allclose(res.marginals[:, :2], exact[:, :2], atol=0.01)

    def test_three_sigma_convergence_bound(self):
        # weighted standard error from the effective sample size
        for seed, scheme in ((3, SchemeKind.SIMPLE),
                             (4, SchemeKind.LIKELIHOOD)):
            net = make_polytree(10, seed=seed)
            ev = {9: 0}
            exact = exact_marginals(net, ev)
            m = 200_000
            res = run(net, ev, RunConfig(scheme=scheme, m=m, seed=seed))
            # crude effective m: likelihood weights are bounded by 1 and
            # concentrate; reuse the simple-scheme collision estimate
            weights = []
            rng = np.random.default_rng(seed)
            order = topological_order(net)
            for _ in range(2000):
                if scheme is SchemeKind.SIMPLE:
                    weights.append(simple_draw(net, ev, rng).p)
                else:
                    weights.append(lw_draw(net, ev, order, rng).p)
            w = np.array(weights)
            m_eff = m * w.mean() ** 2 / np.mean(w ** 2)
            for i in range(net.n):
                if i in ev:
                    continue
                p = exact[i][0]
                sigma = max(np.sqrt(p * (1 - p) / m_eff), 1e-4)
                assert abs(res.marginals[i][0] - p) < 3 * sigma


class TestPearlStep:
    def test_all_evidence_returns_prev(self, fixture3):
        ev = {0: 1, 1: 0, 2: 1}
        prev = np.array([1, 0, 1], dtype=np.int32)
        ws = pearl_step(fixture3, ev, prev, Seq([]))
        assert list(ws.values) == [1, 0, 1]
        assert ws.p == 1.0

    def test_single_variable_frequencies(self):
        net = load_network("net one\nvar x 2\ncpt x\n0.3 0.7\n")
        rng = np.random.default_rng(5)
        cur = np.array([0], dtype=np.int32)
        counts = np.zeros(2)
        for _ in range(100_000):
            cur = pearl_step(net, {}, cur, rng).values
            counts[cur[0]] += 1
        assert counts[0] / counts.sum() == pytest.approx(0.3, abs=0.01)

    def test_fixture_convergence_with_burn_in(self, fixture3):
        exact = exact_marginals(fixture3)
        res = run(fixture3, {}, RunConfig(scheme=SchemeKind.PEARL,
                                          m=200_000, seed=6, burn_in=1000))
        assert np.allclose(res.marginals[:, :2], exact[:, :2], atol=0.02)

    def test_step_weight_always_one(self, fixture3):
        rng = np.random.default_rng(7)
        cur = np.array([0, 0, 0], dtype=np.int32)
        for _ in range(50):
            ws = pearl_step(fixture3, {1: 0}, cur, rng)
            assert ws.p == 1.0
            cur = ws.values


class TestRun:
    def test_single_sample_is_point_mass(self, fixture3):
        for scheme in SchemeKind:
            res = run(fixture3, {}, RunConfig(scheme=scheme, m=1, seed=8))
            assert set(np.unique(res.marginals[:, :2])) <= {0.0, 1.0}

    def test_seed_reproducibility_bitwise(self, fixture3):
        for scheme in SchemeKind:
            cfg = RunConfig(scheme=scheme, m=300, seed=9,
                            point_rule="random", burn_in=5)
            a = run(fixture3, {1: 1}, cfg)
            b = run(fixture3, {1: 1}, cfg)
            assert np.array_equal(a.marginals, b.marginals)
            assert a.stats.assignments == b.stats.assignments
            assert a.stats.lookups == b.stats.lookups

    def test_evidence_rows_are_point_mass(self, fixture3):
        ev = {0: 1}
        for scheme in SchemeKind:
            for scoring in ScoringRule:
                res = run(fixture3, ev, RunConfig(scheme=scheme, m=64,
                                                  seed=10, scoring=scoring))
                assert res.marginals[0][1] == 1.0
                assert res.marginals[0][0] == 0.0

    def test_rows_sum_to_one(self):
        net = make_polytree(8, seed=11, arity=3)
        for scheme in SchemeKind:
            res = run(net, {3: 2}, RunConfig(scheme=scheme, m=500, seed=11))
            assert np.allclose(res.marginals.sum(axis=1), 1.0, atol=1e-9)

    def test_all_zero_weights_raise(self):
        net = load_network(
            "net z\nvar x 2\nvar y 2\nparents y x\n"
            "cpt x\n0.5 0.5\ncpt y\n1.0 0.0\n1.0 0.0\n")
        with pytest.raises(ZeroScoreError):
            run(net, {1: 1}, RunConfig(scheme=SchemeKind.LIKELIHOOD, m=50,
                                       seed=12))

    def test_evidence_values_never_change(self, fixture3):
        # draw-level checks across every scheme's sample stream
        ev = {1: 0}
        order = topological_order(fixture3)
        rng = np.random.default_rng(13)
        for _ in range(200):
            assert simple_draw(fixture3, ev, rng).values[1] == 0
            assert lw_draw(fixture3, ev, order, rng).values[1] == 0
        cur = np.array([0, 0, 0], dtype=np.int32)
        for _ in range(200):
            cur = pearl_step(fixture3, ev, cur, rng).values
            assert cur[1] == 0
        from bnsim import strat_init, strat_next
        for proposal in ("conditional", "uniform"):
            state = strat_init(fixture3, ev, order, proposal, 100, "random")
            for _ in range(100):
                assert strat_next(state, rng).values[1] == 0

    def test_counters_accumulate(self, fixture3):
        res = run(fixture3, {}, RunConfig(scheme=SchemeKind.LIKELIHOOD,
                                          m=100, seed=14))
        assert res.stats.assignments == 300   # three free vars per sample
        assert res.stats.lookups == 300
        assert res.stats.samples == 100
        assert res.stats.wall_ms >= 0.0

    def test_invalid_m_rejected(self, fixture3):
        with pytest.raises(ValueError):
            run(fixture3, {}, RunConfig(scheme=SchemeKind.SIMPLE, m=0))

    def test_concurrent_runs_match_serial(self, fixture3):
        from concurrent.futures import ThreadPoolExecutor
        cfg = RunConfig(scheme=SchemeKind.STRAT_LIKELIHOOD, m=500, seed=15)
        serial = run(fixture3, {}, cfg).marginals
        with ThreadPoolExecutor(2) as pool:
            futs = [pool.submit(run, fixture3, {}, cfg) for _ in range(4)]
            for f in futs:
                assert np.array_equal(f.result().marginals, serial)


class TestInstrumentation:
    def test_counting_optional(self, fixture3):
        rng = np.random.default_rng(16)
        stats = RunCounters()
        simple_draw(fixture3, {}, rng, stats=stats)
        assert stats.assignments == 3
        assert stats.lookups == 3
        # and entirely skippable
        simple_draw(fixture3, {}, rng)

    def test_pearl_blanket_rows_reused(self, fixture3):
        cfg_s = RunConfig(scheme=SchemeKind.PEARL, m=200, seed=17)
        cfg_b = RunConfig(scheme=SchemeKind.PEARL, m=200, seed=17,
                          scoring=ScoringRule.BLANKET)
        simple = run(fixture3, {}, cfg_s)
        blanket = run(fixture3, {}, cfg_b)
        assert blanket.stats.lookups == simple.stats.lookups

    def test_blanket_scoring_costs_lookups_elsewhere(self, fixture3):
        cfg_s = RunConfig(scheme=SchemeKind.LIKELIHOOD, m=200, seed=18)
        cfg_b = RunConfig(scheme=SchemeKind.LIKELIHOOD, m=200, seed=18,
                          scoring=ScoringRule.BLANKET)
        assert run(fixture3, {}, cfg_b).stats.lookups \
            > run(fixture3, {}, cfg_s).stats.lookups
