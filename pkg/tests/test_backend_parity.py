"""The compiled kernel and the Python loops must agree bit for bit."""

import numpy as np
import pytest

from bnsim import RunConfig, SchemeKind, ScoringRule, run
from bnsim import backend

from conftest import make_polytree, random_evidence, random_net

pytestmark = pytest.mark.skipif(not backend.HAVE_COMPILED,
                                reason="compiled kernel not built")


def both(net, ev, **kw):
    a = run(net, ev, RunConfig(backend="c", **kw))
    b = run(net, ev, RunConfig(backend="py", **kw))
    return a, b


def assert_identical(a, b):
    assert np.array_equal(a.marginals, b.marginals)
    for fld in ("assignments", "init_assignments", "comparisons", "lookups"):
        assert getattr(a.stats, fld) == getattr(b.stats, fld), fld


@pytest.mark.parametrize("scheme", list(SchemeKind))
@pytest.mark.parametrize("scoring", list(ScoringRule))
def test_fixture_parity(fixture3, scheme, scoring):
    for ev in ({}, {1: 0}):
        for point_rule in ("median", "random"):
            a, b = both(fixture3, ev, scheme=scheme, scoring=scoring,
                        m=400, seed=3, point_rule=point_rule, burn_in=7)
            assert_identical(a, b)


@pytest.mark.parametrize("rep", ["tree", "dense"])
def test_random_network_parity(rep):
    rng = np.random.default_rng(77)
    for trial in range(4):
        net = random_net(rng, 9)
        ev = random_evidence(rng, net, count=2)
        for scheme in SchemeKind:
            a, b = both(net, ev, scheme=scheme, m=200, seed=trial, rep=rep,
                        burn_in=3, point_rule="random")
            assert_identical(a, b)


def test_polytree_parity_at_scale():
    net = make_polytree(50, seed=5)
    for scheme in (SchemeKind.LIKELIHOOD, SchemeKind.STRAT_LIKELIHOOD,
                   SchemeKind.STRAT_SIMPLE):
        a, b = both(net, {}, scheme=scheme, m=2000, seed=6)
        assert_identical(a, b)


def test_representations_give_identical_runs(fixture3):
    for scheme in SchemeKind:
        a = run(fixture3, {2: 1}, RunConfig(scheme=scheme, m=300, seed=8,
                                            rep="tree"))
        b = run(fixture3, {2: 1}, RunConfig(scheme=scheme, m=300, seed=8,
                                            rep="dense"))
        assert np.array_equal(a.marginals, b.marginals)


def test_backend_env_override(fixture3, monkeypatch):
    monkeypatch.setenv("BNSIM_BACKEND", "py")
    res = run(fixture3, {}, RunConfig(scheme=SchemeKind.SIMPLE, m=10))
    assert res.stats.backend == "py"
    monkeypatch.setenv("BNSIM_BACKEND", "c")
    res = run(fixture3, {}, RunConfig(scheme=SchemeKind.SIMPLE, m=10))
    assert res.stats.backend == "c"


def test_missing_compiled_backend_raises(monkeypatch):
    monkeypatch.setattr(backend, "HAVE_COMPILED", False)
    with pytest.raises(RuntimeError):
        backend.resolve("c")
    assert backend.resolve("auto") == "py"
