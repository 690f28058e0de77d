import pytest

from bnsim import load_network
from bnsim.netgen import GenConfig, generate

FIXTURE3_TEXT = """\
# three binary variables, arcs a->b, a->c, b->c
net fixture3
var a 2
var b 2
var c 2
parents b a
parents c a b
cpt a
0.5 0.5
cpt b
0.3 0.7
0.2 0.8
cpt c
0.5 0.5
0.5 0.5
0.5 0.5
0.5 0.5
"""


@pytest.fixture
def fixture3():
    return load_network(FIXTURE3_TEXT)


@pytest.fixture
def fixture3_text():
    return FIXTURE3_TEXT


def make_polytree(n, seed, arity=2):
    return generate(GenConfig(n=n, arity=arity, seed=seed))


def random_net(rng, n, max_arity=3):
    """Small random DAG (not necessarily a polytree) with random CPTs.

    Parents are sampled from the lower-numbered variables, so ids are
    already topological.
    """
    from bnsim.model import Network, Variable

    arities = rng.integers(2, max_arity + 1, size=n)
    variables = [Variable(i, f"v{i}", int(arities[i])) for i in range(n)]
    parents = []
    for i in range(n):
        k = int(rng.integers(0, min(i, 3) + 1))
        parents.append(sorted(rng.choice(i, size=k, replace=False).tolist())
                       if k else [])
    cpts = []
    for i in range(n):
        n_rows = 1
        for p in parents[i]:
            n_rows *= int(arities[p])
        raw = rng.random((n_rows, int(arities[i]))) + 1e-3
        cpts.append(raw / raw.sum(axis=1, keepdims=True))
    return Network(f"rand{n}", variables, parents, cpts)


def random_evidence(rng, net, count=1):
    ids = rng.choice(net.n, size=min(count, net.n), replace=False)
    return {int(i): int(rng.integers(net.variables[int(i)].arity))
            for i in ids}
