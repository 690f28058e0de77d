"""Random polytree generation with random strictly positive CPTs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Network, Variable

# CPT entries are floored at this value and renormalized so every scheme
# (including the Markov blanket one) is well posed on generated networks
CPT_FLOOR = 1e-3


@dataclass
class GenConfig:
    n: int
    arity: int = 2               # or a sequence of per-variable arities
    seed: int = 0


def _arities(cfg):
    if np.isscalar(cfg.arity):
        return [int(cfg.arity)] * cfg.n
    if len(cfg.arity) != cfg.n:
        raise ValueError("need one arity per variable")
    return [int(a) for a in cfg.arity]


def random_polytree(cfg):
    """Parent lists of a random tree-shaped DAG with arcs low id -> high id.

    The first arc joins two random nodes; every further arc joins a random
    already-connected node to a random unconnected one, until all n-1 arcs
    are placed.  The underlying undirected graph is a connected tree.
    """
    if cfg.n < 2:
        raise ValueError("need at least two variables")
    rng = np.random.default_rng(cfg.seed)
    a, b = rng.choice(cfg.n, size=2, replace=False)
    arcs = [(min(a, b), max(a, b))]
    connected = sorted({int(a), int(b)})
    unconnected = sorted(set(range(cfg.n)) - set(connected))
    while unconnected:
        u = connected[rng.integers(len(connected))]
        w = unconnected[rng.integers(len(unconnected))]
        arcs.append((min(u, w), max(u, w)))
        connected.append(w)
        connected.sort()
        unconnected.remove(w)
    parents = [[] for _ in range(cfg.n)]
    for lo, hi in arcs:
        parents[hi].append(int(lo))
    return [sorted(p) for p in parents]


def _random_row(rng, arity):
    # uniform on the probability simplex, then floored and renormalized
    if arity == 2:
        u = rng.random()
        row = np.array([u, 1.0 - u])
    else:
        cuts = np.sort(rng.random(arity - 1))
        row = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    row = np.maximum(row, CPT_FLOOR)
    return row / row.sum()


def random_cpts(parents, cfg):
    """Fill a structure with simplex-uniform, strictly positive CPT rows."""
    rng = np.random.default_rng(cfg.seed + 1)
    arities = _arities(cfg)
    variables = [Variable(i, f"x{i}", arities[i]) for i in range(cfg.n)]
    cpts = []
    for i in range(cfg.n):
        n_rows = 1
        for p in parents[i]:
            n_rows *= arities[p]
        cpts.append(np.vstack([_random_row(rng, arities[i])
                               for _ in range(n_rows)]))
    return Network(f"poly{cfg.n}-{cfg.seed}", variables, parents, cpts)


def generate(cfg):
    """Random polytree network: structure plus CPTs from one seed."""
    if cfg.n == 1:
        parents = [[]]
    else:
        parents = random_polytree(cfg)
    return random_cpts(parents, cfg)
