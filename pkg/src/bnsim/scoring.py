"""Score accumulation, normalization and the divergence quality metric."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroScoreError
from .oracle import blanket_conditional

# floor applied to estimated probabilities inside the divergence so that
# never-sampled values keep the metric finite
EST_FLOOR = 1e-12


@dataclass
class WeightedSample:
    """A full instantiation and its non-negative importance weight."""

    values: np.ndarray
    p: float


class BeliefScores:
    """Per-variable, per-value accumulators plus the total sample weight."""

    def __init__(self, net):
        self.arities = np.array([v.arity for v in net.variables],
                                dtype=np.int32)
        self.table = np.zeros((net.n, net.max_arity()))
        self.total_weight = 0.0

    def copy(self):
        out = BeliefScores.__new__(BeliefScores)
        out.arities = self.arities
        out.table = self.table.copy()
        out.total_weight = self.total_weight
        return out


def simple_update(scores, sample):
    """Credit the sample weight to each variable's sampled value."""
    for i, v in enumerate(sample.values):
        scores.table[i, v] += sample.p
    scores.total_weight += sample.p


def blanket_update(scores, net, sample, evidence=None):
    """Spread the sample weight over each variable's blanket conditional.

    Non-evidence variables receive ``p`` distributed proportionally to
    their Markov blanket conditional in the sample; evidence variables are
    credited as in ``simple_update``.  Total added mass per variable is
    exactly ``p``.
    """
    evidence = evidence or {}
    for i in range(net.n):
        if i in evidence:
            scores.table[i, sample.values[i]] += sample.p
        else:
            row = blanket_conditional(net, sample.values, i)
            scores.table[i, :len(row)] += sample.p * row
    scores.total_weight += sample.p


def merge(a, b):
    """Sum score tables from independent runs over the same network."""
    out = a.copy()
    out.table += b.table
    out.total_weight += b.total_weight
    return out


def normalize(scores):
    """Divide each variable's row by its own sum to obtain beliefs."""
    sums = scores.table.sum(axis=1, keepdims=True)
    if np.any(sums <= 0.0) or not np.all(np.isfinite(sums)):
        raise ZeroScoreError("cannot normalize: a score row has zero mass")
    return scores.table / sums


def divergence(exact, est, arities, exclude=()):
    """Mean per-variable KL divergence from exact to estimated marginals.

    Base-2 logarithm; estimated probabilities are floored at ``EST_FLOOR``
    and terms with zero exact probability contribute nothing.  Variables in
    ``exclude`` (typically the evidence) are left out of the average.
    """
    exclude = set(exclude)
    total = 0.0
    count = 0
    for i, arity in enumerate(arities):
        if i in exclude:
            continue
        count += 1
        for v in range(arity):
            p = exact[i][v]
            if p <= 0.0:
                continue
            total += p * math.log2(p / max(est[i][v], EST_FLOOR))
    if count == 0:
        return 0.0
    return total / count
