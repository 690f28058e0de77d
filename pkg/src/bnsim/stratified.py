"""Stratified sample generation via nested prefix intervals.

The unit interval is split into ``m`` equal strata under a proposal
measure; one point per stratum maps to an instantiation through the
nested intervals of its value prefixes.  Between consecutive points only a
suffix of the variables changes, found by a bounded binary search over the
interval upper bounds and regenerated by walking values until the bounds
enclose the point again.  Intervals are treated as closed on the right:
a point equal to an upper bound stays with the earlier instantiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scoring import WeightedSample

UNIFORM = "uniform"
CONDITIONAL = "conditional"

MEDIAN = "median"
RANDOM = "random"


def _anchor_limit(n):
    # largest anchor for which the anchored probe pattern stays within the
    # ceil(log2(n+1)) + 1 comparison budget
    return 2 ** (n.bit_length() - 1) + 2


def restart_search(h, f, anchor=None):
    """Smallest position j >= 1 with ``h[j] < f``; n+1 when none exists.

    ``h`` holds the non-increasing interval upper bounds h[0..n] with
    h[0] = 1.  Returns ``(j, comparisons)``; at most
    ceil(log2(n+1)) + 1 bound comparisons are spent.  When ``anchor`` is
    given, it is probed first (restarts cluster just past the stratum
    resolution, so this saves most of the search on typical runs).
    """
    n = len(h) - 1
    comps = 0
    lo, hi = 1, n + 1
    if anchor is not None and 3 <= anchor <= min(n, _anchor_limit(n)):
        comps += 1
        if h[anchor] < f:
            hi = anchor
            comps += 1
            if h[anchor - 2] < f:
                hi = anchor - 2
            else:
                lo = anchor - 1
        else:
            lo = anchor + 1
    while lo < hi:
        mid = (lo + hi) // 2
        comps += 1
        if h[mid] < f:
            hi = mid
        else:
            lo = mid + 1
    return lo, comps


@dataclass
class StratState:
    """Mutable state of one stratified run: owned by a single generator."""

    net: object
    evidence: dict
    order: np.ndarray
    proposal: str
    m: int
    point_rule: str
    rep: str
    val: np.ndarray          # current instantiation, indexed by variable id
    l: np.ndarray            # prefix interval lower bounds, positions 0..n
    h: np.ndarray            # prefix interval upper bounds, positions 0..n
    i: int = 1               # next stratum, 1-based
    anchor: int | None = None
    assignments: int = 0
    init_assignments: int = 0
    comparisons: int = 0
    lookups: int = 0
    last_f: float = field(default=0.0, repr=False)
    last_restart: int = field(default=0, repr=False)


def strat_init(net, evidence, order, proposal, m, point_rule=MEDIAN,
               rep="tree"):
    """Initial instantiation (all zeros except evidence) and its bounds."""
    if m < 1:
        raise ValueError("need at least one stratum")
    evidence = dict(evidence or {})
    n = net.n
    val = np.zeros(n, dtype=np.int32)
    for x, v in evidence.items():
        val[x] = v
    l = np.zeros(n + 1)
    h = np.empty(n + 1)
    h[0] = 1.0
    state = StratState(net=net, evidence=evidence, order=np.asarray(order),
                       proposal=proposal, m=m, point_rule=point_rule,
                       rep=rep, val=val, l=l, h=h)
    free_seen = 0
    depth = m.bit_length() - 1   # restarts cluster at this split depth
    for j in range(1, n + 1):
        x = int(order[j - 1])
        if x in evidence:
            h[j] = h[j - 1]
            continue
        if proposal == UNIFORM:
            p0 = 1.0 / net.variables[x].arity
        else:
            p0 = net.row(x, val, state.rep)[0]
            state.lookups += 1
        h[j] = h[j - 1] * p0
        state.init_assignments += 1
        if free_seen == depth:
            state.anchor = j
        free_seen += 1
    return state


def _sample_weight(state):
    net = state.net
    if state.proposal == CONDITIONAL:
        p = 1.0
        for x in sorted(state.evidence):
            p *= net.row(x, state.val, state.rep)[state.evidence[x]]
            state.lookups += 1
        return p
    p = 1.0
    for i in range(net.n):
        p *= net.row(i, state.val, state.rep)[state.val[i]]
        state.lookups += 1
        if i not in state.evidence:
            p *= net.variables[i].arity
    return p


def strat_next(state, rng=None):
    """Generate the sample for the next stratum, advancing the state.

    Draws a point in the current stratum (its midpoint under the median
    rule), finds the first position whose interval no longer contains it,
    and rewalks values from there.  Returns the sample with its importance
    weight; the emitted instantiations are non-decreasing in the
    lexicographic order induced by the ordering.
    """
    if state.i > state.m:
        raise ValueError("all strata have been consumed")
    if state.point_rule == MEDIAN:
        u = 0.5
    else:
        u = rng.random()
    f = (u + (state.i - 1)) / state.m
    net = state.net
    n = net.n
    l, h, val = state.l, state.h, state.val
    j, comps = restart_search(h, f, state.anchor)
    state.comparisons += comps
    state.last_f = f
    state.last_restart = j
    while j <= n:
        x = int(state.order[j - 1])
        if x in state.evidence:
            l[j] = l[j - 1]
            h[j] = h[j - 1]
        else:
            arity = net.variables[x].arity
            width = h[j - 1] - l[j - 1]
            if state.proposal == UNIFORM:
                row = None
                pt = 1.0 / arity
            else:
                row = net.row(x, val, state.rep)
                state.lookups += 1
                pt = row[0]
            k = 0
            lj = l[j - 1]
            hj = lj + width * pt
            while f > hj and k < arity - 1:
                k += 1
                lj = hj
                pt = (1.0 / arity) if row is None else row[k]
                hj = lj + width * pt
            if f > hj:
                # round-off exhausted the values: pin the bound
                hj = h[j - 1]
            val[x] = k
            l[j] = lj
            h[j] = hj
            state.assignments += 1
        j += 1
    state.i += 1
    return WeightedSample(val.copy(), _sample_weight(state))


def assignment_bound(n, m):
    """Worst-case variable assignments plus search comparisons for a run.

    Counts, for binary variables, the geometric cap on reassignments of
    the high-order positions, a full rewalk of the remaining positions per
    sample, and one bounded binary search per sample.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    splits = m.bit_length() - 1
    geometric = 2 ** (splits + 1) - 2
    rewalk = max(0, n - splits - 1) * m
    searches = m * ((n - 1).bit_length() if n > 1 else 0)
    return geometric + rewalk + searches


def required_samples(a, delta, epsilon, bel):
    """Samples needed for relative error ``epsilon`` with confidence 1-delta.

    ``a`` is the maximum value of the weighting distribution and ``bel``
    the target belief.
    """
    if a <= 0 or bel <= 0:
        raise ValueError("a and bel must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    return math.ceil(a * math.log(4.0 / delta) / (epsilon ** 2 * bel))
