"""Brute-force exact computations used as ground truth.

Everything here trades speed for transparency: joints are plain products,
posteriors are full enumerations, and prefix intervals are explicit sums
over the instantiation space.  Enumeration is guarded by a variable-count
limit; the one concession to scale is a forward marginal sweep that is
exact for singly connected networks without evidence.
"""

from __future__ import annotations

import bisect
import itertools

import numpy as np

from .errors import (DegenerateBlanketError, EnumerationGuardError,
                     ZeroEvidenceError)

ENUM_GUARD = 25

TRUE_JOINT = "joint"
PROPOSAL = "proposal"

UNIFORM = "uniform"
CONDITIONAL = "conditional"


def _check_guard(net, max_vars):
    if net.n > max_vars:
        raise EnumerationGuardError(
            f"enumeration over {net.n} variables exceeds the guard "
            f"({max_vars}); raise max_vars to force it")


def joint_probability(net, values):
    """Product of the CPT entries selected by a full instantiation."""
    p = 1.0
    for i in range(net.n):
        p *= net.dense_row(i, values)[values[i]]
    return p


def instantiations(net, evidence=None, max_vars=ENUM_GUARD):
    """Yield every full instantiation consistent with the evidence."""
    _check_guard(net, max_vars)
    evidence = evidence or {}
    free = [i for i in range(net.n) if i not in evidence]
    base = np.zeros(net.n, dtype=np.int32)
    for x, v in evidence.items():
        base[x] = v
    for combo in itertools.product(*(range(net.variables[i].arity)
                                     for i in free)):
        s = base.copy()
        s[free] = combo
        yield s


def _is_singly_connected(net):
    # union-find over the undirected arcs; a repeated root means a loop
    root = list(range(net.n))

    def find(a):
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    for i in range(net.n):
        for p in net.parents[i]:
            ra, rb = find(p), find(i)
            if ra == rb:
                return False
            root[ra] = rb
    return True


def _forward_marginals(net):
    # exact for singly connected structure with no evidence: parents of a
    # node are then marginally independent
    width = net.max_arity()
    out = np.zeros((net.n, width))
    from .model import topological_order
    for i in topological_order(net):
        parents = net.parents[i]
        arity = net.variables[i].arity
        if not parents:
            out[i, :arity] = net.cpts[i][0]
            continue
        acc = np.zeros(arity)
        for ridx, combo in enumerate(itertools.product(
                *(range(net.variables[p].arity) for p in parents))):
            w = 1.0
            for p, v in zip(parents, combo):
                w *= out[p, v]
            acc += w * net.cpts[i][ridx]
        out[i, :arity] = acc
    return out


def exact_marginals(net, evidence=None, method="auto", max_vars=ENUM_GUARD):
    """Posterior marginal row for every variable.

    ``method`` is ``"enumerate"`` (full enumeration, guarded),
    ``"forward"`` (topological sweep; exact only for singly connected
    networks with no evidence) or ``"auto"``, which enumerates when the
    guard allows and falls back to the sweep when it applies.

    Raises ``ZeroEvidenceError`` when the evidence has probability zero.
    """
    evidence = evidence or {}
    if method == "auto":
        if net.n <= max_vars:
            method = "enumerate"
        elif not evidence and _is_singly_connected(net):
            method = "forward"
        else:
            _check_guard(net, max_vars)
    if method == "forward":
        if evidence:
            raise ValueError("forward marginals do not support evidence")
        if not _is_singly_connected(net):
            raise ValueError("forward marginals need a singly connected "
                             "network")
        return _forward_marginals(net)

    width = net.max_arity()
    out = np.zeros((net.n, width))
    total = 0.0
    for s in instantiations(net, evidence, max_vars):
        w = joint_probability(net, s)
        total += w
        for i in range(net.n):
            out[i, s[i]] += w
    if total <= 0.0:
        raise ZeroEvidenceError("evidence has probability zero")
    out /= total
    for x, v in evidence.items():
        out[x] = 0.0
        out[x, v] = 1.0
    return out


def proposal_weight(net, values, proposal, evidence=None):
    """Proposal-measure mass of one instantiation.

    Product over non-evidence variables of the per-variable selection
    probability: the reciprocal arity for the uniform proposal, the CPT
    entry given the instantiated parents for the conditional one.
    Evidence variables contribute a factor of one.
    """
    evidence = evidence or {}
    q = 1.0
    for i in range(net.n):
        if i in evidence:
            continue
        if proposal == UNIFORM:
            q *= 1.0 / net.variables[i].arity
        else:
            q *= net.dense_row(i, values)[values[i]]
    return q


def _measure_weight(net, values, measure, proposal, evidence):
    if measure == TRUE_JOINT:
        return joint_probability(net, values)
    return proposal_weight(net, values, proposal, evidence)


def prefix_interval(net, order, values, k, measure=TRUE_JOINT,
                    proposal=CONDITIONAL, evidence=None,
                    max_vars=ENUM_GUARD):
    """Interval [lo, hi] of the k-prefix of ``values`` by explicit summation.

    Instantiations are ordered lexicographically along ``order``; ``lo`` is
    the total measure of those whose k-prefix is strictly smaller and
    ``hi`` adds the measure of the prefix's own cylinder.  ``k = 0`` gives
    [0, 1] up to the measure's total mass.  Under ``measure="proposal"``
    only evidence-consistent instantiations carry mass.
    """
    target = tuple(int(values[order[t]]) for t in range(k))
    lo = 0.0
    mass = 0.0
    enum_ev = evidence if measure == PROPOSAL else None
    for s in instantiations(net, enum_ev, max_vars):
        key = tuple(int(s[order[t]]) for t in range(k))
        if key < target:
            lo += _measure_weight(net, s, measure, proposal, evidence)
        elif key == target:
            mass += _measure_weight(net, s, measure, proposal, evidence)
    return lo, lo + mass


class PrefixIntervalTable:
    """Precomputed prefix intervals for one (network, order, measure) triple.

    Enumerates the instantiation space once in lexicographic order along
    ``order`` and answers interval queries from cumulative sums; agrees
    with ``prefix_interval`` up to float summation order.
    """

    def __init__(self, net, order, measure=TRUE_JOINT, proposal=CONDITIONAL,
                 evidence=None, max_vars=ENUM_GUARD):
        _check_guard(net, max_vars)
        self.order = [int(x) for x in order]
        keys = []
        cum = [0.0]
        running = 0.0
        # product over positions in order, most significant first, yields
        # the instantiations already lexicographically sorted
        evidence = evidence or {}
        ranges = []
        for t in self.order:
            if measure == PROPOSAL and t in evidence:
                ranges.append((evidence[t],))
            else:
                ranges.append(range(net.variables[t].arity))
        s = np.zeros(net.n, dtype=np.int32)
        for combo in itertools.product(*ranges):
            for t, v in zip(self.order, combo):
                s[t] = v
            keys.append(combo)
            running += _measure_weight(net, s, measure, proposal, evidence)
            cum.append(running)
        self.keys = keys
        self.cum = cum

    def query(self, values, k):
        prefix = tuple(int(values[self.order[t]]) for t in range(k))
        if k == 0:
            return 0.0, self.cum[-1]
        lo_idx = bisect.bisect_left(self.keys, prefix)
        hi_idx = bisect.bisect_left(self.keys,
                                    prefix[:-1] + (prefix[-1] + 1,))
        return self.cum[lo_idx], self.cum[hi_idx]


def blanket_conditional(net, values, x):
    """Normalized conditional of ``x`` given its Markov blanket in ``values``.

    Row entries are proportional to the variable's own CPT entry times the
    CPT entries of all its children under each candidate value.  Equals the
    full conditional given all other variables.
    """
    arity = net.variables[x].arity
    own = net.dense_row(x, values)
    out = np.empty(arity)
    work = np.array(values, dtype=np.int32)
    for v in range(arity):
        work[x] = v
        w = own[v]
        for c in net.children[x]:
            w *= net.dense_row(c, work)[work[c]]
        out[v] = w
    total = out.sum()
    if total <= 0.0:
        raise DegenerateBlanketError(
            f"Markov blanket of {net.variables[x].name} has zero mass for "
            "every value")
    return out / total
