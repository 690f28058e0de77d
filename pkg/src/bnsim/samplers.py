"""The five simulation schemes behind a single run entry point.

All schemes share the same shape: an initialization step, ``m`` weighted
samples, a scoring rule applied per sample, and a final normalization of
the scores into belief estimates.  Runs are deterministic given the seed;
the same seed produces bit-identical estimates on the compiled and the
pure-Python backend because both consume one PCG64 stream in the same
order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import stratified
from .errors import DegenerateBlanketError, ZeroScoreError
from .model import absorb_evidence, topological_order
from .scoring import WeightedSample
from .stratified import strat_init, strat_next


class SchemeKind(Enum):
    SIMPLE = "simple"
    LIKELIHOOD = "likelihood"
    PEARL = "pearl"
    STRAT_SIMPLE = "strat-simple"
    STRAT_LIKELIHOOD = "strat-likelihood"


class ScoringRule(Enum):
    SIMPLE = "simple"
    BLANKET = "blanket"


@dataclass
class RunConfig:
    """Everything that determines a run besides the network and evidence."""

    scheme: SchemeKind
    m: int
    scoring: ScoringRule = ScoringRule.SIMPLE
    seed: int = 0
    point_rule: str = stratified.MEDIAN
    weighted_ordering: bool = False
    burn_in: int = 0             # extra unscored sweeps before Pearl runs
    rep: str = "tree"            # CPT representation: "tree" or "dense"
    backend: str = "auto"        # "auto", "c" or "py"


@dataclass
class RunStats:
    samples: int
    assignments: int = 0         # per-sample variable value assignments
    init_assignments: int = 0    # assignments spent on initialization
    comparisons: int = 0         # restart-search bound comparisons
    lookups: int = 0             # CPT row fetches
    wall_ms: float = 0.0
    backend: str = "py"


@dataclass
class RunResult:
    marginals: np.ndarray        # (n, max_arity) belief estimates
    stats: RunStats
    order: np.ndarray


class RunCounters:
    """Mutable instrumentation shared by the draw operations."""

    __slots__ = ("assignments", "init_assignments", "comparisons", "lookups")

    def __init__(self):
        self.assignments = 0
        self.init_assignments = 0
        self.comparisons = 0
        self.lookups = 0


def _categorical(row, u):
    acc = 0.0
    last = len(row) - 1
    for v in range(last):
        acc += row[v]
        if u < acc:
            return v
    return last


def _categorical_mass(row, target):
    acc = 0.0
    last = len(row) - 1
    for v in range(last):
        acc += row[v]
        if target < acc:
            return v
    return last


def _blanket_row(net, values, x, rep, stats=None):
    """Unnormalized Markov blanket conditional of ``x`` and its total."""
    arity = net.variables[x].arity
    own = net.row(x, values, rep)
    if stats is not None:
        stats.lookups += 1
    out = np.empty(arity)
    saved = values[x]
    total = 0.0
    for v in range(arity):
        values[x] = v
        w = own[v]
        for c in net.children[x]:
            w *= net.row(c, values, rep)[values[c]]
            if stats is not None:
                stats.lookups += 1
        out[v] = w
        total += w
    values[x] = saved
    if total <= 0.0:
        raise DegenerateBlanketError(
            f"Markov blanket of {net.variables[x].name} has zero mass for "
            "every value")
    return out, total


def simple_draw(net, evidence, rng, rep="tree", stats=None):
    """One sample with every free variable uniform over its values.

    Evidence variables carry their observed values.  The weight is the
    full joint probability of the instantiation; the constant uniform
    selection probability cancels in normalization.
    """
    evidence = evidence or {}
    values = np.empty(net.n, dtype=np.int32)
    for i in range(net.n):
        if i in evidence:
            values[i] = evidence[i]
        else:
            arity = net.variables[i].arity
            v = int(rng.random() * arity)
            values[i] = v if v < arity else arity - 1
            if stats is not None:
                stats.assignments += 1
    p = 1.0
    for i in range(net.n):
        p *= net.row(i, values, rep)[values[i]]
        if stats is not None:
            stats.lookups += 1
    return WeightedSample(values, p)


def lw_draw(net, evidence, order, rng, rep="tree", stats=None):
    """One forward sample along a topological order.

    Free variables are drawn from their CPT rows given the already
    assigned parents; evidence variables are clamped and contribute their
    CPT entry to the weight.  With no evidence every weight is 1.
    """
    evidence = evidence or {}
    values = np.zeros(net.n, dtype=np.int32)
    p = 1.0
    for x in order:
        x = int(x)
        row = net.row(x, values, rep)
        if stats is not None:
            stats.lookups += 1
        if x in evidence:
            values[x] = evidence[x]
            p *= row[evidence[x]]
        else:
            values[x] = _categorical(row, rng.random())
            if stats is not None:
                stats.assignments += 1
    return WeightedSample(values, p)


def pearl_step(net, evidence, prev, rng, order=None, rep="tree", stats=None,
               collect_rows=None):
    """One full Gibbs sweep: resample each free variable from its blanket.

    Variables are visited in ``order`` (a plain topological order when not
    given) and resampled in place, so later variables see the new values
    of earlier ones.  Returns the post-sweep instantiation with weight 1.
    When ``collect_rows`` is a list, the blanket rows computed during the
    sweep are appended to it as ``(var, row, total)`` so scoring can reuse
    them at no extra cost.
    """
    evidence = evidence or {}
    if order is None:
        order = topological_order(net)
    values = np.array(prev, dtype=np.int32)
    for x in order:
        x = int(x)
        if x in evidence:
            continue
        out, total = _blanket_row(net, values, x, rep, stats)
        values[x] = _categorical_mass(out, rng.random() * total)
        if stats is not None:
            stats.assignments += 1
        if collect_rows is not None:
            collect_rows.append((x, out, total))
    return WeightedSample(values, 1.0)


def _score_simple(table, values, p, n):
    for i in range(n):
        table[i, values[i]] += p


def _score_blanket(table, net, values, p, evidence, rep, stats):
    for i in range(net.n):
        if i in evidence:
            table[i, values[i]] += p
        else:
            out, total = _blanket_row(net, values, i, rep, stats)
            for v in range(len(out)):
                table[i, v] += p * (out[v] / total)


def _run_python(net, evidence, order, cfg):
    """Reference implementation of the sampling loops.

    The compiled kernel mirrors this function operation for operation;
    divergent results between the two are a bug.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    counters = RunCounters()
    n = net.n
    table = np.zeros((n, net.max_arity()))
    total_weight = 0.0
    blanket = cfg.scoring is ScoringRule.BLANKET
    scheme = cfg.scheme

    if scheme in (SchemeKind.SIMPLE, SchemeKind.LIKELIHOOD):
        for _ in range(cfg.m):
            if scheme is SchemeKind.SIMPLE:
                ws = simple_draw(net, evidence, rng, cfg.rep, counters)
            else:
                ws = lw_draw(net, evidence, order, rng, cfg.rep, counters)
            total_weight += ws.p
            if blanket:
                _score_blanket(table, net, ws.values, ws.p, evidence,
                               cfg.rep, counters)
            else:
                _score_simple(table, ws.values, ws.p, n)

    elif scheme is SchemeKind.PEARL:
        before = counters.assignments
        ws = lw_draw(net, evidence, order, rng, cfg.rep, counters)
        values = ws.values
        for _ in range(cfg.burn_in):
            values = pearl_step(net, evidence, values, rng, order, cfg.rep,
                                counters).values
        counters.init_assignments += counters.assignments - before
        counters.assignments = before
        for _ in range(cfg.m):
            rows = [] if blanket else None
            values = pearl_step(net, evidence, values, rng, order, cfg.rep,
                                counters, collect_rows=rows).values
            total_weight += 1.0
            if blanket:
                for x, out, tot in rows:
                    for v in range(len(out)):
                        table[x, v] += out[v] / tot
                for x in evidence:
                    table[x, evidence[x]] += 1.0
            else:
                _score_simple(table, values, 1.0, n)

    else:
        proposal = (stratified.UNIFORM if scheme is SchemeKind.STRAT_SIMPLE
                    else stratified.CONDITIONAL)
        state = strat_init(net, evidence, order, proposal, cfg.m,
                           cfg.point_rule, cfg.rep)
        for _ in range(cfg.m):
            ws = strat_next(state, rng)
            total_weight += ws.p
            if blanket:
                _score_blanket(table, net, ws.values, ws.p, evidence,
                               cfg.rep, counters)
            else:
                _score_simple(table, ws.values, ws.p, n)
        counters.assignments += state.assignments
        counters.init_assignments += state.init_assignments
        counters.comparisons += state.comparisons
        counters.lookups += state.lookups

    return table, total_weight, counters


def run(net, evidence, cfg):
    """Execute a scheme and normalize the scores into belief estimates.

    Evidence is absorbed into the network first, the variable ordering is
    derived (heuristically when configured), and the sampling loop runs on
    the selected backend.  Evidence variables come back as point-mass
    rows.  Raises ``ZeroScoreError`` when every sample had weight zero.
    """
    if cfg.m < 1:
        raise ValueError("need at least one sample")
    evidence = dict(evidence or {})
    absorbed = absorb_evidence(net, evidence)
    order = topological_order(absorbed, cfg.weighted_ordering)

    from . import backend
    chosen = backend.resolve(cfg.backend)
    start = time.perf_counter()
    if chosen == "c":
        table, total_weight, counters = backend.run_compiled(
            absorbed, evidence, order, cfg)
    else:
        table, total_weight, counters = _run_python(
            absorbed, evidence, order, cfg)
    wall_ms = (time.perf_counter() - start) * 1000.0

    if not np.isfinite(total_weight) or total_weight <= 0.0:
        raise ZeroScoreError(
            f"all {cfg.m} samples had weight zero; estimates undefined")
    sums = table.sum(axis=1, keepdims=True)
    marginals = table / sums
    stats = RunStats(samples=cfg.m,
                     assignments=counters.assignments,
                     init_assignments=counters.init_assignments,
                     comparisons=counters.comparisons,
                     lookups=counters.lookups,
                     wall_ms=wall_ms,
                     backend=chosen)
    return RunResult(marginals=marginals, stats=stats, order=order)
