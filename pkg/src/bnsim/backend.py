"""Backend selection: compiled kernel with a pure-Python fallback.

The compiled extension is used whenever it imported successfully; set
``BNSIM_BACKEND=py`` (or ``RunConfig.backend="py"``) to force the
fallback, ``=c`` to fail loudly when the extension is missing.  Both
backends produce bit-identical results for the same seed.
"""

from __future__ import annotations

import os

import numpy as np

from ._flatnet import flatten

try:
    from . import _kernels
except ImportError:          # pure-Python install or failed build
    _kernels = None

HAVE_COMPILED = _kernels is not None

_SCHEME_IDS = {
    "simple": 0,
    "likelihood": 1,
    "pearl": 2,
    "strat-simple": 3,
    "strat-likelihood": 4,
}


def resolve(requested="auto"):
    """Map a backend request to the backend that will actually run.

    An explicit request wins; ``BNSIM_BACKEND`` steers the ``auto`` case.
    """
    choice = requested
    if choice == "auto":
        choice = os.environ.get("BNSIM_BACKEND", "").strip() or "auto"
    if choice == "auto":
        return "c" if HAVE_COMPILED else "py"
    if choice == "c":
        if not HAVE_COMPILED:
            raise RuntimeError(
                "compiled backend requested but bnsim._kernels is not "
                "available; reinstall with the extension or use backend="
                "'py'")
        return "c"
    if choice == "py":
        return "py"
    raise ValueError(f"unknown backend {choice!r}")


def run_compiled(net, evidence, order, cfg):
    """Execute one run on the compiled kernel."""
    from .samplers import RunCounters, ScoringRule

    flat = flatten(net, evidence, order, cfg.rep)
    bitgen = np.random.PCG64(cfg.seed)
    table = np.zeros((net.n, net.max_arity()))
    kernel = _kernels.Kernel(flat, bitgen)
    total = kernel.run(_SCHEME_IDS[cfg.scheme.value],
                       1 if cfg.scoring is ScoringRule.BLANKET else 0,
                       cfg.m,
                       1 if cfg.point_rule == "random" else 0,
                       cfg.burn_in,
                       table)
    counters = RunCounters()
    (counters.assignments, counters.init_assignments,
     counters.comparisons, counters.lookups) = kernel.counters()
    return table, total, counters
