"""Discrete belief network inference by stochastic simulation.

Five sampling schemes over one engine: uniform forward sampling,
likelihood weighting, Markov-blanket (Gibbs) sweeps, and stratified
variants of the first two that spread samples evenly over the instantiation
space via nested prefix intervals.  An exact enumeration oracle, network
generator and benchmark CLI round out the package.
"""

from .errors import (DegenerateBlanketError, EnumerationGuardError,
                     NetworkError, ParseError, ValidationError,
                     ZeroEvidenceError, ZeroScoreError)
from .model import (Network, Variable, absorb_evidence, build_tree,
                    cpt_lookup, load_evidence, load_network, ordering_weight,
                    save_evidence, save_network, topological_order)
from .netgen import GenConfig, generate, random_cpts, random_polytree
from .oracle import (blanket_conditional, exact_marginals, joint_probability,
                     prefix_interval)
from .samplers import (RunConfig, RunResult, RunStats, SchemeKind,
                       ScoringRule, lw_draw, pearl_step, run, simple_draw)
from .scoring import (BeliefScores, WeightedSample, blanket_update,
                      divergence, merge, normalize, simple_update)
from .stratified import (assignment_bound, required_samples, restart_search,
                         strat_init, strat_next)

__version__ = "0.1.0"


def active_backend():
    """Name of the backend a default-configured run would use."""
    from . import backend
    return backend.resolve("auto")
