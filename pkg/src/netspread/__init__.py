"""Influence estimation on networks via dynamic message passing.

Estimators for the expected spread of independent-cascade and stochastic
linear-threshold diffusion, with Monte-Carlo and exact enumeration
references, structural bound certificates, and generators plus a CLI for
benchmarks.
"""

from .bounds import (BoundBracket, ExactnessCertificate, exactness_certificate,
                     girth, spanning_tree_lower_bound)
from .dmp_ic import (FixedPointConfig, MessageState, dmp_est, dmp_inf,
                     dmp_marginals, dmp_messages, dmp_step, initial_messages)
from .dmp_lt import LtParameters, LtState, lt_estimate, lt_initial_state, lt_step
from .errors import GraphFormatError, InputError, InvariantViolation
from .generators import GenSpec, generate, random_seed_set
from .graphs import (DirectedGraph, InitialCondition, MarginalReport,
                     influence_from_marginals, parse_graph,
                     parse_initial_condition, parse_node_values, serialize_graph)
from .montecarlo import (McReport, delta_p, ic_mc_marginals, ic_simulate_once,
                         lt_mc_marginals, lt_simulate_once, sample_live_arcs)
from .oracle import exact_cavity_messages, exact_marginals, lt_exact_marginals

__version__ = "0.1.0"

__all__ = [
    "BoundBracket", "DirectedGraph", "ExactnessCertificate", "FixedPointConfig",
    "GenSpec", "GraphFormatError", "InitialCondition", "InputError",
    "InvariantViolation", "LtParameters", "LtState", "MarginalReport",
    "McReport", "MessageState", "delta_p", "dmp_est", "dmp_inf",
    "dmp_marginals", "dmp_messages", "dmp_step", "exact_cavity_messages",
    "exact_marginals", "exactness_certificate", "generate", "girth",
    "ic_mc_marginals", "ic_simulate_once", "influence_from_marginals",
    "initial_messages", "lt_estimate", "lt_exact_marginals", "lt_initial_state",
    "lt_mc_marginals", "lt_simulate_once", "lt_step", "parse_graph",
    "parse_initial_condition", "parse_node_values", "random_seed_set",
    "sample_live_arcs", "serialize_graph", "spanning_tree_lower_bound",
]
