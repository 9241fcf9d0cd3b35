"""Message-passing estimator for the progressive stochastic threshold model.

Dynamics: an inactive node i whose active in-neighbor weight sum reaches its
threshold (sum_{j} b[j->i] x_j >= theta_i, ties pass) flips active with
probability eta_i at each step; active nodes stay active.

The estimator tracks, per node and per arc, the probability M(t) that the
threshold condition holds at time t under the cavity product measure over
in-neighbor messages.  Because the dynamics are progressive, the threshold
event is monotone in time, so the distribution of its first-passage time is
(M(t) - M(t-1)) and the survival of a node that was not initially active is

    u(t+1) = (1 - M(t)) + sum_{s<=t} (M(s) - M(s-1)) * (1 - eta)^(t+1-s),

accumulated incrementally.  Marginals and messages follow as
1 - (1 - p0) * u.  Exact on trees; no bound holds on loopy graphs for this
model (unlike the cascade estimator), so none is claimed.

Threshold-met probabilities are configuration sums over 2^deg in-neighbor
subsets; in-degrees above the cap raise an error rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graphs import MarginalReport

__all__ = ["LtParameters", "LtState", "lt_initial_state", "lt_step", "lt_estimate",
           "DEFAULT_DEGREE_CAP"]

DEFAULT_DEGREE_CAP = 20

WEIGHT_SUM_SLACK = 1e-12


@dataclass(frozen=True)
class LtParameters:
    """Per-node thresholds and activation probabilities; weights ride on arcs."""

    theta: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64).reshape(-1)
        eta = np.asarray(self.eta, dtype=np.float64).reshape(-1)
        for name, arr in (("theta", theta), ("eta", eta)):
            if arr.size and (np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr))):
                raise InputError(f"{name} values must lie in [0, 1]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def uniform(cls, node_count, theta=0.5, eta=1.0):
        return cls(np.full(node_count, float(theta)), np.full(node_count, float(eta)))

    def check_against(self, graph):
        if self.theta.size != graph.node_count or self.eta.size != graph.node_count:
            raise InputError("parameter vectors do not match node count")
        in_sums = np.zeros(graph.node_count)
        np.add.at(in_sums, graph.dst, graph.b)
        worst = int(np.argmax(in_sums)) if in_sums.size else 0
        if in_sums.size and in_sums[worst] > 1.0 + WEIGHT_SUM_SLACK:
            raise InputError(
                f"in-weights of node {worst} sum to {in_sums[worst]:.17g} > 1")
        return self


@dataclass(frozen=True)
class LtState:
    """Marginals, cavity messages, and the survival accumulators behind them.

    survival u = P(not yet activated | not initially active); residual r and
    met_prev are the running discounted first-passage sum and last M value.
    """

    t: int
    node_marginals: np.ndarray
    arc_messages: np.ndarray
    node_survival: np.ndarray
    node_residual: np.ndarray
    node_met_prev: np.ndarray
    arc_survival: np.ndarray
    arc_residual: np.ndarray
    arc_met_prev: np.ndarray


def _p0_array(graph, p0):
    arr = np.asarray(p0.p0 if hasattr(p0, "p0") else p0, dtype=np.float64)
    if arr.size != graph.node_count:
        raise InputError("initial condition length does not match node count")
    return arr


def _check_degrees(graph, cap):
    degrees = graph.in_degree()
    if degrees.size and degrees.max() > cap:
        node = int(np.argmax(degrees))
        raise InputError(
            f"in-degree {int(degrees[node])} of node {node} exceeds the "
            f"configuration-sum cap {cap}")


def lt_initial_state(graph, p0):
    p0 = _p0_array(graph, p0)
    a = graph.arc_count
    return LtState(
        t=0,
        node_marginals=p0.copy(),
        arc_messages=p0[graph.src].copy(),
        node_survival=np.ones(graph.node_count),
        node_residual=np.zeros(graph.node_count),
        node_met_prev=np.zeros(graph.node_count),
        arc_survival=np.ones(a),
        arc_residual=np.zeros(a),
        arc_met_prev=np.zeros(a),
    )


def _threshold_prob(messages, weights, theta):
    """P(sum_k w_k x_k >= theta) for independent Bernoulli x_k ~ messages.

    Enumerates the 2^deg configurations incrementally; weights of a subset are
    summed in in-arc order, with exact >= semantics at ties.
    """
    probs = np.array([1.0])
    sums = np.array([0.0])
    for p, w in zip(messages, weights):
        probs = np.concatenate([probs * (1.0 - p), probs * p])
        sums = np.concatenate([sums, sums + w])
    total = probs.sum()
    assert abs(total - 1.0) <= 1e-12, "configuration weights must sum to 1"
    return min(1.0, float(probs[sums >= theta].sum()))


def lt_step(graph, params, p0, state, degree_cap=DEFAULT_DEGREE_CAP):
    """One synchronous update of marginals and cavity messages."""
    params.check_against(graph)
    _check_degrees(graph, degree_cap)
    p0 = _p0_array(graph, p0)
    theta, eta = params.theta, params.eta
    msg = state.arc_messages

    met_node = np.empty(graph.node_count)
    met_arc = np.empty(graph.arc_count)
    for i in range(graph.node_count):
        s, e = graph.in_offsets[i], graph.in_offsets[i + 1]
        in_msgs = msg[s:e]
        in_w = graph.b[s:e]
        met_node[i] = _threshold_prob(in_msgs, in_w, theta[i])
        # cavity sums for arcs out of i exclude the target's reverse in-arc
        for pos in range(graph.out_offsets[i], graph.out_offsets[i + 1]):
            arc = graph.out_arcs[pos]
            r = graph.rev[arc]
            if r < 0:
                met_arc[arc] = met_node[i]
            else:
                keep = np.arange(s, e) != r
                met_arc[arc] = _threshold_prob(in_msgs[keep], in_w[keep], theta[i])

    eta_arc = eta[graph.src]
    node_residual = (1.0 - eta) * (state.node_residual + (met_node - state.node_met_prev))
    node_survival = np.clip((1.0 - met_node) + node_residual, 0.0, 1.0)
    arc_residual = (1.0 - eta_arc) * (state.arc_residual + (met_arc - state.arc_met_prev))
    arc_survival = np.clip((1.0 - met_arc) + arc_residual, 0.0, 1.0)

    return LtState(
        t=state.t + 1,
        node_marginals=1.0 - (1.0 - p0) * node_survival,
        arc_messages=1.0 - (1.0 - p0[graph.src]) * arc_survival,
        node_survival=node_survival,
        node_residual=node_residual,
        node_met_prev=met_node,
        arc_survival=arc_survival,
        arc_residual=arc_residual,
        arc_met_prev=met_arc,
    )


def lt_estimate(graph, params, p0, horizon, degree_cap=DEFAULT_DEGREE_CAP):
    """Marginals and influence after `horizon` synchronous steps."""
    if horizon < 0 or horizon != int(horizon):
        raise InputError("horizon must be a non-negative integer")
    params.check_against(graph)
    _check_degrees(graph, degree_cap)
    p0 = _p0_array(graph, p0)
    state = lt_initial_state(graph, p0)
    for _ in range(int(horizon)):
        state = lt_step(graph, params, p0, state, degree_cap=degree_cap)
    marg = state.node_marginals.copy()
    return MarginalReport(t=int(horizon), marginals=marg,
                          sigma=float(marg.sum())).validate(p0)
