"""Message-passing influence estimators for the independent cascade model.

Per-arc messages carry the probability that the arc's source is active given
that its target is not.  One synchronous sweep updates every message from the
previous buffer:

    m[j->i](t) = 1 - (1 - p0[j]) * prod_{l in nbrs(j) \\ i} (1 - b[l->j] * m[l->j](t-1))

with m[i->j](0) = p0[i].  Node marginals apply the same product over the full
in-neighborhood.  Estimates are exact on trees and upper-bound the true
marginals on loopy graphs; a sweep costs Theta(|arcs|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .graphs import MarginalReport

__all__ = [
    "MessageState",
    "FixedPointConfig",
    "initial_messages",
    "dmp_step",
    "dmp_messages",
    "dmp_marginals",
    "dmp_est",
    "dmp_inf",
]


@dataclass(frozen=True)
class MessageState:
    """Synchronous per-arc messages at one time step, indexed by arc id."""

    t: int
    messages: np.ndarray


@dataclass(frozen=True)
class FixedPointConfig:
    """Stopping rule for the fixed-point iteration.

    tolerance: absolute residual sum(|new - old|) over arcs; defaults to
    1e-9 * arc_count.  max_sweeps defaults to min(20 * node_count, 1e6).
    """

    tolerance: float | None = None
    max_sweeps: int | None = None

    def resolved(self, graph):
        tol = self.tolerance if self.tolerance is not None else 1e-9 * max(graph.arc_count, 1)
        sweeps = self.max_sweeps if self.max_sweeps is not None else min(20 * max(graph.node_count, 1), 10**6)
        if tol <= 0:
            raise InputError("tolerance must be positive")
        if sweeps < 1:
            raise InputError("max_sweeps must be at least 1")
        return float(tol), int(sweeps)


def _check_p0(graph, p0):
    arr = np.asarray(p0.p0 if hasattr(p0, "p0") else p0, dtype=np.float64)
    if arr.size != graph.node_count:
        raise InputError("initial condition length does not match node count")
    return arr


def initial_messages(graph, p0):
    """Messages at t = 0: each arc starts at its source's initial probability."""
    p0 = _check_p0(graph, p0)
    return MessageState(t=0, messages=p0[graph.src].copy())


class _SweepBuffers:
    def __init__(self, graph):
        a = graph.arc_count
        self.loo = np.empty(a)
        self.binbuf = np.empty(graph._scatter_targets.size + 1)
        self.full = np.empty(graph.node_count)
        self.out = np.empty(a)


def _sweep_into(graph, omp0_dst, omp0_unpaired, msg, buffers):
    _kernels.ic_sweep(graph.in_offsets, graph.b, omp0_dst,
                      graph._slot, graph._scatter_targets,
                      graph._unpaired, graph._unpaired_src, omp0_unpaired,
                      msg, buffers.loo, buffers.binbuf, buffers.full, buffers.out)
    return buffers.out


def dmp_step(graph, p0, state):
    """Advance the message state by one synchronous sweep."""
    p0 = _check_p0(graph, p0)
    buffers = _SweepBuffers(graph)
    omp0_dst = 1.0 - p0[graph.dst]
    omp0_unpaired = 1.0 - p0[graph.src[graph._unpaired]]
    out = _sweep_into(graph, omp0_dst, omp0_unpaired, state.messages, buffers)
    return MessageState(t=state.t + 1, messages=out.copy())


def dmp_messages(graph, p0, t):
    """Messages after t sweeps from the initial condition."""
    if t < 0:
        raise InputError("time must be non-negative")
    state = initial_messages(graph, p0)
    p0 = _check_p0(graph, p0)
    buffers = _SweepBuffers(graph)
    omp0_dst = 1.0 - p0[graph.dst]
    omp0_unpaired = 1.0 - p0[graph.src[graph._unpaired]]
    msg = state.messages
    for _ in range(t):
        out = _sweep_into(graph, omp0_dst, omp0_unpaired, msg, buffers)
        msg, buffers.out = out, msg
    return MessageState(t=int(t), messages=msg)


def _marginals_from(graph, p0, messages):
    full = np.empty(graph.node_count)
    _kernels.ic_node_products(graph.in_offsets, graph.b, messages, full)
    return 1.0 - (1.0 - p0) * full


def dmp_marginals(graph, p0, state):
    """Node marginals at horizon state.t + 1, from messages at state.t."""
    p0 = _check_p0(graph, p0)
    marg = _marginals_from(graph, p0, state.messages)
    return MarginalReport(t=state.t + 1, marginals=marg, sigma=float(marg.sum())).validate(p0)


def dmp_est(graph, p0, horizon, trajectory=False):
    """Finite-horizon influence estimate (messages swept to horizon - 1).

    With trajectory=True the report also carries (t, sigma, marginals) for
    every intermediate horizon 0..T, at no extra sweep cost.
    """
    if horizon < 0 or horizon != int(horizon):
        raise InputError("horizon must be a non-negative integer")
    horizon = int(horizon)
    p0 = _check_p0(graph, p0)
    steps = []
    if horizon == 0 or trajectory:
        steps.append((0, float(p0.sum()), p0.copy()))
    if horizon == 0:
        report = MarginalReport(t=0, marginals=p0.copy(), sigma=float(p0.sum()),
                                trajectory=tuple(steps) if trajectory else ())
        return report.validate(p0)

    buffers = _SweepBuffers(graph)
    omp0_dst = 1.0 - p0[graph.dst]
    omp0_unpaired = 1.0 - p0[graph.src[graph._unpaired]]
    msg = p0[graph.src].copy()
    for t in range(1, horizon):
        if trajectory:
            marg = _marginals_from(graph, p0, msg)
            steps.append((t, float(marg.sum()), marg))
        out = _sweep_into(graph, omp0_dst, omp0_unpaired, msg, buffers)
        msg, buffers.out = out, msg
    marg = _marginals_from(graph, p0, msg)
    report = MarginalReport(t=horizon, marginals=marg, sigma=float(marg.sum()),
                            trajectory=tuple(steps + [(horizon, float(marg.sum()), marg)])
                            if trajectory else ())
    return report.validate(p0)


def dmp_inf(graph, p0, config=None):
    """Fixed-point influence estimate for the infinite-time horizon.

    Iterates synchronous sweeps until the residual sum(|new - old|) drops to
    the tolerance.  Messages increase monotonically and are bounded, so the
    iteration converges; the flag guards tolerances below float resolution.
    """
    config = config or FixedPointConfig()
    tol, max_sweeps = config.resolved(graph)
    p0 = _check_p0(graph, p0)

    msg = p0[graph.src].copy()
    sweeps = 0
    residual = 0.0
    converged = True
    if graph.arc_count:
        buffers = _SweepBuffers(graph)
        omp0_dst = 1.0 - p0[graph.dst]
        omp0_unpaired = 1.0 - p0[graph.src[graph._unpaired]]
        converged = False
        while sweeps < max_sweeps:
            out = _sweep_into(graph, omp0_dst, omp0_unpaired, msg, buffers)
            residual = float(np.abs(out - msg).sum())
            msg, buffers.out = out, msg
            sweeps += 1
            if residual <= tol:
                converged = True
                break

    marg = _marginals_from(graph, p0, msg)
    report = MarginalReport(t=math.inf, marginals=marg, sigma=float(marg.sum()),
                            converged=converged, sweeps=sweeps, residual=residual)
    return report.validate(p0)
