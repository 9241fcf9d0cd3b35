"""Monte-Carlo reference estimators for both diffusion models.

Independent-cascade runs use the live-edge representation: arc coins are
sampled i.i.d. with the arc's transmission probability and a node activates
iff its live-arc distance from an initially active node is within the
horizon.  Layered breadth-first propagation touches each arc at most once per
run.  Linear-threshold runs follow the progressive dynamics: an inactive node
whose active in-neighbor weight meets its threshold flips with its activation
probability each step, and active nodes stay active.

Runs are chunked (see rng) and the per-node activation counts are integers,
so merges are exact in any order: reports are bit-identical for a fixed
(seed, runs, inputs) at every thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InputError

__all__ = [
    "McReport",
    "sample_live_arcs",
    "ic_simulate_once",
    "ic_mc_marginals",
    "lt_simulate_once",
    "lt_mc_marginals",
    "delta_p",
]


@dataclass(frozen=True)
class McReport:
    """Empirical marginals with per-node Bernoulli standard errors."""

    runs: int
    rng_seed: int
    marginals: np.ndarray
    std_errors: np.ndarray
    sigma: float


def _p0_array(graph, p0):
    arr = np.asarray(p0.p0 if hasattr(p0, "p0") else p0, dtype=np.float64)
    if arr.size != graph.node_count:
        raise InputError("initial condition length does not match node count")
    return arr


def _check_horizon(horizon):
    if horizon is math.inf or horizon == math.inf:
        return math.inf
    if horizon < 0 or horizon != int(horizon):
        raise InputError("horizon must be a non-negative integer or infinity")
    return int(horizon)


def _segment_any(hits, offsets):
    """Row-wise OR of hits over CSR segments; empty segments give False."""
    n = offsets.size - 1
    out = np.zeros((hits.shape[0], n), dtype=bool)
    starts = offsets[:-1]
    nonempty = offsets[1:] > starts
    if hits.shape[1] and nonempty.any():
        reduced = np.logical_or.reduceat(hits, starts[nonempty], axis=1)
        out[:, nonempty] = reduced
    return out


def _segment_sum(values, offsets):
    n = offsets.size - 1
    out = np.zeros((values.shape[0], n))
    starts = offsets[:-1]
    nonempty = offsets[1:] > starts
    if values.shape[1] and nonempty.any():
        out[:, nonempty] = np.add.reduceat(values, starts[nonempty], axis=1)
    return out


# ---------------------------------------------------------------------------
# Independent cascade
# ---------------------------------------------------------------------------

def sample_live_arcs(graph, gen):
    """One live-edge configuration: arc a live independently with graph.b[a]."""
    return gen.random(graph.arc_count) < graph.b


def ic_simulate_once(graph, p0, horizon, gen):
    """One cascade realization; returns the active indicator at the horizon.

    Arc coins are flipped lazily, at most once each, when the frontier first
    examines the arc (nodes in ascending id order, out-arcs in CSR order), so
    a run that dies early never pays for the whole arc set.
    """
    active, _ = _ic_single_run(graph, p0, horizon, gen)
    return active


def _ic_single_run(graph, p0, horizon, gen):
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    active = gen.random(graph.node_count) < p0
    frontier = np.flatnonzero(active)
    examined = 0
    layer = 0
    while frontier.size:
        if horizon is not math.inf and layer >= horizon:
            break
        arcs = np.concatenate([
            graph.out_arcs[graph.out_offsets[u]:graph.out_offsets[u + 1]]
            for u in frontier]) if frontier.size else np.empty(0, np.int64)
        if not arcs.size:
            break
        examined += arcs.size
        live = gen.random(arcs.size) < graph.b[arcs]
        targets = graph.dst[arcs[live]]
        newly = np.unique(targets[~active[targets]])
        active[newly] = True
        frontier = newly
        layer += 1
    return active, examined


def _ic_propagate(graph, active, live, horizon):
    """Layered BFS over live arcs, vectorized across the runs axis."""
    active = active.copy()
    frontier = active.copy()
    layer = 0
    src = graph.src
    while frontier.any():
        if horizon is not math.inf and layer >= horizon:
            break
        hits = frontier[:, src] & live
        reached = _segment_any(hits, graph.in_offsets)
        newly = reached & ~active
        active |= newly
        frontier = newly
        layer += 1
    return active


def _ic_chunk_counts(graph, p0, horizon, seed, chunk_index, start, size):
    gen = rng.substream(seed, chunk_index)
    init = gen.random((size, graph.node_count)) < p0
    live = gen.random((size, graph.arc_count)) < graph.b
    active = _ic_propagate(graph, init, live, horizon)
    return active.sum(axis=0, dtype=np.int64)


def ic_mc_marginals(graph, p0, horizon, runs, seed, threads=1):
    """Average `runs` independent cascade realizations."""
    if runs < 1:
        raise InputError("runs must be at least 1")
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    plan = rng.chunks(runs, graph.node_count + graph.arc_count)

    def work(item):
        index, start, size = item
        return _ic_chunk_counts(graph, p0, horizon, seed, index, start, size)

    counts = _run_chunks(work, plan, threads, graph.node_count)
    return _report(counts, runs, seed)


# ---------------------------------------------------------------------------
# Stochastic linear threshold
# ---------------------------------------------------------------------------

def lt_simulate_once(graph, params, p0, horizon, gen):
    """One progressive threshold trajectory; indicator at the horizon."""
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    active = gen.random(graph.node_count) < p0
    return _lt_propagate(graph, params, active[None, :], horizon, gen)[0]


def _lt_propagate(graph, params, active, horizon, gen):
    active = active.copy()
    theta, eta = params.theta, params.eta
    b_in = graph.b
    can_flip = eta > 0.0
    step = 0
    while horizon is math.inf or step < horizon:
        sums = _segment_sum(active[:, graph.src] * b_in, graph.in_offsets)
        eligible = (sums >= theta) & ~active
        if not (eligible & can_flip).any():
            break  # state is absorbing: nothing can ever flip again
        coins = gen.random(active.shape)
        active |= eligible & (coins < eta)
        step += 1
    return active


def _lt_chunk_counts(graph, params, p0, horizon, seed, chunk_index, size):
    gen = rng.substream(seed, chunk_index)
    init = gen.random((size, graph.node_count)) < p0
    active = _lt_propagate(graph, params, init, horizon, gen)
    return active.sum(axis=0, dtype=np.int64)


def lt_mc_marginals(graph, params, p0, horizon, runs, seed, threads=1):
    """Average `runs` progressive linear-threshold trajectories."""
    if runs < 1:
        raise InputError("runs must be at least 1")
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    per_run = graph.node_count * (2 + (horizon if horizon is not math.inf else graph.node_count))
    plan = rng.chunks(runs, per_run)

    def work(item):
        index, start, size = item
        return _lt_chunk_counts(graph, params, p0, horizon, seed, index, size)

    counts = _run_chunks(work, plan, threads, graph.node_count)
    return _report(counts, runs, seed)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def _run_chunks(work, plan, threads, node_count):
    if threads > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, plan))
    else:
        parts = [work(item) for item in plan]
    counts = np.zeros(node_count, dtype=np.int64)
    for part in parts:
        counts += part
    return counts


def _report(counts, runs, seed):
    marginals = counts / runs
    std_errors = np.sqrt(marginals * (1.0 - marginals) / runs)
    return McReport(runs=int(runs), rng_seed=int(seed), marginals=marginals,
                    std_errors=std_errors, sigma=float(marginals.sum()))


def delta_p(marginals_a, marginals_b):
    """Mean absolute per-node difference between two marginal vectors."""
    a = np.asarray(marginals_a, dtype=np.float64)
    b = np.asarray(marginals_b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError("marginal vectors have different lengths")
    if a.size == 0:
        return 0.0
    return float(np.mean(np.abs(a - b)))
