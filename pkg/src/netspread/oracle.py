"""Exact brute-force references for both diffusion models.

Independent cascade: enumerate live-edge realizations.  For each realization
d (probability prod b^d (1-b)^(1-d)) and node i, the nodes from which i is
reachable within the horizon determine the survival factor
prod_l (1 - p0_l); averaging gives q_i and the exact marginal
p_i = 1 - (1 - p0_i) q_i, for arbitrary probabilistic initial conditions
without enumerating seed sets.

Enumeration domains:
  * 'arc'    -- one independent coin per directed arc (always valid; <= 20 arcs)
  * 'edge'   -- one shared coin per undirected edge; valid when both directions
                carry the same b (<= 20 edges)
  * 'forest' -- per-target enumeration over the target's component edges with
                the toward-target orientation's b; valid on forests, where the
                unique path makes the opposite coin irrelevant (<= 20 edges
                per component)
The three agree where their domains overlap, which the suite checks.

The threshold-model oracle propagates the full distribution over active sets
(2^N states), summing over every activation coin-flip pattern exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .graphs import MarginalReport

__all__ = ["exact_marginals", "exact_cavity_messages", "lt_exact_marginals",
           "ENUMERATION_CAP"]

ENUMERATION_CAP = 20

_CHUNK_BITS = 15  # configurations per enumeration chunk: 2**15


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


def _resolve_mode(graph, liveness):
    if liveness not in ("auto", "arc", "edge", "forest"):
        raise InputError(f"unknown liveness mode {liveness!r}")
    if liveness == "auto":
        if graph.is_forest():
            return "forest"
        if graph.has_symmetric_b():
            return "edge"
        return "arc"
    if liveness == "edge" and not graph.has_symmetric_b():
        raise InputError("per-edge liveness requires symmetric paired b values")
    if liveness == "forest" and not graph.is_forest():
        raise InputError("forest enumeration requires an acyclic graph")
    return liveness


def exact_marginals(graph, p0, horizon, liveness="auto"):
    """Exact activation marginals at the horizon by live-edge enumeration."""
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    mode = _resolve_mode(graph, liveness)
    if mode == "forest":
        marg = _forest_marginals(graph, p0, horizon)
    else:
        q = _enumerate_q(graph, p0, horizon, mode)
        marg = 1.0 - (1.0 - p0) * q
    return MarginalReport(t=horizon, marginals=marg,
                          sigma=float(marg.sum())).validate(p0)


def _coin_layout(graph, mode):
    """Coin count plus, per arc, the coin index it consumes and its probability."""
    if mode == "arc":
        return graph.arc_count, np.arange(graph.arc_count), graph.b
    edges = graph.undirected_edges()
    key_of = {(int(u), int(v)): k for k, (u, v) in enumerate(edges)}
    arc_coin = np.array([key_of[(min(int(u), int(v)), max(int(u), int(v)))]
                         for u, v in zip(graph.src, graph.dst)], dtype=np.int64)
    coin_prob = np.zeros(len(edges))
    coin_prob[arc_coin] = graph.b  # symmetric: both directions agree
    return len(edges), arc_coin, coin_prob


def _enumerate_q(graph, p0, horizon, mode):
    """q_i = E_d[ prod_{l reaches i within horizon} (1 - p0_l) ], l != i."""
    coins, arc_coin, coin_prob = _coin_layout(graph, mode)
    if coins > ENUMERATION_CAP:
        raise InputError(
            f"{coins} {mode} coins exceed the enumeration cap {ENUMERATION_CAP}")
    # isolated nodes have q = 1 and play no role in reachability: enumerate
    # only over nodes incident to at least one arc
    touched = np.unique(np.concatenate([graph.src, graph.dst])) if graph.arc_count \
        else np.empty(0, dtype=np.int64)
    remap = np.zeros(graph.node_count, dtype=np.int64)
    remap[touched] = np.arange(touched.size)
    n = touched.size
    src = remap[graph.src]
    dst = remap[graph.dst]
    steps = min(horizon, n - 1) if n else 0
    one_minus = (1.0 - p0)[touched]
    q_small = np.zeros(n)
    total = 1 << coins
    chunk = min(total, 1 << _CHUNK_BITS)
    for base in range(0, total, chunk):
        cfg = np.arange(base, min(base + chunk, total), dtype=np.uint64)
        live = ((cfg[:, None] >> arc_coin[None, :].astype(np.uint64)) & 1).astype(bool)
        weight = np.ones(cfg.size)
        for k in range(coins):
            bit = ((cfg >> np.uint64(k)) & 1).astype(bool)
            weight *= np.where(bit, coin_prob[k], 1.0 - coin_prob[k])
        # reach[c, l, i]: i reachable from l within the step budget
        reach = np.zeros((cfg.size, n, n), dtype=bool)
        idx = np.arange(n)
        reach[:, idx, idx] = True
        for _ in range(steps):
            prev = reach
            reach = prev.copy()
            for a in range(src.size):
                reach[:, :, dst[a]] |= prev[:, :, src[a]] & live[:, a:a + 1]
            if np.array_equal(prev, reach):
                break
        surv = np.ones((cfg.size, n))
        for l in range(n):
            mask = reach[:, l, :].copy()
            mask[:, l] = False  # the (1 - p0_i) factor is applied separately
            surv *= np.where(mask, one_minus[l], 1.0)
        q_small += weight @ surv
    q = np.ones(graph.node_count)
    # accumulation can overshoot the mathematical range by an ulp
    q[touched] = np.clip(q_small, 0.0, 1.0)
    return q


def _forest_marginals(graph, p0, horizon):
    """Per-target enumeration over the target's component, toward-target b."""
    n = graph.node_count
    adj = [[] for _ in range(n)]  # neighbor -> arc id of (neighbor -> node)
    for a in range(graph.arc_count):
        adj[int(graph.dst[a])].append((int(graph.src[a]), a))
    undirected = [set() for _ in range(n)]
    for u, v in graph.undirected_edges():
        undirected[int(u)].add(int(v))
        undirected[int(v)].add(int(u))

    one_minus = 1.0 - p0
    marg = np.empty(n)
    steps_cap = horizon if horizon is not math.inf else n
    for i in range(n):
        # BFS from the target over undirected structure; each reached node l
        # contributes the arc l -> parent (toward i) when it exists
        dist = {i: 0}
        path_mask = {i: 0}
        edge_prob = []
        order = [i]
        qi_nodes = []  # (node, depth, mask over enumerated edges)
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            if dist[u] >= steps_cap:
                continue
            for v in sorted(undirected[u]):
                if v in dist:
                    continue
                dist[v] = dist[u] + 1
                arc_toward = next((a for (s, a) in adj[u] if s == v), None)
                if arc_toward is None:
                    # no arc v -> u exists: v can never push toward i this way
                    path_mask[v] = None
                else:
                    if path_mask[u] is None:
                        path_mask[v] = None
                    else:
                        edge_prob.append(graph.b[arc_toward])
                        path_mask[v] = path_mask[u] | (1 << (len(edge_prob) - 1))
                if path_mask[v] is not None:
                    qi_nodes.append((v, path_mask[v]))
                order.append(v)
        m = len(edge_prob)
        if m > ENUMERATION_CAP:
            raise InputError(
                f"{m} component edges exceed the enumeration cap {ENUMERATION_CAP}")
        cfg = np.arange(1 << m, dtype=np.uint64)
        weight = np.ones(cfg.size)
        for k in range(m):
            bit = ((cfg >> np.uint64(k)) & 1).astype(bool)
            weight *= np.where(bit, edge_prob[k], 1.0 - edge_prob[k])
        surv = np.ones(cfg.size)
        for node, mask in qi_nodes:
            mask_u = np.uint64(mask)
            reached = (cfg & mask_u) == mask_u
            surv *= np.where(reached, one_minus[node], 1.0)
        q_i = min(1.0, max(0.0, float(weight @ surv)))
        marg[i] = 1.0 - (1.0 - p0[i]) * q_i
    return marg


def exact_cavity_messages(graph, p0, horizon, liveness="auto"):
    """Exact conditional activation probabilities per arc.

    For arc j -> i the value is the exact marginal of j at the horizon on the
    cavity graph with node i's incident arcs removed, i.e. the probability
    that j is active given that i never transmits or receives.
    """
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    out = np.empty(graph.arc_count)
    for i in range(graph.node_count):
        s, e = graph.in_offsets[i], graph.in_offsets[i + 1]
        if s == e:
            continue
        cavity = graph.subgraph_without_node(i)
        report = exact_marginals(cavity, p0, horizon, liveness=liveness)
        for pos in range(s, e):
            out[pos] = report.marginals[graph.src[pos]]
    return out


# ---------------------------------------------------------------------------
# Threshold-model oracle
# ---------------------------------------------------------------------------

LT_STATE_CAP = 16


def lt_exact_marginals(graph, params, p0, horizon):
    """Exact progressive threshold-model marginals via distribution DP.

    Tracks the full probability vector over 2^N active sets, convolving each
    step over every subset of eligible nodes weighted by their activation
    coins.  Feasible for node counts up to LT_STATE_CAP.
    """
    params.check_against(graph)
    p0 = _p0_array(graph, p0)
    horizon = _check_horizon(horizon)
    if horizon is math.inf:
        raise InputError("the threshold-model oracle supports finite horizons only")
    n = graph.node_count
    if n > LT_STATE_CAP:
        raise InputError(f"{n} nodes exceed the state-space cap {LT_STATE_CAP}")
    theta, eta = params.theta, params.eta

    nstates = 1 << n
    pi = np.array([1.0])
    for i in range(n):
        pi = np.concatenate([pi * (1.0 - p0[i]), pi * p0[i]])

    # in-weight sums per (state, node), built by peeling the lowest set bit
    wsum = np.zeros((nstates, n))
    row = np.zeros((n, n))
    for a in range(graph.arc_count):
        row[int(graph.src[a]), int(graph.dst[a])] = graph.b[a]
    for state in range(1, nstates):
        low = state & -state
        wsum[state] = wsum[state ^ low] + row[low.bit_length() - 1]

    steps = 0
    while steps < horizon:
        new = np.zeros(nstates)
        moved = False
        for state in range(nstates):
            mass = pi[state]
            if mass == 0.0:
                continue
            eligible = [i for i in range(n)
                        if not (state >> i) & 1 and wsum[state, i] >= theta[i]]
            flippable = [i for i in eligible if eta[i] > 0.0]
            if not flippable:
                new[state] += mass
                continue
            moved = True
            probs = np.array([mass])
            states = np.array([state], dtype=np.int64)
            for i in flippable:
                probs = np.concatenate([probs * (1.0 - eta[i]), probs * eta[i]])
                states = np.concatenate([states, states | (1 << i)])
            np.add.at(new, states, probs)
        pi = new
        steps += 1
        if not moved:
            break

    marg = np.zeros(n)
    states = np.arange(nstates)
    for i in range(n):
        marg[i] = pi[(states >> i) & 1 == 1].sum()
    return MarginalReport(t=horizon, marginals=marg,
                          sigma=float(marg.sum())).validate(p0)
