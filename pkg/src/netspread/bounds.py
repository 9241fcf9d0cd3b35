"""Structural certificates: girth-based exactness and spanning-tree brackets.

If the shortest undirected cycle has length L >= 2T + 1, the message-passing
estimate at horizon T coincides with the exact marginals.  Running the same
estimator on any spanning tree (kept edges retain both arc directions and
their b; dropped edges act as b = 0) discards loop correlations and yields a
lower bound, pairing with the full-graph upper bound into a bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .dmp_ic import FixedPointConfig, dmp_est, dmp_inf
from .errors import InputError

__all__ = ["ExactnessCertificate", "BoundBracket", "girth",
           "exactness_certificate", "spanning_tree_lower_bound"]


@dataclass(frozen=True)
class ExactnessCertificate:
    girth: float  # length of the shortest cycle; math.inf for forests
    horizon: int
    exact: bool


@dataclass(frozen=True)
class BoundBracket:
    lower: float
    upper: float
    horizon: float
    strategy: str
    tree_edges: tuple
    lower_marginals: np.ndarray
    upper_marginals: np.ndarray


def _undirected_adjacency(graph):
    adj = [[] for _ in range(graph.node_count)]
    for u, v in graph.undirected_edges():
        adj[int(u)].append(int(v))
        adj[int(v)].append(int(u))
    return adj


def girth(graph):
    """Length of the shortest cycle, treating arcs as undirected edges.

    Breadth-first search from every node; a non-tree edge met at depths
    (d_u, d_v) witnesses a closed walk of length d_u + d_v + 1, and the
    minimum over all roots is exactly the girth.  O(|V| * |E|), which is fine
    for a diagnostic.
    """
    adj = _undirected_adjacency(graph)
    best = math.inf
    for root in range(graph.node_count):
        dist = {root: 0}
        parent = {root: -1}
        queue = [root]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            if 2 * dist[u] >= best:
                break
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif v != parent[u]:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def exactness_certificate(graph, horizon):
    """Certificate that the finite-horizon estimate is provably exact."""
    if horizon < 0 or horizon != int(horizon):
        raise InputError("horizon must be a non-negative integer")
    length = girth(graph)
    return ExactnessCertificate(girth=length, horizon=int(horizon),
                                exact=bool(length >= 2 * int(horizon) + 1))


def _bfs_tree_edges(graph, p0):
    """Per component, BFS tree rooted at the argmax of p0 * degree."""
    adj = _undirected_adjacency(graph)
    deg = graph.degree()
    score = np.asarray(p0, dtype=np.float64) * deg
    visited = np.zeros(graph.node_count, dtype=bool)
    kept = []
    for start in np.argsort(-score, kind="stable"):
        start = int(start)
        if visited[start]:
            continue
        visited[start] = True
        queue = [start]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for v in adj[u]:
                if not visited[v]:
                    visited[v] = True
                    kept.append((min(u, v), max(u, v)))
                    queue.append(v)
    return sorted(kept)


def _random_tree_edges(graph, tree_seed):
    """Random spanning forest: shuffled-edge Kruskal with union-find."""
    edges = [(int(u), int(v)) for u, v in graph.undirected_edges()]
    gen = rng.generator(tree_seed)
    gen.shuffle(edges)
    parent = list(range(graph.node_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept = []
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            kept.append((min(u, v), max(u, v)))
    return sorted(kept)


def spanning_tree_lower_bound(graph, p0, horizon, strategy="bfs", tree_seed=0,
                              fixed_point=None):
    """Bracket the influence between a spanning-tree run and the full graph.

    horizon may be math.inf, in which case both sides use the fixed-point
    estimator with `fixed_point` (or defaults).
    """
    if strategy not in ("bfs", "random"):
        raise InputError(f"unknown tree strategy {strategy!r}")
    p0_arr = np.asarray(p0.p0 if hasattr(p0, "p0") else p0, dtype=np.float64)
    if strategy == "bfs":
        kept = _bfs_tree_edges(graph, p0_arr)
    else:
        kept = _random_tree_edges(graph, tree_seed)
    tree = graph.subgraph_with_edges(kept)

    if horizon is math.inf or horizon == math.inf:
        cfg = fixed_point or FixedPointConfig()
        low = dmp_inf(tree, p0, cfg)
        high = dmp_inf(graph, p0, cfg)
        t = math.inf
    else:
        low = dmp_est(tree, p0, int(horizon))
        high = dmp_est(graph, p0, int(horizon))
        t = int(horizon)
    return BoundBracket(lower=low.sigma, upper=high.sigma, horizon=t,
                        strategy=strategy, tree_edges=tuple(kept),
                        lower_marginals=low.marginals,
                        upper_marginals=high.marginals)
