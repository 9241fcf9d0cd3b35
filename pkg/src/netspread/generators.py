"""Synthetic graph and seed-set generators for tests and benchmarks.

All generation is deterministic for a fixed seed.  Regular graphs come from
the pairing model with whole-graph rejection of self-loops and duplicate
edges; random trees decode uniform Pruefer sequences.  Transmission
probabilities are drawn per undirected edge (symmetric) or per arc
(asymmetric).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InputError
from .graphs import DirectedGraph, InitialCondition

__all__ = ["GenSpec", "generate", "random_seed_set", "FAMILIES"]

FAMILIES = ("random_regular", "erdos_renyi", "random_tree", "cycle", "path", "star")

PAIRING_RESTART_LIMIT = 1000


@dataclass(frozen=True)
class GenSpec:
    """Family plus size, b-distribution, and symmetry of the drawn b values.

    b_dist: ("const", c) or ("uniform", lo, hi).
    """

    family: str
    nodes: int
    degree: int | None = None
    edge_prob: float | None = None
    b_dist: tuple = ("const", 1.0)
    symmetric: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.nodes < 0:
            raise InputError("node count must be non-negative")
        kind = self.b_dist[0] if self.b_dist else None
        if kind == "const":
            if len(self.b_dist) != 2 or not 0.0 <= self.b_dist[1] <= 1.0:
                raise InputError("const b takes one value in [0, 1]")
        elif kind == "uniform":
            if len(self.b_dist) != 3:
                raise InputError("uniform b takes (lo, hi)")
            lo, hi = self.b_dist[1], self.b_dist[2]
            if not (0.0 <= lo <= hi <= 1.0):
                raise InputError("uniform b bounds must satisfy 0 <= lo <= hi <= 1")
        else:
            raise InputError(f"unknown b distribution {kind!r}")


def _edges_random_regular(n, d, gen):
    if d is None:
        raise InputError("random_regular needs a degree")
    if d < 0 or d >= max(n, 1):
        raise InputError("degree must satisfy 0 <= d < n")
    if (n * d) % 2 != 0:
        raise InputError("n * d must be even for a regular graph")
    if d == 0:
        return []
    for _ in range(PAIRING_RESTART_LIMIT):
        stubs = np.repeat(np.arange(n, dtype=np.int64), d)
        gen.shuffle(stubs)
        u = stubs[0::2]
        v = stubs[1::2]
        if np.any(u == v):
            continue
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = lo * n + hi
        if np.unique(key).size != key.size:
            continue
        order = np.argsort(key)
        return list(zip(lo[order].tolist(), hi[order].tolist()))
    raise InputError(
        f"pairing model failed to produce a simple graph in {PAIRING_RESTART_LIMIT} restarts")


def _edges_erdos_renyi(n, p, gen):
    if p is None or not 0.0 <= p <= 1.0:
        raise InputError("erdos_renyi needs an edge probability in [0, 1]")
    total = n * (n - 1) // 2
    if total == 0:
        return []
    if n <= 2048:
        iu, iv = np.triu_indices(n, k=1)
        mask = gen.random(total) < p
        return list(zip(iu[mask].tolist(), iv[mask].tolist()))
    # large n: draw the binomial edge count, then that many distinct pairs by
    # rejection (first `count` distinct indices in draw order are uniform)
    count = int(gen.binomial(total, p))
    seen = set()
    picked = []
    while len(picked) < count:
        need = count - len(picked)
        for idx in gen.integers(0, total, size=max(2 * need, 16)).tolist():
            if idx not in seen:
                seen.add(idx)
                picked.append(idx)
                if len(picked) == count:
                    break
    edges = []
    for idx in sorted(picked):
        # decode linear index into the strict upper triangle
        u = int((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * idx)) // 2)
        v = int(idx - u * (2 * n - u - 1) // 2 + u + 1)
        edges.append((u, v))
    return edges


def _edges_random_tree(n, gen):
    if n <= 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = gen.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in seq:
        degree[x] += 1
    edges = []
    import heapq
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, int(x)), max(leaf, int(x))))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return sorted(edges)


def _edges_cycle(n):
    if n < 3:
        raise InputError("a cycle needs at least 3 nodes")
    return [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]


def _edges_path(n):
    return [(i, i + 1) for i in range(n - 1)]


def _edges_star(n):
    if n < 1:
        raise InputError("a star needs at least 1 node")
    return [(0, i) for i in range(1, n)]


def generate(spec):
    """Build the DirectedGraph described by a GenSpec."""
    gen = rng.generator(spec.seed)
    n = spec.nodes
    family = spec.family
    if family == "random_regular":
        edges = _edges_random_regular(n, spec.degree, gen)
    elif family == "erdos_renyi":
        edges = _edges_erdos_renyi(n, spec.edge_prob, gen)
    elif family == "random_tree":
        edges = _edges_random_tree(n, gen)
    elif family == "cycle":
        edges = _edges_cycle(n)
    elif family == "path":
        edges = _edges_path(n)
    else:
        edges = _edges_star(n)

    m = len(edges)
    if m:
        eu = np.array([e[0] for e in edges], dtype=np.int64)
        ev = np.array([e[1] for e in edges], dtype=np.int64)
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)

    kind = spec.b_dist[0]
    if kind == "const":
        fwd = np.full(m, float(spec.b_dist[1]))
        bwd = fwd.copy()
    else:
        lo, hi = float(spec.b_dist[1]), float(spec.b_dist[2])
        fwd = gen.uniform(lo, hi, size=m)
        bwd = fwd.copy() if spec.symmetric else gen.uniform(lo, hi, size=m)

    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    b = np.concatenate([fwd, bwd])
    return DirectedGraph(n, src, dst, b)


def random_seed_set(graph, count=None, fraction=None, seed=0):
    """Uniform seed set without replacement; fraction rounds to >= 1 seed."""
    n = graph.node_count
    if (count is None) == (fraction is None):
        raise InputError("give exactly one of count or fraction")
    if fraction is not None:
        if not 0.0 < fraction <= 1.0:
            raise InputError("fraction must lie in (0, 1]")
        count = max(1, int(fraction * n))
    if not 0 < count <= n:
        raise InputError(f"seed count {count} outside (0, {n}]")
    gen = rng.generator(seed)
    chosen = gen.choice(n, size=count, replace=False)
    p0 = np.zeros(n)
    p0[chosen] = 1.0
    return InitialCondition(p0)
