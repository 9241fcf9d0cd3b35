"""Shared instance builders for the test suite.

Everything is driven by an explicit numpy Generator so test instances are
reproducible; acceptance tests pin their seeds.
"""

import numpy as np

from netspread import DirectedGraph, GenSpec, InitialCondition, generate


def tree_graph(gen, n, b_low=0.0, b_high=1.0, symmetric=False):
    """Random tree with per-arc (or per-edge) b drawn uniform [b_low, b_high]."""
    seed = int(gen.integers(0, 2**32))
    skeleton = generate(GenSpec("random_tree", n, seed=seed))
    m = skeleton.arc_count
    if symmetric:
        edges = skeleton.undirected_edges()
        b_edge = gen.uniform(b_low, b_high, size=edges.shape[0])
        lookup = {}
        for (u, v), bb in zip(edges, b_edge):
            lookup[(int(u), int(v))] = bb
            lookup[(int(v), int(u))] = bb
        b = np.array([lookup[(int(u), int(v))] for u, v in zip(skeleton.src, skeleton.dst)])
    else:
        b = gen.uniform(b_low, b_high, size=m)
    return DirectedGraph(skeleton.node_count, skeleton.src, skeleton.dst, b)


def loopy_graph(gen, max_arcs=16, b_choices="mixed"):
    """Small connected graph with at least one cycle and at most max_arcs arcs."""
    max_edges = max_arcs // 2
    n = int(gen.integers(3, min(7, max_edges) + 1))
    edges = set()
    for v in range(1, n):
        u = int(gen.integers(0, v))
        edges.add((u, v))
    extra_budget = max_edges - len(edges)
    extras = int(gen.integers(1, extra_budget + 1))
    guard = 0
    while extras > 0 and guard < 200:
        guard += 1
        u, v = sorted(gen.choice(n, size=2, replace=False).tolist())
        if (u, v) not in edges:
            edges.add((u, v))
            extras -= 1
    pairs = sorted(edges)
    src = np.array([p[0] for p in pairs] + [p[1] for p in pairs])
    dst = np.array([p[1] for p in pairs] + [p[0] for p in pairs])
    b = _draw_b(gen, src.size, b_choices)
    return DirectedGraph(n, src, dst, b)


def _draw_b(gen, size, style):
    if style == "mixed":
        b = gen.uniform(0, 1, size=size)
        pin = gen.random(size)
        b[pin < 0.1] = 0.0
        b[pin > 0.9] = 1.0
        return b
    if style == "moderate":
        return gen.uniform(0.15, 0.95, size=size)
    raise ValueError(style)


def mixed_p0(gen, n):
    """Per node: sometimes exactly 0 or 1, otherwise uniform (0, 1)."""
    p0 = gen.uniform(0, 1, size=n)
    kind = gen.random(n)
    p0[kind < 0.3] = 0.0
    p0[kind > 0.8] = 1.0
    if not p0.any():
        p0[int(gen.integers(0, n))] = 1.0
    return InitialCondition(p0)


def sure_seed_p0(gen, n, seeds=1):
    p0 = np.zeros(n)
    chosen = gen.choice(n, size=min(seeds, n), replace=False)
    p0[chosen] = 1.0
    return InitialCondition(p0)


def lt_weighted_tree(gen, n, max_in_degree=5):
    """Tree whose in-weight sums are scaled to at most 1 per node."""
    while True:
        g = tree_graph(gen, n, b_low=0.05, b_high=1.0)
        if n <= 2 or g.in_degree().max() <= max_in_degree:
            break
    sums = np.zeros(g.node_count)
    np.add.at(sums, g.dst, g.b)
    scale = np.maximum(sums, 1.0)
    b = g.b / scale[g.dst]
    return DirectedGraph(g.node_count, g.src, g.dst, b)
