"""Directed-graph paths and a naive reference for the sweep kernel.

The optimized kernel computes leave-one-out products through a bin-sorted
scatter; this module pins its output to a transparent per-node Python
implementation, and exercises arcs without a reverse counterpart, which take
the full-product branch.
"""

import numpy as np
import pytest

from netspread import (DirectedGraph, InitialCondition, dmp_est, dmp_inf,
                       dmp_messages, exact_cavity_messages, exact_marginals,
                       ic_mc_marginals, initial_messages, parse_graph)

from helpers import mixed_p0


def reference_sweep(graph, p0, messages):
    """Direct transcription of the message update, one arc at a time."""
    out = np.empty(graph.arc_count)
    for a in range(graph.arc_count):
        j = int(graph.src[a])
        i = int(graph.dst[a])
        prod = 1.0
        for pos in range(graph.in_offsets[j], graph.in_offsets[j + 1]):
            if int(graph.src[pos]) == i:
                continue  # the target is excluded from its own update
            prod *= 1.0 - graph.b[pos] * messages[pos]
        out[a] = 1.0 - (1.0 - p0[j]) * prod
    return out


def random_directed(gen, n_lo=3, n_hi=8, keep=0.6):
    """Random directed graph: each ordered pair kept independently."""
    n = int(gen.integers(n_lo, n_hi))
    src, dst = [], []
    for u in range(n):
        for v in range(n):
            if u != v and gen.random() < keep:
                src.append(u)
                dst.append(v)
    b = gen.uniform(0, 1, len(src))
    return DirectedGraph(n, src, dst, b)


def test_kernel_matches_reference_sweep():
    gen = np.random.default_rng(40)
    for _ in range(25):
        g = random_directed(gen)
        p0 = mixed_p0(gen, g.node_count)
        state = initial_messages(g, p0)
        msg = state.messages
        for t in range(1, 4):
            expected = reference_sweep(g, p0.p0, msg)
            got = dmp_messages(g, p0, t).messages
            np.testing.assert_allclose(got, expected, atol=1e-12)
            msg = expected


def test_directed_tree_exactness():
    # orient each tree edge one way only: still loop-free, so exact
    gen = np.random.default_rng(41)
    for _ in range(20):
        n = int(gen.integers(2, 10))
        src, dst = [], []
        for v in range(1, n):
            u = int(gen.integers(0, v))
            if gen.random() < 0.5:
                src.append(u), dst.append(v)
            else:
                src.append(v), dst.append(u)
        g = DirectedGraph(n, src, dst, gen.uniform(0, 1, n - 1))
        p0 = mixed_p0(gen, n)
        t = int(gen.integers(0, 6))
        est = dmp_est(g, p0, t)
        exact = exact_marginals(g, p0, t)
        np.testing.assert_allclose(est.marginals, exact.marginals, atol=1e-10)


def test_directed_loopy_upper_bound_and_dominance():
    gen = np.random.default_rng(42)
    checked = 0
    for _ in range(40):
        g = random_directed(gen, n_lo=3, n_hi=6, keep=0.5)
        if g.arc_count == 0 or g.arc_count > 16:
            continue
        checked += 1
        p0 = mixed_p0(gen, g.node_count)
        t = int(gen.integers(1, 5))
        est = dmp_est(g, p0, t)
        exact = exact_marginals(g, p0, t)
        assert np.all(est.marginals >= exact.marginals - 1e-10)
        msgs = dmp_messages(g, p0, t).messages
        cavity = exact_cavity_messages(g, p0, t)
        assert np.all(msgs >= cavity - 1e-10)
    assert checked >= 10


def test_directed_mc_agrees():
    gen = np.random.default_rng(43)
    g = random_directed(gen, n_lo=5, n_hi=6, keep=0.4)
    p0 = InitialCondition.from_seed_set(g.node_count, [0])
    exact = exact_marginals(g, p0, 3)
    mc = ic_mc_marginals(g, p0, 3, runs=50_000, seed=44)
    assert np.all(np.abs(mc.marginals - exact.marginals)
                  <= 4 * np.sqrt(exact.marginals * (1 - exact.marginals) / mc.runs) + 1e-9)


def test_degenerate_sizes():
    empty = parse_graph("%mode directed\n%nodes 0\n")
    assert empty.node_count == 0 and empty.arc_count == 0
    p0 = InitialCondition(np.zeros(0))
    assert dmp_est(empty, p0, 3).sigma == 0.0
    assert dmp_inf(empty, p0).sigma == 0.0
    assert exact_marginals(empty, p0, 2).sigma == 0.0

    lone = parse_graph("%mode directed\n%nodes 1\n")
    p0 = InitialCondition(np.array([0.7]))
    assert dmp_est(lone, p0, 5).sigma == pytest.approx(0.7)
    report = dmp_inf(lone, p0)
    assert report.sweeps == 0 and report.converged
    assert exact_marginals(lone, p0, 5).marginals[0] == pytest.approx(0.7)
    mc = ic_mc_marginals(lone, p0, 2, runs=20_000, seed=9)
    assert abs(mc.marginals[0] - 0.7) < 0.02
