"""Monte-Carlo estimators: determinism, trivial exact cases, statistics."""

import math

import numpy as np
import pytest

from netspread import (InitialCondition, InputError, LtParameters, delta_p,
                       exact_marginals, ic_mc_marginals, ic_simulate_once,
                       lt_mc_marginals, lt_simulate_once, parse_graph)
from netspread import rng as nsrng

from helpers import loopy_graph, mixed_p0


def path2(b=0.5):
    return parse_graph(f"%mode undirected\n0 1 {b}\n")


def test_no_transmission_when_b_zero():
    g = parse_graph("%mode undirected\n0 1 0.0\n1 2 0.0\n")
    p0 = InitialCondition(np.array([1.0, 0.0, 0.0]))
    for i in range(20):
        active = ic_simulate_once(g, p0, 5, nsrng.substream(3, i))
        assert active.tolist() == [True, False, False]


def test_full_reachability_when_b_one():
    gen = np.random.default_rng(4)
    g = loopy_graph(gen)
    b1 = type(g)(g.node_count, g.src, g.dst, np.ones(g.arc_count))
    p0 = InitialCondition.from_seed_set(g.node_count, [0])
    active = ic_simulate_once(b1, p0, g.node_count, nsrng.substream(0, 0))
    assert active.all()


def test_single_run_report_is_indicator():
    report = ic_mc_marginals(path2(), InitialCondition(np.array([1.0, 0.0])), 1,
                             runs=1, seed=9)
    assert set(report.marginals.tolist()) <= {0.0, 1.0}


def test_horizon_zero_estimates_p0():
    g = path2()
    p0 = InitialCondition(np.array([0.3, 0.8]))
    report = ic_mc_marginals(g, p0, 0, runs=200_000, seed=1)
    assert np.all(np.abs(report.marginals - p0.p0) <= 4 * 0.5 / math.sqrt(200_000))


def test_bernoulli_arc_three_sigma():
    g = path2(0.5)
    p0 = InitialCondition(np.array([1.0, 0.0]))
    report = ic_mc_marginals(g, p0, 1, runs=100_000, seed=5)
    assert abs(report.marginals[1] - 0.5) <= 3 * 0.5 / math.sqrt(100_000)


def test_reports_bit_identical_per_seed_and_threads():
    gen = np.random.default_rng(6)
    g = loopy_graph(gen)
    p0 = mixed_p0(gen, g.node_count)
    a = ic_mc_marginals(g, p0, 3, runs=5000, seed=11)
    b = ic_mc_marginals(g, p0, 3, runs=5000, seed=11)
    assert np.array_equal(a.marginals, b.marginals)
    assert np.array_equal(a.std_errors, b.std_errors)
    c = ic_mc_marginals(g, p0, 3, runs=5000, seed=11, threads=4)
    assert np.array_equal(a.marginals, c.marginals)
    d = ic_mc_marginals(g, p0, 3, runs=5000, seed=12)
    assert not np.array_equal(a.marginals, d.marginals)


def test_multi_chunk_merge_is_deterministic():
    # shrink the per-chunk budget so the run span covers many substreams, then
    # check that serial and threaded merges agree bit for bit
    gen = np.random.default_rng(7)
    g = loopy_graph(gen)
    p0 = mixed_p0(gen, g.node_count)
    old = nsrng.CHUNK_DRAW_BUDGET
    try:
        nsrng.CHUNK_DRAW_BUDGET = 1 << 12
        assert len(nsrng.chunks(3000, g.node_count + g.arc_count)) > 10
        serial = ic_mc_marginals(g, p0, 2, runs=3000, seed=2)
        threaded = ic_mc_marginals(g, p0, 2, runs=3000, seed=2, threads=4)
    finally:
        nsrng.CHUNK_DRAW_BUDGET = old
    assert np.array_equal(serial.marginals, threaded.marginals)
    assert np.array_equal(serial.std_errors, threaded.std_errors)


def test_infinite_horizon_runs_to_exhaustion():
    g = parse_graph("%mode undirected\n0 1 1\n1 2 1\n2 3 1\n")
    p0 = InitialCondition(np.array([1.0, 0, 0, 0]))
    report = ic_mc_marginals(g, p0, math.inf, runs=50, seed=3)
    np.testing.assert_array_equal(report.marginals, 1.0)


def test_std_error_bounded():
    gen = np.random.default_rng(8)
    g = loopy_graph(gen)
    p0 = mixed_p0(gen, g.node_count)
    report = ic_mc_marginals(g, p0, 2, runs=400, seed=0)
    assert np.all(report.std_errors <= 0.5 / math.sqrt(400) + 1e-15)


def test_live_arc_sampler_statistics():
    from netspread import sample_live_arcs
    g = parse_graph("%mode undirected\n0 1 0.2 0.8\n")
    hits = np.zeros(g.arc_count)
    n = 20_000
    gen = nsrng.substream(31, 0)
    for _ in range(n):
        hits += sample_live_arcs(g, gen)
    freq = hits / n
    assert np.all(np.abs(freq - g.b) <= 4 * np.sqrt(g.b * (1 - g.b) / n) + 1e-12)


def test_single_run_touches_each_arc_at_most_once():
    from netspread.montecarlo import _ic_single_run
    gen = np.random.default_rng(30)
    for _ in range(10):
        g = loopy_graph(gen)
        p0 = mixed_p0(gen, g.node_count)
        sub = nsrng.substream(1, int(gen.integers(0, 100)))
        active, examined = _ic_single_run(g, p0, math.inf, sub)
        assert examined <= g.arc_count
        # exactly the out-arcs of activated nodes get examined at T = inf
        assert examined == int(g.out_degree()[active].sum())


def test_dmp_dominates_mc_within_noise():
    from netspread import dmp_est
    gen = np.random.default_rng(33)
    for i in range(5):
        g = loopy_graph(gen, b_choices="moderate")
        p0 = mixed_p0(gen, g.node_count)
        t = int(gen.integers(1, 5))
        est = dmp_est(g, p0, t)
        mc = ic_mc_marginals(g, p0, t, runs=20_000, seed=300 + i)
        assert np.all(est.marginals >= mc.marginals - 4 * np.maximum(mc.std_errors, 1e-4))


def test_mc_agrees_with_oracle():
    gen = np.random.default_rng(9)
    for _ in range(3):
        g = loopy_graph(gen, b_choices="moderate")
        p0 = mixed_p0(gen, g.node_count)
        t = int(gen.integers(1, 4))
        exact = exact_marginals(g, p0, t)
        mc = ic_mc_marginals(g, p0, t, runs=100_000, seed=21)
        gap = np.abs(mc.marginals - exact.marginals)
        allowed = 4 * np.maximum(mc.std_errors, 1e-4)
        assert np.mean(gap <= allowed) >= 0.99


# ---------------------------------------------------------------------------
# Threshold model
# ---------------------------------------------------------------------------

def test_lt_deterministic_when_eta_one():
    g = parse_graph("%mode undirected\n0 1 0.6\n1 2 0.4\n")
    params = LtParameters(np.array([0.5, 0.5, 0.4]), np.ones(3))
    p0 = InitialCondition(np.array([1.0, 0.0, 0.0]))
    runs = [lt_simulate_once(g, params, p0, 4, nsrng.substream(0, i)) for i in range(10)]
    for r in runs[1:]:
        assert np.array_equal(r, runs[0])
    assert runs[0].tolist() == [True, True, True]


def test_lt_threshold_unreachable_node():
    g = parse_graph("%mode directed\n0 1 0.3\n")
    params = LtParameters(np.array([0.0, 0.5]), np.ones(2))
    p0 = InitialCondition(np.array([1.0, 0.0]))
    report = lt_mc_marginals(g, params, p0, 6, runs=500, seed=4)
    assert report.marginals[1] == 0.0


def test_lt_single_arc_three_sigma():
    g = parse_graph("%mode directed\n0 1 1.0\n")
    params = LtParameters(np.array([0.0, 0.5]), np.array([0.0, 0.5]))
    p0 = InitialCondition(np.array([1.0, 0.0]))
    report = lt_mc_marginals(g, params, p0, 1, runs=100_000, seed=13)
    assert abs(report.marginals[1] - 0.5) <= 3 * 0.5 / math.sqrt(100_000)


def test_lt_reports_deterministic():
    g = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n")
    params = LtParameters(np.full(3, 0.4), np.full(3, 0.7))
    p0 = InitialCondition(np.array([1.0, 0.0, 0.0]))
    a = lt_mc_marginals(g, params, p0, 5, runs=4000, seed=17)
    b = lt_mc_marginals(g, params, p0, 5, runs=4000, seed=17, threads=3)
    assert np.array_equal(a.marginals, b.marginals)


def test_lt_infinite_horizon_terminates():
    g = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n")
    params = LtParameters(np.full(3, 0.4), np.array([1.0, 0.25, 0.25]))
    p0 = InitialCondition(np.array([1.0, 0.0, 0.0]))
    report = lt_mc_marginals(g, params, p0, math.inf, runs=2000, seed=19)
    # eta > 0 and thresholds met along the chain: everything eventually flips
    np.testing.assert_array_equal(report.marginals, 1.0)


# ---------------------------------------------------------------------------
# delta_p
# ---------------------------------------------------------------------------

def test_delta_p_values():
    assert delta_p([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert delta_p([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert delta_p([0.5, 0.5], [0.4, 0.8]) == pytest.approx(0.2)


def test_delta_p_length_mismatch():
    with pytest.raises(InputError):
        delta_p([0.5], [0.5, 0.5])
