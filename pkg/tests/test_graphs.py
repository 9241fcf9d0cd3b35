"""Graph parsing, serialization, and the shared report helpers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netspread import (DirectedGraph, GraphFormatError, InitialCondition,
                       InputError, MarginalReport, influence_from_marginals,
                       parse_graph, parse_initial_condition, serialize_graph)

UNDIRECTED_PATH = "%mode undirected\n0 1 0.5\n"


def test_undirected_line_expands_to_two_arcs():
    g = parse_graph(UNDIRECTED_PATH)
    assert g.node_count == 2
    arcs = {(int(u), int(v)): float(b) for u, v, b in zip(g.src, g.dst, g.b)}
    assert arcs == {(0, 1): 0.5, (1, 0): 0.5}


def test_undirected_asymmetric_b():
    g = parse_graph("%mode undirected\n0 1 0.25 0.75\n")
    arcs = {(int(u), int(v)): float(b) for u, v, b in zip(g.src, g.dst, g.b)}
    assert arcs == {(0, 1): 0.25, (1, 0): 0.75}


def test_triangle_all_one_column():
    g = parse_graph("0 1 1.0\n1 2 1.0\n0 2 1.0\n", mode="undirected")
    assert g.arc_count == 6
    assert np.all(g.b == 1.0)


def test_self_loop_rejected():
    with pytest.raises(GraphFormatError, match="self-loop"):
        parse_graph("%mode directed\n0 0 0.3\n")


def test_duplicate_arc_rejected():
    with pytest.raises(GraphFormatError, match="duplicate"):
        parse_graph("%mode directed\n0 1 0.3\n0 1 0.3\n")
    with pytest.raises(GraphFormatError, match="duplicate"):
        parse_graph("%mode undirected\n0 1 0.3\n1 0 0.4\n")


def test_bad_probability_rejected():
    with pytest.raises(GraphFormatError, match="outside"):
        parse_graph("%mode directed\n0 1 1.5\n")


def test_mode_required():
    with pytest.raises(GraphFormatError, match="mode"):
        parse_graph("0 1 0.5\n")


def test_comments_blanks_and_commas():
    text = "# a comment\n%mode directed\n\n0, 1, 0.5\n1 2 0.25  # trailing\n"
    g = parse_graph(text)
    assert g.arc_count == 2 and g.node_count == 3


def test_nodes_header_keeps_isolated_nodes():
    g = parse_graph("%mode directed\n%nodes 5\n0 1 0.5\n")
    assert g.node_count == 5


def test_label_map_round_trip():
    g = parse_graph("%mode directed\nalice bob 0.5\nbob carol 0.25\n")
    assert g.labels == ("alice", "bob", "carol")
    again = parse_graph(serialize_graph(g))
    assert again.labels == g.labels
    assert np.array_equal(again.src, g.src) and np.array_equal(again.b, g.b)


def test_sparse_integer_ids_become_labels():
    g = parse_graph("%mode directed\n10 20 0.5\n")
    assert g.node_count == 2 and g.labels == ("10", "20")


def test_round_trip_bit_exact():
    text = "%mode undirected\n0 1 0.123456789012345678\n1 2 0.5 0.75\n"
    g = parse_graph(text)
    again = parse_graph(serialize_graph(g))
    assert np.array_equal(g.src, again.src)
    assert np.array_equal(g.dst, again.dst)
    assert np.array_equal(g.b, again.b)
    assert g.node_count == again.node_count


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_round_trip_random_graphs(data):
    n = data.draw(st.integers(2, 8))
    pair_list = data.draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
        max_size=12, unique=True))
    arcs = [(u, v) for u, v in pair_list if u != v]
    bs = data.draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=len(arcs),
                            max_size=len(arcs)))
    g = DirectedGraph(n, [a[0] for a in arcs], [a[1] for a in arcs], bs)
    again = parse_graph(serialize_graph(g))
    assert np.array_equal(g.src, again.src)
    assert np.array_equal(g.dst, again.dst)
    assert np.array_equal(g.b, again.b)


def test_arc_order_is_in_csr():
    g = parse_graph("%mode directed\n2 0 0.1\n1 0 0.2\n0 2 0.3\n")
    # arcs sorted by (dst, src); arc id == position in the target's in-segment
    assert list(zip(g.src.tolist(), g.dst.tolist())) == [(1, 0), (2, 0), (0, 2)]
    assert g.in_offsets.tolist() == [0, 2, 2, 3]
    assert g.rev.tolist() == [-1, 2, 1]


def test_initial_condition_parsing():
    g = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n")
    init = parse_initial_condition("0 1.0\n", g)
    assert init.p0.tolist() == [1.0, 0.0, 0.0]
    assert init.budget == 1.0
    init = parse_initial_condition("0 0.5\n2 0.5\n", g)
    assert init.budget == pytest.approx(1.0)


def test_initial_condition_unknown_node():
    g = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n")
    with pytest.raises(GraphFormatError, match="unknown node"):
        parse_initial_condition("5 0.3\n", g)


def test_initial_condition_range_checked():
    g = parse_graph(UNDIRECTED_PATH)
    with pytest.raises(GraphFormatError):
        parse_initial_condition("0 1.2\n", g)
    with pytest.raises(InputError):
        InitialCondition(np.array([-0.1, 0.5]))


def test_influence_from_marginals():
    rep = MarginalReport(t=1, marginals=np.array([1.0, 0.5, 0.25]), sigma=1.75)
    assert influence_from_marginals(rep) == pytest.approx(1.75)
    rep = MarginalReport(t=0, marginals=np.zeros(4), sigma=0.0)
    assert influence_from_marginals(rep) == 0.0
    p0 = np.full(7, 1.0)
    rep = MarginalReport(t=0, marginals=p0, sigma=7.0)
    assert influence_from_marginals(rep) == pytest.approx(7.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=20), st.data())
def test_influence_monotone_in_marginals(marginals, data):
    base = np.array(marginals)
    bumped = base.copy()
    idx = data.draw(st.integers(0, base.size - 1))
    bumped[idx] = min(1.0, bumped[idx] + data.draw(st.floats(0, 1, allow_nan=False)))
    a = influence_from_marginals(MarginalReport(t=0, marginals=base, sigma=float(base.sum())))
    b = influence_from_marginals(MarginalReport(t=0, marginals=bumped, sigma=float(bumped.sum())))
    assert b >= a


def test_report_validation():
    with pytest.raises(Exception):
        MarginalReport(t=1, marginals=np.array([1.5]), sigma=1.5).validate()
    with pytest.raises(Exception):
        MarginalReport(t=1, marginals=np.array([0.5]), sigma=0.9).validate()
    MarginalReport(t=math.inf, marginals=np.array([0.5]), sigma=0.5).validate(np.array([0.25]))


def test_subgraph_without_node():
    g = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n0 2 0.5\n")
    cavity = g.subgraph_without_node(1)
    assert cavity.node_count == 3
    assert sorted(zip(cavity.src.tolist(), cavity.dst.tolist())) == [(0, 2), (2, 0)]


def test_symmetry_and_forest_detection():
    tri = parse_graph("%mode undirected\n0 1 0.5\n1 2 0.5\n0 2 0.5\n")
    assert tri.has_symmetric_b() and not tri.is_forest()
    asym = parse_graph("%mode undirected\n0 1 0.5 0.6\n")
    assert not asym.has_symmetric_b() and asym.is_forest()
    directed = parse_graph("%mode directed\n0 1 0.5\n")
    assert not directed.has_symmetric_b()
