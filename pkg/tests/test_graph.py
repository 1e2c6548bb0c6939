import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfectcolor import (
    Graph,
    GraphParseError,
    InstanceRejectedError,
    graph_hash,
    is_proper,
    load_graph,
    max_degree,
    serialize_graph,
    validate_instance,
)


def test_dimacs_path():
    g = load_graph("p edge 3 2\ne 1 2\ne 2 3", "dimacs")
    assert g.n == 3
    assert g.edges == ((0, 1), (1, 2))
    assert max_degree(g) == 2


def test_edgelist_triangle():
    g = load_graph("1 2\n2 3\n3 1", "edgelist")
    assert g.n == 3
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    assert max_degree(g) == 2


def test_dimacs_self_loop_rejected():
    with pytest.raises(GraphParseError) as err:
        load_graph("p edge 2 1\ne 1 1", "dimacs")
    assert "self-loop" in str(err.value)
    assert err.value.line_no == 2


def test_edgelist_self_loop_rejected():
    with pytest.raises(GraphParseError):
        load_graph("1 1", "edgelist")


def test_dimacs_out_of_range():
    with pytest.raises(GraphParseError) as err:
        load_graph("p edge 2 1\ne 1 5", "dimacs")
    assert "out of range" in str(err.value)


def test_dimacs_garbage_line_number():
    with pytest.raises(GraphParseError) as err:
        load_graph("p edge 2 1\nq nonsense", "dimacs")
    assert err.value.line_no == 2


def test_dimacs_edge_before_problem_line():
    with pytest.raises(GraphParseError):
        load_graph("e 1 2\np edge 2 1", "dimacs")


def test_comments_and_whitespace_tolerated():
    g = load_graph("c header\n\np edge 3 2\n  e 1 2\nc mid\ne   2 3\n", "dimacs")
    assert g.n == 3 and g.m == 2
    g = load_graph("# a comment\n 1 2 \n\n2 3\n", "edgelist")
    assert g.n == 3 and g.m == 2


def test_duplicate_edges_collapse():
    g = load_graph("p edge 2 2\ne 1 2\ne 2 1", "dimacs")
    assert g.edges == ((0, 1),)


def test_max_degree_examples(k3, lone_vertex, star5):
    assert max_degree(k3) == 2
    assert max_degree(lone_vertex) == 0
    assert max_degree(star5) == 5


def test_validate_instance(k3, edgeless5):
    validate_instance(k3, 7)
    with pytest.raises(InstanceRejectedError) as err:
        validate_instance(k3, 6)
    assert "k=6" in str(err.value) and "6" in str(err.value)
    validate_instance(edgeless5, 1)
    with pytest.raises(InstanceRejectedError):
        validate_instance(edgeless5, 0)


def test_is_proper_examples(k3):
    assert is_proper(k3, (1, 2, 3))
    assert not is_proper(k3, (1, 1, 2))
    assert is_proper(Graph.from_edges(3, []), (1, 1, 1))
    with pytest.raises(ValueError):
        is_proper(k3, (1, 2))


@st.composite
def graphs(draw):
    n = draw(st.integers(min_value=1, max_value=9))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    raw = draw(st.lists(pairs, max_size=16))
    edges = [(u, w) for u, w in raw if u != w]
    return Graph.from_edges(n, edges)


@given(graphs(), st.sampled_from(["dimacs", "edgelist"]))
@settings(max_examples=60, deadline=None)
def test_serialize_roundtrip(g, fmt):
    back = load_graph(serialize_graph(g, fmt), fmt)
    assert back.n == g.n
    assert back.edges == g.edges


@given(graphs())
@settings(max_examples=40, deadline=None)
def test_some_vertex_achieves_max_degree(g):
    d = max_degree(g)
    assert sum(1 for v in range(g.n) if g.degree(v) == d) >= 1


@given(graphs(), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_is_proper_matches_double_loop(g, k):
    import random

    rng = random.Random(graph_hash(g))
    chi = [rng.randint(1, k) for _ in range(g.n)]
    oracle = all(
        not (chi[u] == chi[w])
        for u in range(g.n)
        for w in range(u + 1, g.n)
        if (u, w) in g.edges
    )
    assert is_proper(g, chi) == oracle


def test_graph_hash_distinguishes(k3, p3):
    assert graph_hash(k3) != graph_hash(p3)
    assert graph_hash(k3) == graph_hash(Graph.from_edges(3, [(2, 0), (0, 1), (1, 2)]))


def test_neighbor_splits(p4):
    assert p4.earlier_neighbors(2) == (1,)
    assert p4.later_neighbors(2) == (3,)
    assert p4.earlier_neighbors(0) == ()
