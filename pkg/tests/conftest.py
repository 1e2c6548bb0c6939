import pytest

from perfectcolor import Graph


@pytest.fixture
def k2():
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def k3():
    return Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def p3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def p4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def c5():
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


@pytest.fixture
def star5():
    return Graph.from_edges(6, [(0, i) for i in range(1, 6)])


@pytest.fixture
def lone_vertex():
    return Graph.from_edges(1, [])


@pytest.fixture
def edgeless5():
    return Graph.from_edges(5, [])
