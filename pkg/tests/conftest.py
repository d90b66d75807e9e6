import pytest

from satcomm.graphs import WeightedGraph


def triangles(bridge: bool = False) -> WeightedGraph:
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)]
    if bridge:
        edges.append((2, 3, 1.0))
    return WeightedGraph.from_edges(6, edges)


@pytest.fixture
def two_triangles() -> WeightedGraph:
    return triangles()


@pytest.fixture
def bridged_triangles() -> WeightedGraph:
    return triangles(bridge=True)


def pytest_terminal_summary(terminalreporter):
    acc = __import__("sys").modules.get("test_acceptance")
    if acc is not None and acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acc.RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
