import math
import re

import pydot
import pytest
from hypothesis import given

from satcomm.cnf import Formula
from satcomm.generators import GeneratorConfig, gen_planted, gen_random
from satcomm.graphs import (WeightedGraph, build_community_graph, build_cvig, build_vig,
                            connected_components, export_dot)
from satcomm.partition import Partition

from conftest import triangles
from strategies import formulas


def test_vig_single_ternary_clause():
    g = build_vig(Formula(3, ((1, 2, 3),)))
    assert sorted(g.edges()) == pytest.approx([(0, 1, 1 / 3), (0, 2, 1 / 3), (1, 2, 1 / 3)])
    assert math.fsum(w for *_, w in g.edges()) == pytest.approx(1.0)


def test_vig_unit_clause_adds_nothing():
    g = build_vig(Formula(4, ((1,),)))
    assert g.n == 4 and g.num_edges == 0
    assert g.stats["unit_clauses"] == 1


def test_vig_binary_clauses_accumulate():
    g = build_vig(Formula(2, ((1, -2), (1, 2))))
    assert list(g.edges()) == [(0, 1, 2.0)]


def test_vig_max_clause_len():
    f = Formula(5, ((1, 2, 3, 4), (1, 5)))
    g = build_vig(f, max_clause_len=2)
    assert list(g.edges()) == [(0, 4, 1.0)]
    assert g.stats["skipped_long"] == 1
    assert build_vig(f, max_clause_len=1).num_edges == 0


@given(formulas(min_len=2))
def test_vig_clause_mass_is_one(f):
    g = build_vig(f)
    assert math.fsum(w for *_, w in g.edges()) == pytest.approx(f.num_clauses)
    assert g.total == pytest.approx(2 * f.num_clauses)


def test_cvig_binary_clause():
    g = build_cvig(Formula(2, ((1, 2),)))
    assert sorted(g.edges()) == [(0, 0, 0.5), (1, 0, 0.5)]


def test_cvig_unit_clause():
    g = build_cvig(Formula(1, ((-1,),)))
    assert list(g.edges()) == [(0, 0, 1.0)]


@given(formulas())
def test_cvig_total_is_clause_count(f):
    assert build_cvig(f).total == pytest.approx(f.num_clauses)


def test_components_of_two_triangles(two_triangles):
    p = connected_components(two_triangles)
    assert (p.num_communities, p.largest_fraction) == (2, 0.5)


def test_components_edgeless():
    p = connected_components(WeightedGraph.from_pairs(5, {}))
    assert (p.num_communities, p.largest_fraction) == (5, 0.2)


def test_components_one_clause_over_three_of_five():
    p = connected_components(build_vig(Formula(5, ((1, -2, 4),))))
    assert p.num_communities == 3


def test_components_planted_blocks():
    f, _ = gen_planted(GeneratorConfig(n=2000, ratio=4.25, communities=20, p_intra=1.0))
    assert connected_components(build_vig(f)).num_communities >= 20


def test_components_giant_component():
    f = gen_random(GeneratorConfig(n=10_000, ratio=4.25, seed=5))
    p = connected_components(build_vig(f))
    assert p.largest_fraction > 0.99
    assert p.num_communities < 50


def test_community_graph_two_triangles(two_triangles):
    cg = build_community_graph(two_triangles, Partition((0, 0, 0, 1, 1, 1)))
    assert cg.num_nodes == 2
    assert cg.intra == [6.0, 6.0]
    assert cg.inter == {}


def test_community_graph_bridge(bridged_triangles):
    cg = build_community_graph(bridged_triangles, Partition((0, 0, 0, 1, 1, 1)))
    assert cg.inter == {(0, 1): 2.0}
    assert cg.total == pytest.approx(bridged_triangles.total)


def test_community_graph_single():
    cg = build_community_graph(triangles(), Partition.single(6))
    assert cg.sizes == [6]


def _parse_dot(text):
    graphs = pydot.graph_from_dot_data(text)
    assert graphs and len(graphs) == 1
    return graphs[0]


def _count_nodes(dot):
    return sum(1 for n in dot.get_nodes() if re.fullmatch(r"n\d+", n.get_name()))


def test_dot_single_community():
    dot = _parse_dot(export_dot(build_community_graph(triangles(), Partition.single(6))))
    assert _count_nodes(dot) == 1
    assert dot.get_edges() == []


def test_dot_two_communities(bridged_triangles):
    dot = _parse_dot(export_dot(build_community_graph(bridged_triangles,
                                                      Partition((0, 0, 0, 1, 1, 1)))))
    assert _count_nodes(dot) == 2
    assert len(dot.get_edges()) == 1


def test_dot_planted_five():
    f, p = gen_planted(GeneratorConfig(n=100, ratio=4, communities=5, p_intra=0.9, seed=2))
    dot = _parse_dot(export_dot(build_community_graph(build_vig(f), p)))
    assert _count_nodes(dot) == 5


def test_inter_mass_grows_with_longer_clauses():
    f, p = gen_planted(GeneratorConfig(n=100, ratio=4, communities=5, p_intra=0.9, seed=2))
    wide = Formula(100, f.clauses + (tuple(range(1, 40)), (5, 25, 45, 65, 85)))
    inter = [build_community_graph(build_vig(wide, m), p).inter_total for m in (10, 50)]
    assert inter[0] <= inter[1]
