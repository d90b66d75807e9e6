import pytest

from satcomm.generators import GeneratorConfig, gen_planted, gen_random
from satcomm.graphs import build_vig, connected_components
from satcomm.modularity import modularity


def test_table_row_size():
    f = gen_random(GeneratorConfig(n=10_000, ratio=4.25, k=3, seed=1))
    assert f.num_clauses == 42_500
    assert all(len(c) == 3 for c in f.clauses)
    assert all(len({abs(l) for l in c}) == 3 for c in f.clauses)


def test_only_possible_clause():
    for seed in range(5):
        f = gen_random(GeneratorConfig(n=3, ratio=1 / 3, k=3, seed=seed))
        assert f.num_clauses == 1
        assert sorted(abs(l) for l in f.clauses[0]) == [1, 2, 3]


def test_determinism():
    cfg = GeneratorConfig(n=100, ratio=4.25, seed=9)
    assert gen_random(cfg) == gen_random(cfg)
    assert gen_random(cfg) != gen_random(GeneratorConfig(n=100, ratio=4.25, seed=10))


def test_ratio_rounding():
    assert GeneratorConfig(n=10, ratio=4.25).num_clauses == 43
    assert GeneratorConfig(n=100, ratio="4.26").num_clauses == 426


@pytest.mark.parametrize("kw", [dict(n=0, ratio=1), dict(n=2, ratio=1, k=3),
                                dict(n=5, ratio=-1), dict(n=5, ratio=1, k=0)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        GeneratorConfig(**kw)


def test_planted_components():
    f, p = gen_planted(GeneratorConfig(n=1000, ratio=4.25, communities=20, p_intra=1.0, seed=3))
    assert p.num_communities == 20
    assert connected_components(build_vig(f)).num_communities >= 20
    for c in f.clauses:
        assert len({p[abs(l) - 1] for l in c}) == 1


def test_planted_modularity_near_bound():
    f, p = gen_planted(GeneratorConfig(n=1000, ratio=4.25, communities=20, p_intra=1.0, seed=3))
    q = modularity(build_vig(f), p)
    assert 1 - 1 / 20 - 0.02 <= q <= 1 - 1 / 20 + 1e-9


def test_planted_inter_clauses_span_distinct_blocks():
    f, p = gen_planted(GeneratorConfig(n=200, ratio=3, communities=10, p_intra=0.0, seed=4))
    for c in f.clauses:
        assert len({p[abs(l) - 1] for l in c}) == 3


def test_single_block_matches_random():
    cfg = GeneratorConfig(n=60, ratio=4, communities=1, p_intra=0.5, seed=11)
    f, p = gen_planted(cfg)
    assert f == gen_random(cfg)
    assert p.num_communities == 1


@pytest.mark.parametrize("kw", [dict(n=101, communities=10, p_intra=1.0),
                                dict(n=20, communities=10, p_intra=1.0),
                                dict(n=20, communities=2, p_intra=0.5)])
def test_planted_invalid(kw):
    with pytest.raises(ValueError):
        gen_planted(GeneratorConfig(ratio=2, **kw))
