import random

import pytest
from hypothesis import given, settings

from satcomm.cdcl import SolveConfig, Status, luby, satisfies, solve
from satcomm.cnf import Formula, augment, read_learnt_trace, write_learnt_trace
from satcomm.generators import GeneratorConfig, gen_random

from oracles import brute_sat, implied
from strategies import formulas

ENGINES = ["fast", "reference"]


def small_instances(count=200, seed=0):
    rng = random.Random(seed)
    for i in range(count):
        n = rng.randint(3, 20)
        ratio = rng.choice(["2", "3.5", "4.25", "5", "7"])
        yield gen_random(GeneratorConfig(n=n, ratio=ratio, k=rng.choice([2, 3, 3, 3]), seed=i))


def test_luby_prefix():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


@pytest.mark.parametrize("engine", ENGINES)
def test_contradictory_units(engine):
    out = solve(Formula(1, ((1,), (-1,))), SolveConfig(engine=engine))
    assert out.status is Status.UNSAT and out.total_conflicts <= 1


@pytest.mark.parametrize("engine", ENGINES)
def test_single_binary_clause(engine):
    f = Formula(2, ((1, 2),))
    out = solve(f, SolveConfig(engine=engine))
    assert out.status is Status.SAT and out.total_conflicts == 0
    assert satisfies(f, out.model)


@pytest.mark.parametrize("engine", ENGINES)
def test_all_four_binary_clauses(engine):
    f = Formula(2, ((1, 2), (-1, 2), (1, -2), (-1, -2)))
    out = solve(f, SolveConfig(engine=engine, checkpoints=(1,)))
    assert out.status is Status.UNSAT
    for learnt in out.trace.checkpoints.values():
        assert all(implied(f, c) for c in learnt)


@pytest.mark.parametrize("engine", ENGINES)
def test_empty_clause_and_empty_formula(engine):
    assert solve(Formula(2, ((),)), SolveConfig(engine=engine)).status is Status.UNSAT
    out = solve(Formula(3, ()), SolveConfig(engine=engine))
    assert out.status is Status.SAT and len(out.model) == 3


@pytest.mark.parametrize("engine", ENGINES)
@pytest.mark.parametrize("reduce_db", [False, True])
def test_brute_force_agreement(engine, reduce_db):
    cfg = SolveConfig(engine=engine, reduce_db=reduce_db, reduce_factor=0.05,
                      restart_unit=5)
    for f in small_instances():
        out = solve(f, cfg)
        assert out.status is (Status.SAT if brute_sat(f) else Status.UNSAT)
        if out.status is Status.SAT:
            assert satisfies(f, out.model)


@pytest.mark.parametrize("engine", ENGINES)
def test_learnt_clauses_are_implied(engine):
    checked = 0
    for f in small_instances(60, seed=1):
        if f.num_vars > 14:
            continue
        out = solve(f, SolveConfig(engine=engine, checkpoints=(1, 5, 20)))
        for learnt in out.trace.checkpoints.values():
            for c in learnt:
                assert implied(f, c)
                checked += 1
    assert checked > 100


@settings(max_examples=60, deadline=None)
@given(formulas(max_vars=10, max_clauses=40, max_len=3))
def test_augmented_formula_keeps_satisfiability(f):
    out = solve(f, SolveConfig(checkpoints=(1, 2, 4, 8)))
    final = out.trace.checkpoints[max(out.trace.checkpoints)]
    assert brute_sat(augment(f, final)) == brute_sat(f)


def test_engines_agree_on_medium_instances():
    for seed in range(20):
        f = gen_random(GeneratorConfig(n=60, ratio=4.25, seed=seed))
        a = solve(f, SolveConfig(engine="fast"))
        b = solve(f, SolveConfig(engine="reference"))
        assert a.status == b.status


def test_trace_prefix_property_without_reduction():
    f = gen_random(GeneratorConfig(n=80, ratio=4.25, seed=4))
    out = solve(f, SolveConfig(checkpoints=(10, 50, 100), conflict_budget=100))
    cps = out.trace.checkpoints
    assert [len(cps[x]) for x in (10, 50, 100)] == [10, 50, 100]
    assert cps[50][:10] == cps[10] and cps[100][:50] == cps[50]


def test_budget_exhausted_before_checkpoint():
    f = gen_random(GeneratorConfig(n=150, ratio=4.25, seed=0))
    out = solve(f, SolveConfig(checkpoints=(100, 10_000), conflict_budget=500))
    assert out.status is Status.BUDGET_EXHAUSTED
    assert 100 in out.trace.checkpoints and 10_000 not in out.trace.checkpoints
    assert out.total_conflicts == 500


def test_budget_zero():
    f = gen_random(GeneratorConfig(n=150, ratio=4.25, seed=0))
    out = solve(f, SolveConfig(conflict_budget=0))
    assert out.status is Status.BUDGET_EXHAUSTED and out.total_conflicts == 0


@pytest.mark.parametrize("kw", [dict(checkpoints=(10, 5)), dict(checkpoints=(0,)),
                                dict(conflict_budget=-1),
                                dict(restart="geometric"), dict(engine="gpu")])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        SolveConfig(**kw)


def test_determinism():
    f = gen_random(GeneratorConfig(n=120, ratio=4.25, seed=8))
    cfg = SolveConfig(checkpoints=(50,), random_var_freq=0.05, seed=3)
    a, b = solve(f, cfg), solve(f, cfg)
    assert a.trace == b.trace and a.stats == b.stats


def test_reduction_bounds_learnt_database():
    f = gen_random(GeneratorConfig(n=200, ratio=4.25, seed=1))
    out = solve(f, SolveConfig(reduce_db=True,
                               conflict_budget=3000))
    assert out.stats["learnt_kept"] < 1000


def test_trace_round_trip_300_vars(tmp_path):
    f = gen_random(GeneratorConfig(n=300, ratio=4.25, seed=0))
    out = solve(f, SolveConfig(checkpoints=(100, 1000), conflict_budget=1000))
    write_learnt_trace(out.trace, tmp_path, "r300")
    assert read_learnt_trace(tmp_path, "r300") == out.trace


def test_stats_json():
    out = solve(Formula(2, ((1, 2),)))
    assert set(__import__("json").loads(out.stats_json())) >= {
        "status", "conflicts", "decisions", "propagations", "restarts"}
