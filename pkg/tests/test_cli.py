import csv
import io
import json
import subprocess
import sys

import pytest

from satcomm.cli import main
from satcomm.cnf import Formula, LearntTrace, read_dimacs, write_dimacs, write_learnt_trace
from satcomm.graphs import build_vig
from satcomm.louvain import louvain
from satcomm.modularity import modularity_fixed
from satcomm.partition import read_partition


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def blocks_cnf(tmp_path):
    # two variable-disjoint blocks of clauses
    f = Formula(6, ((1, 2, 3), (-1, 2), (2, -3), (4, 5, 6), (-4, 5), (5, -6)))
    p = tmp_path / "blocks.cnf"
    p.write_text(write_dimacs(f))
    return p


@pytest.fixture
def random_cnf(tmp_path, capsys):
    p = tmp_path / "r.cnf"
    assert run(capsys, "generate", "--n", 120, "--ratio", 4.25, "--seed", 3, "-o", p)[0] == 0
    return p


def test_analyze_disjoint_blocks(capsys, blocks_cnf, tmp_path):
    part = tmp_path / "p.txt"
    code, out, _ = run(capsys, "analyze", blocks_cnf, "--partition-out", part)
    assert code == 0
    (row,) = rows(out)
    assert int(row["num_communities"]) >= 2
    assert float(row["largest_fraction"]) <= 0.5 + 1e-9
    assert read_partition(part, 6).num_communities >= 2


@pytest.mark.parametrize("model,alg", [("vig", "louvain"), ("vig", "lpa"), ("cvig", "louvain")])
def test_analyze_models(capsys, random_cnf, model, alg):
    code, out, _ = run(capsys, "analyze", random_cnf, "--model", model, "--alg", alg,
                       "--format", "json")
    assert code == 0
    rep = json.loads(out)
    # label propagation may collapse a random formula into one community
    assert (0 <= rep["q"] if alg == "lpa" else 0 < rep["q"]) and rep["q"] < 1
    assert set(rep) == {"q", "num_communities", "largest_fraction", "iterations"}


def test_analyze_human(capsys, random_cnf):
    code, out, _ = run(capsys, "analyze", random_cnf, "--format", "human")
    assert code == 0 and out.startswith("Q=")


def test_cvig_lpa_is_usage_error(capsys, random_cnf):
    code, _, err = run(capsys, "analyze", random_cnf, "--model", "cvig", "--alg", "lpa")
    assert code == 1 and "error" in err


def test_parse_failure_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf x\n")
    assert run(capsys, "analyze", bad)[0] == 2
    assert run(capsys, "analyze", tmp_path / "missing.cnf")[0] == 2


def test_overflow_exit_code(capsys, tmp_path):
    bad = tmp_path / "o.cnf"
    bad.write_text("p cnf 2 1\n1 5 0\n")
    assert run(capsys, "analyze", bad)[0] == 3


def test_unknown_option_exit_code(capsys):
    assert run(capsys, "analyze")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "analyze", "x.cnf", "--model", "dag")[0] == 1


def test_components(capsys, tmp_path):
    p = tmp_path / "c.cnf"
    p.write_text("p cnf 5 1\n1 -2 4 0\n")
    code, out, _ = run(capsys, "components", p)
    assert code == 0
    assert rows(out) == [{"num_components": "3", "largest_fraction": "0.600000"}]


def test_components_planted(capsys, tmp_path):
    p = tmp_path / "pl.cnf"
    run(capsys, "generate", "--kind", "planted", "--n", 400, "--ratio", 4.25,
        "--communities", 20, "--p-intra", 1.0, "-o", p)
    _, out, _ = run(capsys, "components", p)
    assert int(rows(out)[0]["num_components"]) >= 20


def test_generate_table_row(capsys, tmp_path):
    p = tmp_path / "big.cnf"
    assert run(capsys, "generate", "--n", 10000, "--ratio", 4.25, "--k", 3, "-o", p)[0] == 0
    f = read_dimacs(p)
    assert f.num_clauses == 42500 and not f.header_mismatch


def test_generate_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    for p in (a, b):
        run(capsys, "generate", "--n", 200, "--ratio", 3.5, "--seed", 17, "-o", p)
    assert a.read_bytes() == b.read_bytes()


def test_generate_planted_sidecar(capsys, tmp_path):
    p = tmp_path / "pl.cnf"
    code, _, _ = run(capsys, "generate", "--kind", "planted", "--n", 100, "--ratio", 4,
                     "--communities", 20, "--p-intra", 1.0, "-o", p)
    assert code == 0
    side = tmp_path / "pl.cnf.partition"
    assert side.exists()
    assert read_partition(side, 100).num_communities == 20


def test_generate_invalid(capsys, tmp_path):
    assert run(capsys, "generate", "--n", 2, "--ratio", 1, "-o", tmp_path / "x.cnf")[0] == 1
    assert run(capsys, "generate", "--kind", "planted", "--n", 10, "--ratio", 1,
               "-o", tmp_path / "x.cnf")[0] == 1


def test_seed_environment_variable(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    monkeypatch.setenv("SATCOMM_SEED", "5")
    run(capsys, "generate", "--n", 50, "--ratio", 2, "-o", a)
    run(capsys, "generate", "--n", 50, "--ratio", 2, "--seed", 5, "-o", b)
    assert a.read_bytes() == b.read_bytes()


def test_solve_unsat_instance_one_trace(capsys, tmp_path):
    # n=300 seed 1 at 4.25 is unsatisfiable; only the first 10^3 conflicts are needed
    p = tmp_path / "u.cnf"
    run(capsys, "generate", "--n", 300, "--ratio", 4.25, "--seed", 1, "-o", p)
    dump = tmp_path / "traces"
    code, out, _ = run(capsys, "solve", p, "--checkpoints", 1000, "--budget", 1000,
                       "--dump-dir", dump)
    assert code == 0
    assert json.loads(out)["status"] == "BUDGET_EXHAUSTED"
    assert [x.name for x in dump.iterdir()] == ["u.learnt.1000.cnf"]


def test_solve_trivially_sat(capsys, tmp_path):
    p = tmp_path / "t.cnf"
    p.write_text("p cnf 2 1\n1 2 0\n")
    code, out, _ = run(capsys, "solve", p, "--dump-dir", tmp_path / "d", "--final")
    stats = json.loads(out)
    assert code == 0 and stats["status"] == "SAT" and stats["conflicts"] == 0
    assert [x.name for x in (tmp_path / "d").iterdir()] == ["t.learnt.0.cnf"]


def test_solve_budget_below_checkpoint(capsys, random_cnf):
    assert run(capsys, "solve", random_cnf, "--checkpoints", "100,1000", "--budget", 50)[0] == 1


def test_evolve_empty_trace(capsys, random_cnf, tmp_path):
    f = read_dimacs(random_cnf)
    write_learnt_trace(LearntTrace(f.num_vars, {10: ()}), tmp_path / "tr", "r")
    _, out, _ = run(capsys, "evolve", random_cnf, tmp_path / "tr")
    first, second = rows(out)
    assert first["q_vig"] == second["q_vig"] and first["q_cvig"] == second["q_cvig"]
    _, out, _ = run(capsys, "evolve", random_cnf, tmp_path / "tr", "--mode", "fixed-partition")
    first, second = rows(out)
    assert first["q_part"] == second["q_part"]


def test_evolve_fixed_partition_matches_oracle(capsys, random_cnf, tmp_path):
    dump = tmp_path / "tr"
    run(capsys, "solve", random_cnf, "--checkpoints", "5,20", "--dump-dir", dump, "--final")
    _, out, _ = run(capsys, "evolve", random_cnf, dump, "--mode", "fixed-partition")
    f = read_dimacs(random_cnf)
    part, _ = louvain(build_vig(f), 42)
    from satcomm.cnf import read_learnt_trace
    trace = read_learnt_trace(dump)
    for row in rows(out):
        x = int(row["conflicts"])
        learnt = trace.checkpoints.get(x, ())
        q = float(row["q_part"])
        assert q <= 1
        assert q == pytest.approx(modularity_fixed(f, learnt, part), abs=1e-6)


def test_evolve_overflow(capsys, random_cnf, tmp_path):
    write_learnt_trace(LearntTrace(500, {3: ((400, 1),)}), tmp_path / "tr", "r")
    assert run(capsys, "evolve", random_cnf, tmp_path / "tr")[0] == 3


def test_evolve_missing_trace(capsys, random_cnf, tmp_path):
    (tmp_path / "empty").mkdir()
    assert run(capsys, "evolve", random_cnf, tmp_path / "empty")[0] == 2


def test_delta_trace_matches_evolve(capsys, random_cnf, tmp_path):
    dump = tmp_path / "tr"
    run(capsys, "solve", random_cnf, "--checkpoints", "30", "--dump-dir", dump)
    code, out, _ = run(capsys, "delta-trace", random_cnf, dump / "r.learnt.30.cnf")
    assert code == 0
    recs = rows(out)
    assert len(recs) == 30
    _, ev, _ = run(capsys, "evolve", random_cnf, dump, "--mode", "fixed-partition")
    at30 = [r for r in rows(ev) if r["conflicts"] == "30"][0]
    assert recs[-1]["q_after"] == at30["q_part"]


def test_delta_trace_empty(capsys, random_cnf, tmp_path):
    write_learnt_trace(LearntTrace(120, {7: ()}), tmp_path, "e")
    _, out, _ = run(capsys, "delta-trace", random_cnf, tmp_path / "e.learnt.7.cnf")
    assert out == "clause_index,delta_q,q_after\n"


def test_community_graph(capsys, tmp_path):
    p = tmp_path / "pl.cnf"
    run(capsys, "generate", "--kind", "planted", "--n", 100, "--ratio", 4, "--communities", 5,
        "--p-intra", 0.9, "-o", p)
    code, out, _ = run(capsys, "community-graph", p, "--partition", tmp_path / "pl.cnf.partition")
    assert code == 0 and out.startswith("graph communities {")
    assert out.count("label=") == 5
    _, out, _ = run(capsys, "community-graph", p, "--partition",
                    tmp_path / "pl.cnf.partition", "--max-clause-len", 2)
    assert "--" not in out


def test_oracle(capsys, tmp_path):
    p = tmp_path / "t.cnf"
    p.write_text("p cnf 6 6\n1 2 0\n2 3 0\n1 3 0\n4 5 0\n5 6 0\n4 6 0\n")
    code, out, _ = run(capsys, "oracle", p)
    assert code == 0
    assert out.splitlines()[1].startswith("0.500000,2,")


def test_oracle_too_large(capsys, random_cnf):
    assert run(capsys, "oracle", random_cnf)[0] == 1


def test_scan(capsys, tmp_path):
    per = tmp_path / "per.csv"
    code, out, _ = run(capsys, "scan", "--ns", "100", "--ratios", "2,4.25", "--seeds", 2,
                       "--per-seed", per)
    assert code == 0
    summary = rows(out)
    assert [r["ratio"] for r in summary] == ["2", "4.25"]
    assert len(rows(per.read_text())) == 4


def test_module_entry_point(tmp_path):
    p = tmp_path / "t.cnf"
    p.write_text("p cnf 3 1\n1 2 3 0\n")
    r = subprocess.run([sys.executable, "-m", "satcomm", "components", str(p)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("num_components")
