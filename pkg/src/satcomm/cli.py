"""Command-line entry point: ``satcomm <command> ...``.

Exit codes: 0 success, 1 usage, 2 I/O or parse failure, 3 contract
violation (e.g. a literal beyond the declared variable count).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .cdcl import SolveConfig, solve
from .cnf import (DimacsError, Formula, VariableOverflowError, augment, read_dimacs,
                  read_learnt_trace, read_trace_file, write_dimacs, write_learnt_trace)
from .generators import DEFAULT_SEED, GeneratorConfig, gen_planted, gen_random
from .graphs import build_community_graph, build_cvig, build_vig, connected_components, export_dot
from .louvain import label_propagation, louvain, louvain_bipartite
from .modularity import (ModularityReport, brute_force_optimal, delta_trace,
                         format_delta_csv, modularity_fixed)
from .partition import format_partition, read_partition, write_partition

SEED_ENV = "SATCOMM_SEED"

EXIT_USAGE, EXIT_IO, EXIT_CONTRACT = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f6(x: float) -> str:
    return f"{x:.6f}"


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _report_text(rep: ModularityReport, fmt: str) -> str:
    if fmt == "json":
        d = {k: getattr(rep, k) for k in ModularityReport.FIELDS}
        d["q"] = round(d["q"], 6)
        d["largest_fraction"] = round(d["largest_fraction"], 6)
        return json.dumps(d) + "\n"
    if fmt == "human":
        return (f"Q={rep.q:.3f} |P|={rep.num_communities} "
                f"larg={100 * rep.largest_fraction:.1f}% iter={rep.iterations}\n")
    return _csv(ModularityReport.FIELDS, [rep.row()])


# -- analysis -----------------------------------------------------------------

def analyze(f: Formula, model: str = "vig", alg: str = "louvain", seed: int = DEFAULT_SEED,
            shuffle: bool = False):
    """Community structure of ``f``; returns ``(partition, report)``."""
    if model == "cvig":
        if alg != "louvain":
            raise UsageError("label propagation is only available on the VIG")
        return louvain_bipartite(build_cvig(f), seed, shuffle)
    g = build_vig(f)
    if alg == "lpa":
        return label_propagation(g, seed)
    return louvain(g, seed, shuffle)


def cmd_analyze(args) -> int:
    f = read_dimacs(args.path)
    part, rep = analyze(f, args.model, args.alg, args.seed, args.shuffle)
    _emit(_report_text(rep, args.format), args.out)
    if args.partition_out:
        write_partition(args.partition_out, part, f.num_vars)
    return 0


def cmd_components(args) -> int:
    f = read_dimacs(args.path)
    p = connected_components(build_vig(f))
    if args.format == "human":
        text = f"components={p.num_communities} larg={100 * p.largest_fraction:.1f}%\n"
    else:
        text = _csv(["num_components", "largest_fraction"],
                    [[p.num_communities, _f6(p.largest_fraction)]])
    _emit(text, args.out)
    return 0


def _gen_config(args) -> GeneratorConfig:
    try:
        return GeneratorConfig(args.n, args.ratio, args.k, args.seed,
                               args.communities if args.kind == "planted" else None,
                               args.p_intra)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_generate(args) -> int:
    cfg = _gen_config(args)
    try:
        if args.kind == "planted":
            if cfg.communities is None:
                raise UsageError("--kind planted needs --communities")
            f, part = gen_planted(cfg)
        else:
            f, part = gen_random(cfg), None
    except ValueError as e:
        raise UsageError(str(e)) from None
    comment = [f"{args.kind} k={cfg.k} n={cfg.n} ratio={cfg.ratio} seed={cfg.seed}"]
    if part is not None:
        comment.append(f"communities={cfg.communities} p_intra={args.p_intra}")
    Path(args.out).write_text(write_dimacs(f, comment))
    if part is not None:
        write_partition(partition_sidecar(args.out), part, f.num_vars)
    return 0


def partition_sidecar(path) -> Path:
    return Path(str(path) + ".partition")


def cmd_solve(args) -> int:
    f = read_dimacs(args.path)
    if args.budget is not None and args.checkpoints and args.budget < max(args.checkpoints):
        raise UsageError(f"--budget {args.budget} is below checkpoint {max(args.checkpoints)}")
    try:
        cfg = SolveConfig(tuple(args.checkpoints), args.budget, seed=args.seed,
                          reduce_db=args.reduce_db)
    except ValueError as e:
        raise UsageError(str(e)) from None
    out = solve(f, cfg)
    if args.dump_dir:
        base = args.base or Path(args.path).name.removesuffix(".cnf")
        trace = out.trace
        if not args.final:
            reached = {x: c for x, c in trace.checkpoints.items() if x in cfg.checkpoints}
            trace = type(trace)(trace.num_vars, reached)
        write_learnt_trace(trace, args.dump_dir, base)
    sys.stdout.write(out.stats_json() + "\n")
    return 0


def _original_partition(f: Formula, args):
    if getattr(args, "partition", None):
        return read_partition(args.partition, f.num_vars)
    part, _ = louvain(build_vig(f), args.seed, args.shuffle)
    return part


def evolve_rows(f: Formula, trace, mode: str, seed: int = DEFAULT_SEED,
                models=("vig", "cvig"), shuffle: bool = False, partition=None):
    """One row per checkpoint (plus ``X=0`` for the original formula)."""
    points = {0: ()}
    points.update(trace.checkpoints)
    if trace.num_vars > f.num_vars:
        raise VariableOverflowError(
            f"trace uses {trace.num_vars} variables, formula has {f.num_vars}")
    rows = []
    if mode == "fixed-partition":
        if partition is None:
            partition, _ = louvain(build_vig(f), seed, shuffle)
        for x, learnt in points.items():
            rows.append([x, len(learnt), _f6(modularity_fixed(f, learnt, partition))])
        return ["conflicts", "learnt", "q_part"], rows
    header = ["conflicts", "learnt"] + [f"q_{m}" for m in models]
    for x, learnt in points.items():
        g = augment(f, learnt)
        row = [x, len(learnt)]
        for m in models:
            _, rep = analyze(g, m, "louvain", seed, shuffle)
            row.append(_f6(rep.q))
        rows.append(row)
    return header, rows


def cmd_evolve(args) -> int:
    f = read_dimacs(args.path)
    trace = read_learnt_trace(args.trace_dir, args.base)
    partition = read_partition(args.partition, f.num_vars) if args.partition else None
    header, rows = evolve_rows(f, trace, args.mode, args.seed, tuple(args.models),
                               args.shuffle, partition)
    _emit(_csv(header, rows), args.out)
    return 0


def cmd_delta_trace(args) -> int:
    f = read_dimacs(args.path)
    _, learnt = read_trace_file(args.trace_file)
    if learnt.num_vars > f.num_vars:
        raise VariableOverflowError(
            f"trace uses {learnt.num_vars} variables, formula has {f.num_vars}")
    part = _original_partition(f, args)
    _emit(format_delta_csv(delta_trace(f, learnt.clauses, part)), args.out)
    return 0


def cmd_community_graph(args) -> int:
    f = read_dimacs(args.path)
    if args.trace:
        _, learnt = read_trace_file(args.trace)
        f = augment(f, learnt.clauses)
    g = build_vig(f, args.max_clause_len)
    if args.partition:
        part = read_partition(args.partition, f.num_vars)
    else:
        part, _ = louvain(g, args.seed, args.shuffle)
    _emit(export_dot(build_community_graph(g, part)), args.out)
    return 0


def cmd_oracle(args) -> int:
    f = read_dimacs(args.path)
    g = build_vig(f)
    try:
        part, q = brute_force_optimal(g, args.max_nodes)
    except ValueError as e:
        raise UsageError(str(e)) from None
    sys.stdout.write(_csv(ModularityReport.FIELDS,
                          [ModularityReport.for_partition(q, part).row()]))
    if args.partition_out:
        write_partition(args.partition_out, part, f.num_vars)
    else:
        sys.stdout.write(format_partition(part, f.num_vars))
    return 0


# -- scan -----------------------------------------------------------------------

def _scan_job(job):
    n, ratio, k, seed, shuffle = job
    f = gen_random(GeneratorConfig(n, ratio, k, seed))
    _, rep = louvain(build_vig(f), seed, shuffle)
    return rep


def scan(ns, ratios, seeds, k=3, jobs=1, shuffle=False):
    """Louvain-VIG statistics over an (n, ratio) grid of random k-CNF.

    Returns per-seed rows ``(n, ratio, seed, report)`` ordered by cell
    then seed.
    """
    grid = [(n, r, k, s, shuffle) for n in ns for r in ratios for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            reports = list(ex.map(_scan_job, grid))
    else:
        reports = [_scan_job(j) for j in grid]
    return [(n, r, s, rep) for (n, r, _, s, _), rep in zip(grid, reports)]


def summarize_scan(rows):
    cells: dict[tuple, list] = {}
    for n, r, _, rep in rows:
        cells.setdefault((n, r), []).append(rep)
    out = []
    for (n, r), reps in cells.items():
        def ms(vals):
            return (statistics.fmean(vals),
                    statistics.stdev(vals) if len(vals) > 1 else 0.0)
        q = ms([x.q for x in reps])
        p = ms([x.num_communities for x in reps])
        lg = ms([x.largest_fraction for x in reps])
        it = ms([x.iterations for x in reps])
        out.append([n, r, len(reps), *map(_f6, (*q, *p, *lg, *it))])
    return out


SCAN_HEADER = ["n", "ratio", "seeds", "q_mean", "q_std", "communities_mean",
               "communities_std", "largest_fraction_mean", "largest_fraction_std",
               "iterations_mean", "iterations_std"]


def cmd_scan(args) -> int:
    seeds = range(args.seed, args.seed + args.seeds)
    rows = scan(args.ns, args.ratios, seeds, args.k, args.jobs, args.shuffle)
    _emit(_csv(SCAN_HEADER, summarize_scan(rows)), args.out)
    if args.per_seed:
        Path(args.per_seed).write_text(_csv(
            ["n", "ratio", "seed", *ModularityReport.FIELDS],
            [[n, r, s, *rep.row()] for n, r, s, rep in rows]))
    return 0


# -- parser ---------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x]


def _float_list(text: str) -> list[str]:
    out = []
    for x in text.split(","):
        if x:
            float(x)
            out.append(x)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="satcomm", description="Community structure of SAT instances.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    seed = default_seed()

    def common(sp, louvain_opts=True):
        sp.add_argument("--seed", type=int, default=seed,
                        help=f"PRNG seed (default ${SEED_ENV} or {DEFAULT_SEED})")
        if louvain_opts:
            sp.add_argument("--shuffle", action="store_true",
                            help="visit nodes in seeded random order instead of ascending")
        sp.add_argument("-o", "--out", default=None, help="output file (default stdout)")

    a = sub.add_parser("analyze", help="modularity of a DIMACS formula")
    a.add_argument("path")
    a.add_argument("--model", choices=["vig", "cvig"], default="vig")
    a.add_argument("--alg", choices=["louvain", "lpa"], default="louvain")
    a.add_argument("--format", choices=["csv", "json", "human"], default="csv")
    a.add_argument("--partition-out")
    common(a)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("components", help="connected components of the VIG")
    c.add_argument("path")
    c.add_argument("--format", choices=["csv", "human"], default="csv")
    common(c, louvain_opts=False)
    c.set_defaults(func=cmd_components)

    g = sub.add_parser("generate", help="write a random or planted k-CNF")
    g.add_argument("--kind", choices=["random", "planted"], default="random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--ratio", required=True, help="clauses per variable, e.g. 4.25")
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--communities", type=int)
    g.add_argument("--p-intra", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=seed)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run the CDCL probe and dump learnt traces")
    s.add_argument("path")
    s.add_argument("--checkpoints", type=_int_list, default=[],
                   help="comma-separated conflict counts, e.g. 1000,10000")
    s.add_argument("--budget", type=int, default=None, help="maximum conflicts")
    s.add_argument("--dump-dir")
    s.add_argument("--base", help="trace file base name (default: input stem)")
    s.add_argument("--final", action="store_true",
                   help="also dump the snapshot taken when the search stops")
    s.add_argument("--reduce-db", action="store_true",
                   help="periodically halve the learnt clause database")
    s.add_argument("--seed", type=int, default=seed)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("evolve", help="modularity of formulas augmented with learnt traces")
    e.add_argument("path")
    e.add_argument("trace_dir")
    e.add_argument("--mode", choices=["recompute", "fixed-partition"], default="recompute")
    e.add_argument("--models", type=lambda t: t.split(","), default=["vig", "cvig"])
    e.add_argument("--base")
    e.add_argument("--partition", help="partition file for fixed-partition mode")
    common(e)
    e.set_defaults(func=cmd_evolve)

    d = sub.add_parser("delta-trace", help="per-clause change of Q under the original partition")
    d.add_argument("path")
    d.add_argument("trace_file")
    d.add_argument("--partition")
    common(d)
    d.set_defaults(func=cmd_delta_trace)

    cg = sub.add_parser("community-graph", help="graph of communities as DOT")
    cg.add_argument("path")
    cg.add_argument("--partition")
    cg.add_argument("--trace", help="learnt-trace file to append before building")
    cg.add_argument("--max-clause-len", type=int)
    common(cg)
    cg.set_defaults(func=cmd_community_graph)

    o = sub.add_parser("oracle", help="exact optimal modularity of a tiny VIG")
    o.add_argument("path")
    o.add_argument("--max-nodes", type=int, default=10)
    o.add_argument("--partition-out")
    o.set_defaults(func=cmd_oracle)

    sc = sub.add_parser("scan", help="Louvain-VIG statistics over a random 3-CNF grid")
    sc.add_argument("--ns", type=_int_list, default=[10_000])
    sc.add_argument("--ratios", type=_float_list, default=["4.25"])
    sc.add_argument("--k", type=int, default=3)
    sc.add_argument("--seeds", type=int, default=10, help="instances per cell")
    sc.add_argument("--jobs", type=int, default=1, help="worker processes")
    sc.add_argument("--per-seed", help="also write one row per instance here")
    common(sc)
    sc.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    if getattr(args, "models", None):
        bad = set(args.models) - {"vig", "cvig"}
        if bad:
            print(f"satcomm: error: unknown model(s): {', '.join(sorted(bad))}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"satcomm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except VariableOverflowError as e:
        print(f"satcomm: contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (DimacsError, OSError, UnicodeDecodeError) as e:
        print(f"satcomm: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        # malformed partition files and similar input errors
        print(f"satcomm: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
