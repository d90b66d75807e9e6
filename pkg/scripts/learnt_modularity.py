"""Modularity of random 3-CNF before and after adding the learnt clauses the
solver keeps at the end of the search.

    python scripts/learnt_modularity.py --n 300 --ratio 4.25 --seeds 10
"""

import argparse
import csv
import sys
import time

from satcomm import GeneratorConfig, SolveConfig, augment, build_vig, gen_random, louvain, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--ratio", default="4.25")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budget", type=int, default=None, help="conflict cap per instance")
    ap.add_argument("--keep-all", action="store_true",
                    help="keep every learnt clause instead of reducing the database")
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["seed", "status", "conflicts", "learnt_kept", "q_orig", "q_learnt", "seconds"])
    for seed in range(args.seeds):
        t = time.perf_counter()
        f = gen_random(GeneratorConfig(n=args.n, ratio=args.ratio, seed=seed))
        out = solve(f, SolveConfig(conflict_budget=args.budget, reduce_db=not args.keep_all))
        kept = out.trace.checkpoints[out.total_conflicts]
        q_orig = louvain(build_vig(f))[1].q
        q_learnt = louvain(build_vig(augment(f, kept)))[1].q
        w.writerow([seed, out.status.value, out.total_conflicts, len(kept),
                    f"{q_orig:.4f}", f"{q_learnt:.4f}", f"{time.perf_counter() - t:.1f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
