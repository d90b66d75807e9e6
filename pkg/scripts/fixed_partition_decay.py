"""Q^part of planted instances at conflict checkpoints, with the variable
partition found on the original formula held fixed.

    python scripts/fixed_partition_decay.py --p-intra 0.95 --ratio 4.25
    python scripts/fixed_partition_decay.py --p-intra 0.5 --ratio 4.25
"""

import argparse
import csv
import sys

from satcomm import (GeneratorConfig, SolveConfig, build_vig, gen_planted, louvain,
                     modularity_fixed, solve)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--ratio", default="4.25")
    ap.add_argument("--communities", type=int, default=20)
    ap.add_argument("--p-intra", type=float, default=0.95)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--checkpoints", default="1000,10000")
    args = ap.parse_args()
    cps = tuple(int(x) for x in args.checkpoints.split(","))

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["seed", "status", "conflicts", "q_part_0"] + [f"q_part_{x}" for x in cps])
    for seed in range(args.seeds):
        f, _ = gen_planted(GeneratorConfig(n=args.n, ratio=args.ratio, seed=seed,
                                           communities=args.communities, p_intra=args.p_intra))
        part = louvain(build_vig(f))[0]
        out = solve(f, SolveConfig(checkpoints=cps, conflict_budget=cps[-1]))
        got = out.trace.checkpoints
        q = [modularity_fixed(f, got[x], part) if x in got else None for x in cps]
        w.writerow([seed, out.status.value, out.total_conflicts,
                    f"{modularity_fixed(f, (), part):.4f}"]
                   + ["" if v is None else f"{v:.4f}" for v in q])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
