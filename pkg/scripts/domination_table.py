"""Empirical constant of  M_{rho,m} w <= C (M w^s)^(1/s)  against the discrete Hoelder constant, per s."""

import argparse

from pdoweights.corpus import make_corpus_weight, standard_weight_descriptors
from pdoweights.grid import Grid
from pdoweights.maximal import check_domination

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--rho", type=float, default=0.5)
    ap.add_argument("--s", type=float, nargs="+", default=[1.0, 1.5, 2.0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = Grid(1, args.n)
    weights = [make_corpus_weight(g, d, args.seed, j) for j, d in enumerate(standard_weight_descriptors(args.seed))]
    print(f"{'s':>5} {'m':>8} {'worst':>8} {'geometric':>10} {'<=1?':>5}")
    for s in args.s:
        m = (args.rho - 1.0) / (2.0 * s)
        reps = [check_domination(w, args.rho, m) for w in weights]
        worst = max(r.constant for r in reps)
        print(f"{s:5.2f} {m:8.4f} {worst:8.4f} {reps[0].geometric_constant:10.4f} {str(worst <= 1.05):>5}")
