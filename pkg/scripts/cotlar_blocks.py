"""Block-norm table of the conjugated operator for one lognormal weight, with the Cotlar bound."""

import argparse

from pdoweights.calculus import build_S_blocks
from pdoweights.corpus import lognormal_descriptors, make_corpus_weight
from pdoweights.grid import Grid
from pdoweights.symbols import make_builtin_symbol

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--length", type=float, default=8.0)
    ap.add_argument("--xi-cutoff", type=float, default=4.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = Grid(1, args.n, args.length)
    sym = make_builtin_symbol("s000", {"xi_cutoff": args.xi_cutoff}, length=args.length)
    w = make_corpus_weight(g, lognormal_descriptors(args.seed, 1, sigma=args.sigma)[0], args.seed, 0)
    t = build_S_blocks(sym, w)
    print(f"blocks={len(t.blocks)} opnorm={t.opnorm:.4f} cotlar_bound={t.cotlar_bound:.4f}")
    print(f"telescoping={t.telescoping_error:.2e} disjoint_max={t.disjoint_max:.2e} "
          f"dense_check={t.dense_check_error:.2e}")
    print(f"decay exponent: S*S {t.decay_exponent_left:.2f}, SS* {t.decay_exponent_right:.2f}")
    print(f"Schur condition constant (N2={t.N2}): {t.schur_constant:.3f}")
