"""Sup of the composition error symbol and its x-derivative against the cutoff radius R."""

import argparse

from pdoweights.calculus import verify_error_decay
from pdoweights.grid import Grid
from pdoweights.symbols import make_builtin_symbol

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--length", type=float, default=8.0)
    ap.add_argument("--R", type=float, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--N", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--epsilon", type=float, default=0.5)
    args = ap.parse_args()
    g = Grid(1, args.n, args.length)
    sym = make_builtin_symbol("x_modulated", {}, length=args.length)
    for N in args.N:
        rep = verify_error_decay(sym, args.R, N=N, epsilon=args.epsilon, grid=g)
        consts = " ".join(f"{c:.3e}" for c in rep.constants[0])
        print(f"N={N} exponent={rep.exponent:+.2f} slope={rep.slope:+.3f} passed={rep.passed} C0: {consts}")
