"""Composition with a frequency cutoff, error-symbol decay, Schur bounds and Cotlar blocks.

Composition
-----------
For ``T_c = T_phiR o T_a`` the lattice version of the composed symbol is

    c(x, xi) = sum_eta phiR(xi + eta) ahat(eta, xi) exp(i x eta),

with ``ahat`` the DFT of ``a`` in ``x``. Frequencies add modulo the lattice,
which makes ``T_c f == T_phiR(T_a f)`` exact on the grid. The Taylor terms
use spectral ``x`` derivatives of ``a`` and derivatives of the fixed annular
bump ``phi`` (analytic in d = 1, central differences in d = 2).

Cotlar blocks
-------------
``S f = (Aw)^(1/2) T_a((Aw)^(-1/2) f)`` is cut into pieces ``S_i`` with
symbols ``a(x, xi) psi(x - i) psi(xi - i')``. Each piece has rank equal to the
number of lattice frequencies in its xi-cell, so ``S_i = X_i Y_i^*`` with thin
factors and every block norm reduces to a small matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bumps import annular, partition_bump, radial_derivative_1d
from .grid import Field, Grid, GridError
from .maximal import psi_kernel, smooth_majorant, torus_convolve
from .operators import Kernel, kernel_from_table, opnorm_2, symbol_table, verify_kernel_decay
from .reports import loglog_slope
from .symbols import Symbol

PHI_RISE = (0.5, 1.0)
PHI_FALL = (2.0, 3.0)
DEFAULT_KAPPA = 0.1
MAX_BLOCKS = 600


def phi_hat(r, order: int = 0) -> np.ndarray:
    """Annular bump: 0 below 1/2, 1 on [1, 2], 0 above 3 (radial profile and its derivatives)."""
    return annular(r, PHI_RISE, PHI_FALL, order)


def _phi_R_derivative(grid: Grid, R: float, gamma: tuple) -> np.ndarray:
    """d^gamma/dxi^gamma of phi(|xi|/R) on the lattice, flattened FFT order."""
    xi = grid.frequencies()
    order = sum(gamma)
    if grid.dim == 1:
        prof = lambda r, k: phi_hat(r / R, k) / R**k
        return radial_derivative_1d(prof, xi[:, 0], order)
    if order == 0:
        return phi_hat(np.sqrt(np.sum(xi**2, axis=-1)) / R)
    step = 1e-2 * R
    out = np.zeros(len(xi))
    stencils = [_central(g) for g in gamma]
    for combo in itertools.product(*stencils):
        coef = np.prod([c for _, c in combo])
        shift = np.array([o for o, _ in combo]) * step
        out += coef * phi_hat(np.sqrt(np.sum((xi + shift) ** 2, axis=-1)) / R)
    return out / step**order


def _central(order: int) -> list[tuple[float, float]]:
    if order == 0:
        return [(0.0, 1.0)]
    # order-th central difference with half steps: sum_k (-1)^k C(n,k) f(x + (n/2 - k) h)
    return [(order / 2.0 - k, (-1) ** k * math.comb(order, k)) for k in range(order + 1)]


def _multi_indices(dim: int, below: int):
    for tot in range(below):
        for g in itertools.product(range(tot + 1), repeat=dim):
            if sum(g) == tot:
                yield g


def _x_hat(grid: Grid, table: np.ndarray) -> np.ndarray:
    """DFT in x of a flattened table (rows = x points); returns (n,)*d + (cols,)."""
    d = grid.dim
    t = table.reshape(grid.shape + (table.shape[1],))
    return np.fft.fftn(t, axes=tuple(range(d))) / grid.size


def _x_inv(grid: Grid, hat: np.ndarray) -> np.ndarray:
    d = grid.dim
    t = np.fft.ifftn(hat, axes=tuple(range(d))) * grid.size
    return t.reshape(grid.size, -1)


def _x_derivative(grid: Grid, hat: np.ndarray, gamma: tuple) -> np.ndarray:
    ax = grid.axis_xi()
    mult = np.ones(grid.shape, dtype=complex)
    for axis, g in enumerate(gamma):
        if g:
            shape = [1] * grid.dim
            shape[axis] = grid.n
            mult = mult * ((1j * ax) ** g).reshape(shape)
    return _x_inv(grid, hat * mult[..., None])


@dataclass
class CompositionResult:
    grid: Grid
    label: str
    m: float
    rho: float
    delta: float
    R: float
    N: int
    epsilon: float
    kappa: float
    c: np.ndarray = field(repr=False)
    expansion: np.ndarray = field(repr=False)
    error: np.ndarray = field(repr=False)
    identity_error: float | None = None

    @property
    def error_exponent(self) -> float:
        d = self.grid.dim
        return self.m - self.N * (1 - self.delta) + d * self.delta + self.kappa * self.delta + self.epsilon

    def sup_error(self) -> float:
        return float(np.max(np.abs(self.error)))

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "symbol": self.label, "m": self.m, "rho": self.rho,
                "delta": self.delta, "R": self.R, "N": self.N, "epsilon": self.epsilon, "kappa": self.kappa,
                "error_exponent": self.error_exponent, "sup_error": self.sup_error(),
                "identity_error": self.identity_error}


def default_grid(sym: Symbol, R_max: float, n_min: int = 256) -> Grid:
    """Smallest power-of-two grid (at least ``n_min``) whose Nyquist frequency holds 3 R_max."""
    n = n_min
    while math.pi * n / sym.length < PHI_FALL[1] * R_max:
        n *= 2
    return Grid(sym.dim, n, sym.length)


def apply_table(grid: Grid, table: np.ndarray, f: Field) -> Field:
    """Direct quadrature sum_k e^{i x xi_k} table[x, k] fhat(k)."""
    from .grid import transform
    phases = np.exp(1j * (grid.points() @ grid.frequencies().T))
    return Field(grid, (phases * table) @ transform(f).coefficients.ravel())


def compose_cutoff(sym: Symbol, R: float, N: int, grid: Grid | None = None, *, epsilon: float = 0.5,
                   kappa: float = DEFAULT_KAPPA, check_identity: bool = True, n_fields: int = 20,
                   seed: int = 0) -> CompositionResult:
    """Symbol of T_phiR o T_a, its Taylor expansion to order N and the remainder e^N."""
    from .grid import Spectrum, inverse, transform
    from .operators import apply_pdo

    grid = grid or default_grid(sym, R)
    if R < 2:
        raise ValueError("R must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    if PHI_FALL[1] * R > grid.nyquist:
        raise GridError(f"cutoff support 3R = {3 * R:g} exceeds the Nyquist frequency {grid.nyquist:.4g}")
    n, d = grid.n, grid.dim
    table = symbol_table(sym, grid)
    hat = _x_hat(grid, table)
    phi0 = _phi_R_derivative(grid, R, (0,) * d).reshape(grid.shape)
    # phi_R at (eta + xi_k) mod lattice, for every eta (leading axes) and column k
    k_idx = np.unravel_index(np.arange(grid.size), grid.shape)
    grids = np.meshgrid(*([np.arange(n)] * d), indexing="ij")
    sel = tuple((g[..., None] + k_idx[a][None, ...].reshape((1,) * d + (-1,))) % n for a, g in enumerate(grids))
    c = _x_inv(grid, phi0[sel] * hat)

    expansion = np.zeros_like(c)
    for gamma in _multi_indices(d, N):
        order = sum(gamma)
        dphi = _phi_R_derivative(grid, R, gamma)
        dx_a = table if order == 0 else _x_derivative(grid, hat, gamma)
        coef = (-1j) ** order / math.prod(math.factorial(g) for g in gamma)
        expansion += coef * dphi[None, :] * dx_a
    res = CompositionResult(grid, sym.label, sym.params.m, sym.params.rho, sym.params.delta, float(R), int(N),
                            float(epsilon), float(kappa), c, expansion, c - expansion)
    if check_identity:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_fields):
            f = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
            lhs = apply_table(grid, c, f).values
            inner = apply_pdo(sym, f).values
            rhs = inverse(Spectrum(grid, transform(Field(grid, inner)).coefficients * phi0)).values
            worst = max(worst, float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300)))
        res.identity_error = worst
    return res


@dataclass
class ErrorDecayReport:
    label: str
    R_list: list
    N: int
    epsilon: float
    exponent: float
    constants: dict
    slope: float
    identity_errors: list
    vacuous: bool
    monotone: bool
    band: float

    @property
    def passed(self) -> bool:
        return self.vacuous or (np.isfinite(self.slope) and self.slope <= -self.epsilon + self.band)

    def to_dict(self) -> dict:
        return {"symbol": self.label, "R": self.R_list, "N": self.N, "epsilon": self.epsilon,
                "exponent": self.exponent, "constants": {str(k): v for k, v in self.constants.items()},
                "slope": self.slope, "identity_errors": self.identity_errors, "vacuous": self.vacuous,
                "monotone": self.monotone, "band": self.band, "passed": self.passed}


def verify_error_decay(sym: Symbol, R_list=(8, 16, 32, 64), N: int = 1, epsilon: float = 0.5,
                       grid: Grid | None = None, kappa: float = DEFAULT_KAPPA, band: float = 0.2,
                       x_orders=(0, 1)) -> ErrorDecayReport:
    """C_nu(R) = sup |d_x^nu e^N| (1+|xi|)^-(exponent + nu delta); fits log C_0 against log R."""
    if len(R_list) < 3:
        raise ValueError("need at least three R values")
    d = sym.dim
    delta = sym.params.delta
    need = (d * delta + kappa * delta + epsilon) / (1 - delta)
    if not N > need:
        raise ValueError(f"N = {N} must exceed {need:g}")
    grid = grid or default_grid(sym, max(R_list))
    consts: dict = {nu: [] for nu in x_orders}
    ids = []
    exponent = None
    for R in R_list:
        res = compose_cutoff(sym, R, N, grid, epsilon=epsilon, kappa=kappa, n_fields=4)
        exponent = res.error_exponent
        ids.append(res.identity_error)
        r = np.sqrt(np.sum(grid.frequencies() ** 2, axis=-1))
        hat = _x_hat(grid, res.error)
        for nu in x_orders:
            e = res.error if nu == 0 else _x_derivative(grid, hat, (nu,) + (0,) * (d - 1))
            weight = (1.0 + r) ** (-(exponent + nu * delta))
            consts[nu].append(float(np.max(np.abs(e) * weight[None, :])))
    c0 = np.array(consts[x_orders[0]])
    vacuous = bool(np.all(c0 < 1e-10))
    slope = float("nan") if vacuous else loglog_slope(R_list, c0)
    monotone = bool(np.all(c0[1:] <= 1.1 * c0[:-1] + 1e-12))
    return ErrorDecayReport(sym.label, list(R_list), N, epsilon, exponent, consts, slope, ids, vacuous, monotone, band)


def error_kernel_decay(result: CompositionResult, L: float) -> float:
    """sup |K_{e^N}(x, y)| (1 + dist^2)^(L/2) / R^-epsilon."""
    d = result.grid.dim
    if not result.error_exponent < -d:
        raise ValueError(f"error order {result.error_exponent:g} is not below -d; kernel bound not applicable")
    K = kernel_from_table(result.grid, result.error)
    return verify_kernel_decay(K, L).constant / result.R ** (-result.epsilon)


# --- Schur test ---------------------------------------------------------

def schur_bound(K: Kernel | np.ndarray, h1: Field | np.ndarray, h2: Field | np.ndarray,
                grid: Grid | None = None) -> float:
    """(C1 C2)^(1/2) with C1 = sup_x sum_z |K| h1 dz / h2(x), C2 = sup_z sum_x |K| h2 dx / h1(z)."""
    if isinstance(K, Kernel):
        grid, mat = K.grid, K.matrix
    else:
        mat = np.asarray(K)
    vol = grid.cell_volume if grid is not None else 1.0
    a = np.ravel(h1.values if isinstance(h1, Field) else h1).real
    b = np.ravel(h2.values if isinstance(h2, Field) else h2).real
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("auxiliary functions must be strictly positive")
    absK = np.abs(mat)
    c1 = np.max((absK @ a) * vol / b)
    c2 = np.max((absK.T @ b) * vol / a)
    return float(np.sqrt(c1 * c2))


# --- Cotlar blocks -------------------------------------------------------

@dataclass
class BlockNormTable:
    grid: Grid
    blocks: list
    star_left: np.ndarray = field(repr=False)   # ||S_i^* S_j||
    star_right: np.ndarray = field(repr=False)  # ||S_i S_j^*||
    opnorm: float
    cotlar_bound: float
    telescoping_error: float
    disjoint_max: float
    decay_exponent: float
    decay_exponent_left: float
    decay_exponent_right: float
    symmetry_error: float
    dense_check_error: float
    schur_constant: float
    N0: int
    N2: int
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        keys = ["opnorm", "cotlar_bound", "telescoping_error", "disjoint_max", "decay_exponent",
                "decay_exponent_left", "decay_exponent_right", "symmetry_error", "dense_check_error",
                "schur_constant", "N0", "N2"]
        out = {k: getattr(self, k) for k in keys}
        out.update(grid=self.grid.to_dict(), n_blocks=len(self.blocks), blocks=[list(b) for b in self.blocks],
                   provenance=self.provenance)
        return out


def _cell_delta(a: int, b: int, L: int) -> int:
    d = (a - b) % L
    return d - L if d > L // 2 else d


def _thin_r(mat: np.ndarray, rmax: int) -> np.ndarray:
    """R factor of a thin QR, zero-padded to (rmax, rmax)."""
    r = np.linalg.qr(mat, mode="r") if mat.shape[1] else np.zeros((0, 0))
    out = np.zeros((rmax, rmax), dtype=complex)
    out[: r.shape[0], : r.shape[1]] = r
    return out


def schur_condition_constant(Aw: np.ndarray, grid: Grid, N2: float) -> float:
    """Best C in the Schur condition for the inverse-weight density, over all x-cell pairs.

    LHS(x) = int int (Aw)^-1(y) (1+|y-z|^2)^-N2 chi(z - j) (1+|x-y|^2)^-N2 dz dy for x in cell i,
    compared with (Aw)^-1(x) / (1 + |i - j|^2)^(N2/2).
    """
    L = int(round(grid.length))
    pk = psi_kernel(grid, 2 * N2)
    inv = 1.0 / Aw
    x = grid.axis()
    best = 0.0
    for j in range(L):
        chi_j = (np.abs(grid.torus_delta(x, float(j))) <= 1.0 + 1e-12).astype(float)
        g = torus_convolve(pk, chi_j, grid)
        lhs = torus_convolve(pk, inv * g, grid)
        for i in range(L):
            chi_i = np.abs(grid.torus_delta(x, float(i))) <= 1.0 + 1e-12
            dist = abs(_cell_delta(i, j, L))
            ratio = lhs[chi_i] * (1.0 + dist**2) ** (N2 / 2.0) / inv[chi_i]
            best = max(best, float(ratio.max()))
    return best


def build_S_blocks(sym: Symbol, w, N0: int | None = None, N2: int | None = None, seed: int = 0,
                   dense_pairs: int = 6) -> BlockNormTable:
    """Block norms of the localized pieces of the conjugated operator S.

    Block norms come from the thin factors (exact up to rounding) and a few
    pairs are re-checked against dense products. Decay exponents are
    log-log slopes of the largest norm at each block distance against
    ``1 + |i - j|`` with ``|i - j|`` the Euclidean length of the
    (x-cell, xi-cell) index difference, x cells wrapped on the torus.
    """
    grid = w.grid
    if grid.dim != 1:
        raise GridError("block tables are implemented for d = 1")
    if grid.size > 1024:
        raise MemoryError("block tables are limited to 1024 grid points")
    L = grid.length
    if abs(L - round(L)) > 1e-12 or round(L) < 2:
        raise GridError("block tables need an integer torus length >= 2")
    L = int(round(L))
    d = grid.dim
    N0 = d + 1 if N0 is None else N0
    N2 = N0 + d + 1 if N2 is None else N2
    n = grid.n
    Aw = smooth_majorant(w, N0).values.real
    sq, isq = np.sqrt(Aw), 1.0 / np.sqrt(Aw)

    x = grid.axis()
    xi = grid.frequencies()[:, 0]
    table = symbol_table(sym, grid)
    E = np.exp(1j * np.outer(x, xi))
    active = np.max(np.abs(table), axis=0) > 0
    xcells = [partition_bump(grid.torus_delta(x, float(i))) for i in range(L)]
    lo = int(math.floor(xi[active].min())) - 1 if active.any() else 0
    hi = int(math.ceil(xi[active].max())) + 1 if active.any() else 0

    blocks, Xs, Ys = [], [], []
    for i in range(L):
        for ip in range(lo, hi + 1):
            wts = partition_bump(xi - ip) * active
            ks = np.nonzero(wts > 0)[0]
            if ks.size == 0:
                continue
            U = E[:, ks] * table[:, ks] * xcells[i][:, None] * wts[ks][None, :]
            if not np.any(U):
                continue
            blocks.append((i, ip))
            Xs.append(sq[:, None] * U)
            Ys.append(isq[:, None] * E[:, ks] / n)
    P = len(blocks)
    if P > MAX_BLOCKS:
        raise MemoryError(f"{P} blocks exceed the {MAX_BLOCKS} guard; give the symbol a frequency cutoff")
    rmax = max(X.shape[1] for X in Xs)

    # S_i = X_i Y_i^*;  ||S_i^* S_j|| = ||R_Yi (X_i^* X_j) R_Yj^*||,  ||S_i S_j^*|| = ||R_Xi (Y_i^* Y_j) R_Xj^*||
    def padded(mats):
        out = np.zeros((P, n, rmax), dtype=complex)
        for a, M in enumerate(mats):
            out[a, :, : M.shape[1]] = M
        return out

    Xp, Yp = padded(Xs), padded(Ys)
    RX = np.stack([_thin_r(X, rmax) for X in Xs])
    RY = np.stack([_thin_r(Y, rmax) for Y in Ys])
    GX = np.einsum("anr,bns->abrs", Xp.conj(), Xp, optimize=True)
    GY = np.einsum("anr,bns->abrs", Yp.conj(), Yp, optimize=True)
    left = np.einsum("arq,abqs,bts->abrt", RY, GX, RY.conj(), optimize=True)
    right = np.einsum("arq,abqs,bts->abrt", RX, GY, RX.conj(), optimize=True)
    star_left = np.linalg.norm(left, ord=2, axis=(2, 3))
    star_right = np.linalg.norm(right, ord=2, axis=(2, 3))

    # full operator and checks
    T = (E * table) @ (E.conj().T / n)
    S = sq[:, None] * T * isq[None, :]
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    pieces = sum(X @ (Y.conj().T @ f) for X, Y in zip(Xs, Ys))
    tele = float(np.linalg.norm(pieces - S @ f) / np.linalg.norm(S @ f))
    opn = opnorm_2(S)

    cell_dx = np.array([[abs(_cell_delta(a[0], b[0], L)) for b in blocks] for a in blocks])
    dxi = np.array([[a[1] - b[1] for b in blocks] for a in blocks])
    dist = np.sqrt(cell_dx**2 + dxi**2)
    disjoint = cell_dx >= 2
    disjoint_max = float(star_left[disjoint].max()) if disjoint.any() else 0.0
    symmetry = float(np.max(np.abs(star_left - star_left.T)) / max(star_left.max(), 1e-300))

    # Cotlar sum over difference vectors
    diffs: dict = {}
    both = np.maximum(star_left, star_right)
    sdx = np.array([[_cell_delta(a[0], b[0], L) for b in blocks] for a in blocks])
    for key, val in zip(zip(sdx.ravel(), dxi.ravel()), both.ravel()):
        diffs[key] = max(diffs.get(key, 0.0), val)
    cotlar = float(sum(math.sqrt(v) for v in diffs.values()))

    def fit(tab):
        pts = {}
        for dd, v in zip(dist.ravel(), tab.ravel()):
            if dd >= 1:
                key = round(float(dd), 9)
                pts[key] = max(pts.get(key, 0.0), v)
        ks = sorted(pts)
        vals = np.array([pts[k] for k in ks])
        good = vals > 1e-14 * max(tab.max(), 1e-300)
        if good.sum() < 2:
            return float("-inf")
        return loglog_slope(1.0 + np.array(ks)[good], vals[good])

    exp_left, exp_right = fit(star_left), fit(star_right)
    exp_all = fit(both)

    # dense oracle on a few pairs
    dense_err = 0.0
    picks = rng.choice(P, size=(min(dense_pairs, P), 2), replace=True)
    for a, b in picks:
        Sa = Xs[a] @ Ys[a].conj().T
        Sb = Xs[b] @ Ys[b].conj().T
        for val, M in ((star_left[a, b], Sa.conj().T @ Sb), (star_right[a, b], Sa @ Sb.conj().T)):
            ref = float(np.linalg.norm(M, 2))
            dense_err = max(dense_err, float(abs(val - ref)) / max(ref, 1e-300) if ref > 1e-12 else abs(val - ref))

    schur = schur_condition_constant(Aw, grid, N2)
    prov = {"symbol": sym.label, "symbol_spec": sym.spec, "grid": grid.to_dict(), "N0": N0, "N2": N2,
            "floor": getattr(w, "floor", None), "xi_cells": [lo, hi], "x_cells": L}
    return BlockNormTable(grid, blocks, star_left, star_right, opn, cotlar, tele, disjoint_max, exp_all,
                          exp_left, exp_right, symmetry, dense_err, schur, N0, N2, prov)
