"""Pseudodifferential operators on the torus: application, adjoints, kernels.

The reference semantics is direct quadrature,

    T_a f(x_j) = sum_k exp(i x_j . xi_k) a(x_j, xi_k) fhat(k),

and the kernel is normalised so that ``T_a f(x) = spacing**d * sum_y K(x, y) f(y)``,
i.e. ``K(x, y) = length**-d * sum_k exp(i (x - y) . xi_k) a(x, xi_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Field, Grid, GridError, Spectrum, inverse, transform
from .symbols import Symbol

MAX_KERNEL_POINTS = 2**14
MAX_DENSE_POINTS = 4096
_CHUNK_ENTRIES = 2**22


def _row_chunks(n_rows: int, n_cols: int):
    step = max(1, _CHUNK_ENTRIES // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


def symbol_table(sym: Symbol, grid: Grid, rows: slice | None = None) -> np.ndarray:
    """a(x_j, xi_k) for flattened grid points j (C order) and frequencies k (FFT order)."""
    x = grid.points()
    if rows is not None:
        x = x[rows]
    xi = grid.frequencies()
    return np.asarray(sym.evaluator(x[:, None, :], xi[None, :, :]), dtype=complex)


def _phases(grid: Grid, rows: slice | None = None) -> np.ndarray:
    x = grid.points()
    if rows is not None:
        x = x[rows]
    return np.exp(1j * (x @ grid.frequencies().T))


def _check_grid(sym: Symbol, grid: Grid):
    if sym.dim != grid.dim:
        raise GridError(f"symbol is {sym.dim}-d, grid is {grid.dim}-d")
    if not np.isclose(sym.length, grid.length):
        raise GridError(f"symbol built for torus length {sym.length}, grid has {grid.length}")


class PseudoDifferentialOperator:
    """Operator handle that caches the symbol table for repeated application."""

    def __init__(self, sym: Symbol, grid: Grid):
        _check_grid(sym, grid)
        self.symbol = sym
        self.grid = grid
        self._table = None

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            self._table = symbol_table(self.symbol, self.grid) * _phases(self.grid)
        return self._table

    def apply(self, f: Field, method: str = "auto") -> Field:
        if f.grid != self.grid:
            raise GridError("field grid does not match operator grid")
        if method == "fast" or (method == "auto" and self.symbol.separable):
            return _apply_fast(self.symbol, f)
        fhat = transform(f).coefficients.ravel()
        if self.grid.size**2 <= _CHUNK_ENTRIES:
            out = self.table @ fhat
        else:
            out = np.empty(self.grid.size, dtype=complex)
            for rows in _row_chunks(self.grid.size, self.grid.size):
                out[rows] = (symbol_table(self.symbol, self.grid, rows) * _phases(self.grid, rows)) @ fhat
        return Field(self.grid, out)

    def adjoint(self, g: Field, method: str = "auto") -> Field:
        if g.grid != self.grid:
            raise GridError("field grid does not match operator grid")
        if method == "fast" or (method == "auto" and self.symbol.separable):
            return _adjoint_fast(self.symbol, g)
        gv = g.values.ravel()
        if self.grid.size**2 <= _CHUNK_ENTRIES:
            coef = np.conj(self.table).T @ gv
        else:
            coef = np.zeros(self.grid.size, dtype=complex)
            for rows in _row_chunks(self.grid.size, self.grid.size):
                block = symbol_table(self.symbol, self.grid, rows) * _phases(self.grid, rows)
                coef += np.conj(block).T @ gv[rows]
        coef /= self.grid.size
        return inverse(Spectrum(self.grid, coef))

    __call__ = apply


def _apply_fast(sym: Symbol, f: Field) -> Field:
    if not sym.separable:
        raise ValueError(f"symbol {sym.label} has no separable fast path")
    g = f.grid
    mult = sym.multiplier(g.frequencies()).reshape(g.shape)
    out = inverse(Spectrum(g, transform(f).coefficients * mult)).values
    if sym.profile is not None:
        out = out * sym.profile(g.points()).reshape(g.shape)
    return Field(g, out)


def _adjoint_fast(sym: Symbol, h: Field) -> Field:
    g = h.grid
    vals = h.values
    if sym.profile is not None:
        vals = np.conj(sym.profile(g.points()).reshape(g.shape)) * vals
    mult = np.conj(sym.multiplier(g.frequencies()).reshape(g.shape))
    return inverse(Spectrum(g, transform(Field(g, vals)).coefficients * mult))


def apply_pdo(sym: Symbol, f: Field, method: str = "auto") -> Field:
    """T_a f; ``method`` is ``auto``, ``direct`` or ``fast``."""
    return PseudoDifferentialOperator(sym, f.grid).apply(f, method)


def apply_pdo_adjoint(sym: Symbol, g: Field, method: str = "auto") -> Field:
    return PseudoDifferentialOperator(sym, g.grid).adjoint(g, method)


def inner(f: Field, g: Field) -> complex:
    """Grid inner product <f, g> = spacing^d sum f conj(g)."""
    return complex(f.grid.cell_volume * np.vdot(g.values.ravel(), f.values.ravel()))


# --- kernels ---------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    grid: Grid
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.grid.size, self.grid.size):
            raise GridError("kernel matrix must be (points, points)")

    def apply(self, f: Field) -> Field:
        return Field(self.grid, self.grid.cell_volume * (self.matrix @ f.values.ravel()))

    def as_operator_matrix(self) -> np.ndarray:
        return self.grid.cell_volume * self.matrix


def kernel_from_table(grid: Grid, table: np.ndarray) -> Kernel:
    """Kernel of the symbol tabulated as a(x_j, xi_k) (flattened, FFT order in k)."""
    n, d = grid.n, grid.dim
    phased = table * _phases(grid)
    if d == 1:
        mat = np.fft.fft(phased, axis=1)
    else:
        mat = np.fft.fft2(phased.reshape(grid.size, n, n), axes=(1, 2)).reshape(grid.size, grid.size)
    return Kernel(grid, mat / grid.length**d)


def pdo_kernel(sym: Symbol, grid: Grid) -> Kernel:
    _check_grid(sym, grid)
    if grid.size > MAX_KERNEL_POINTS:
        raise MemoryError(f"kernel for {grid.size} points exceeds the {MAX_KERNEL_POINTS} guard")
    return kernel_from_table(grid, symbol_table(sym, grid))


@dataclass
class KernelDecayReport:
    L: float
    constant: float
    sup_location: tuple[int, int]
    sup_distance: float
    delta_like: bool
    max_probed_distance: float
    note: str = "torus distance; decay probed only up to length/2"

    def to_dict(self) -> dict:
        return {"L": self.L, "C_L": self.constant, "sup_location": list(self.sup_location),
                "sup_distance": self.sup_distance, "delta_like": self.delta_like,
                "max_probed_distance": self.max_probed_distance, "note": self.note}


def pairwise_torus_dist(grid: Grid) -> np.ndarray:
    pts = grid.points()
    delta = grid.torus_delta(pts[:, None, :], pts[None, :, :])
    return np.sqrt(np.sum(delta**2, axis=-1))


def verify_kernel_decay(K: Kernel, L: float) -> KernelDecayReport:
    """C_L = sup |K(x, y)| (1 + dist(x, y)^2)^(L/2)."""
    if L < 0:
        raise ValueError("L must be non-negative")
    g = K.grid
    dist = pairwise_torus_dist(g)
    weighted = np.abs(K.matrix) * (1.0 + dist**2) ** (L / 2.0)
    idx = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    diag = np.abs(np.diag(K.matrix))
    off = np.abs(K.matrix).copy()
    np.fill_diagonal(off, 0.0)
    delta_like = bool(np.max(off) <= 1e-8 * np.max(diag)) if np.max(diag) > 0 else False
    return KernelDecayReport(L, float(weighted[idx]), (int(idx[0]), int(idx[1])), float(dist[idx]),
                             delta_like, 0.5 * g.length * np.sqrt(g.dim))


@dataclass
class RefinementReport:
    sizes: list[int]
    values: list[float]
    spread: float
    slope: float
    stable: bool

    def to_dict(self) -> dict:
        return {"sizes": self.sizes, "values": self.values, "spread": self.spread,
                "slope": self.slope, "stable": self.stable}


def refinement_stability(sizes, values, factor: float = 2.0, max_slope: float = 0.25) -> RefinementReport:
    """Stable when values stay within ``factor`` and show no systematic growth in n."""
    v = np.asarray(values, dtype=float)
    spread = float(np.max(v) / np.min(v)) if np.min(v) > 0 else np.inf
    slope = float(np.polyfit(np.log2(sizes), np.log2(v), 1)[0]) if len(v) > 1 and np.all(v > 0) else 0.0
    stable = bool(np.isfinite(spread) and spread <= factor and slope <= max_slope)
    return RefinementReport(list(map(int, sizes)), [float(x) for x in v], spread, slope, stable)


def kernel_decay_refinement(sym_factory: Callable[[Grid], Symbol] | Symbol, sizes, L: float,
                            length: float = 1.0, dim: int = 1) -> RefinementReport:
    consts = []
    for n in sizes:
        g = Grid(dim, n, length)
        sym = sym_factory(g) if callable(sym_factory) and not isinstance(sym_factory, Symbol) else sym_factory
        consts.append(verify_kernel_decay(pdo_kernel(sym, g), L).constant)
    return refinement_stability(sizes, consts)


# --- Bessel potentials and dense operators ----------------------------------

def bessel_potential(m: float, f: Field) -> Field:
    g = f.grid
    mult = (1.0 + g.xi_norm() ** 2) ** (m / 2.0)
    return inverse(Spectrum(g, transform(f).coefficients * mult))


def operator_matrix(op: Callable[[Field], Field], grid: Grid) -> np.ndarray:
    """Dense matrix of a linear map by applying it to the basis fields."""
    if grid.size > MAX_DENSE_POINTS:
        raise MemoryError(f"dense assembly limited to {MAX_DENSE_POINTS} points")
    cols = []
    for j in range(grid.size):
        e = np.zeros(grid.size, dtype=complex)
        e[j] = 1.0
        cols.append(op(Field(grid, e)).values.ravel())
    return np.stack(cols, axis=1)


def opnorm_2(matrix: np.ndarray, tol: float = 1e-8, max_iter: int = 20000, seed: int = 0,
             method: str = "auto") -> float:
    """Largest singular value.

    ``auto`` uses a dense LAPACK SVD up to ``MAX_DENSE_POINTS`` columns and
    ARPACK beyond; ``power`` runs power iteration on A*A.
    """
    A = np.asarray(matrix)
    if not np.any(A):
        return 0.0
    if method == "auto":
        if min(A.shape) <= MAX_DENSE_POINTS:
            return float(np.linalg.norm(A, 2))
        from scipy.sparse.linalg import svds
        v0 = np.random.default_rng(seed).standard_normal(min(A.shape))
        return float(svds(A, k=1, tol=tol, v0=v0, return_singular_vectors=False)[0])
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    AH = A.conj().T
    lam = 0.0
    for _ in range(max_iter):
        u = AH @ (A @ v)
        new = float(np.real(np.vdot(v, u)))
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            return 0.0
        v = u / nrm
        if abs(new - lam) <= tol * abs(new) * 1e-2:
            lam = new
            break
        lam = new
    # final Rayleigh quotient on the converged vector
    Av = A @ v
    return float(np.sqrt(max(np.real(np.vdot(Av, Av)), lam)))
