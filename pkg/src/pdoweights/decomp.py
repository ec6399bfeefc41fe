"""Littlewood-Paley projections, subdyadic frequency covers and spatial partitions of unity.

The profile is ``P(xi) = phi(|xi|) - phi(2|xi|)`` with ``phi`` equal to 1 on
``[0, 3/2]`` and 0 beyond 2. Hence ``supp P`` lies in ``[3/4, 2]``, ``P == 1``
on ``[1, 3/2]`` and the scales ``k_min..k_max`` telescope to exactly 1 on the
band ``[2^k_min, 1.5 * 2^k_max]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bumps import partition_bump, step_down
from .grid import Field, Grid, GridError, Spectrum, inverse, transform, weighted_l2
from .maximal import hl_maximal, iterated_maximal
from .reports import InequalityReport

PHI_FLAT = 1.5
PHI_EDGE = 2.0
SUPPORT = (0.75, 3.0)


def _phi(r):
    return step_down(r, PHI_FLAT, PHI_EDGE)


def lp_profile(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return _phi(r) - _phi(2.0 * r)


@dataclass(frozen=True)
class LPFamily:
    grid: Grid
    k_min: int
    k_max: int
    partition: bool = True

    @property
    def scales(self) -> range:
        return range(self.k_min, self.k_max + 1)

    @property
    def band(self) -> tuple[float, float]:
        """Frequencies where the profiles sum to exactly one."""
        return 2.0**self.k_min, PHI_FLAT * 2.0**self.k_max

    def multiplier(self, k: int) -> np.ndarray:
        return lp_profile(self.grid.xi_norm() / 2.0**k)

    def total(self) -> np.ndarray:
        return sum(self.multiplier(k) for k in self.scales)

    def audit(self) -> dict:
        """Support containment and the telescoping identity on the lattice."""
        r = self.grid.xi_norm()
        support_ok = True
        for k in self.scales:
            m = self.multiplier(k)
            outside = (r < SUPPORT[0] * 2.0**k) | (r > SUPPORT[1] * 2.0**k)
            support_ok &= bool(np.all(m[outside] == 0.0))
        lo, hi = self.band
        inside = (r >= lo) & (r <= hi)
        err = float(np.max(np.abs(self.total()[inside] - 1.0))) if np.any(inside) else 0.0
        return {"support_ok": support_ok, "partition_error": err, "band": [lo, hi],
                "lattice_points_in_band": int(inside.sum())}

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "k_min": self.k_min, "k_max": self.k_max, "band": list(self.band)}


def make_lp_family(grid: Grid, k_min: int, k_max: int, partition: bool = True) -> LPFamily:
    if k_min < 0:
        raise ValueError("negative scales are not used (low frequencies go through the cutoff split)")
    if k_max < k_min:
        raise ValueError("k_max < k_min")
    if SUPPORT[1] * 2.0**k_max > grid.nyquist:
        raise GridError(f"scale 2^{k_max} times 3 exceeds the Nyquist frequency {grid.nyquist:.4g}")
    fam = LPFamily(grid, k_min, k_max, partition)
    if partition:
        err = fam.audit()["partition_error"]
        if err > 1e-12:
            raise AssertionError(f"LP partition error {err:.3g}")
    return fam


def lp_project(fam: LPFamily, f: Field, k: int) -> Field:
    if f.grid != fam.grid:
        raise GridError("field grid does not match the family")
    return inverse(Spectrum(f.grid, transform(f).coefficients * fam.multiplier(k)))


def band_limited_to(fam: LPFamily, f: Field, tol: float = 1e-12) -> bool:
    lo, hi = fam.band
    r = fam.grid.xi_norm()
    c = np.abs(transform(f).coefficients)
    out = (r < lo) | (r > hi)
    return bool(np.all(c[out] <= tol * max(c.max(), 1e-300)))


def _square_function(fam: LPFamily, f: Field, w) -> float:
    return sum(weighted_l2(lp_project(fam, f, k), w) for k in fam.scales)


def _wvals(w):
    return np.asarray(w.values.real, dtype=float)


def verify_forward_lp(fam: LPFamily, f: Field, w, bound: float | None = None) -> InequalityReport:
    """sum_k int |Delta_k f|^2 w  against  int |f|^2 Mw."""
    lhs = _square_function(fam, f, _wvals(w))
    rhs = weighted_l2(f, hl_maximal(w).values.real)
    return InequalityReport("prop-lp-forward", lhs, rhs, params={"family": fam.to_dict(), "bound": bound})


def verify_reverse_lp(fam: LPFamily, f: Field, w, bound: float | None = None) -> InequalityReport:
    """int |f|^2 w  against  sum_k int |Delta_k f|^2 M^3 w."""
    lhs = weighted_l2(f, _wvals(w))
    rhs = _square_function(fam, f, iterated_maximal(w, 3).values.real)
    return InequalityReport("prop-lp-reverse", lhs, rhs, params={"family": fam.to_dict(), "bound": bound})


# --- subdyadic covers ------------------------------------------------------

@dataclass
class BallCover:
    centers: np.ndarray
    radius: float
    k: int
    alpha: float
    freq_spacing: float
    overlap_hist: dict = field(default_factory=dict)
    covered: bool = True

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def max_overlap(self) -> int:
        return max(self.overlap_hist) if self.overlap_hist else 0

    def to_dict(self) -> dict:
        return {"k": self.k, "alpha": self.alpha, "radius": self.radius, "count": self.count,
                "freq_spacing": self.freq_spacing, "covered": self.covered, "max_overlap": self.max_overlap,
                "overlap_histogram": {str(a): b for a, b in sorted(self.overlap_hist.items())},
                "centers": self.centers.tolist()}


def annulus_points(k: int, dim: int, freq_spacing: float) -> np.ndarray:
    """Lattice frequencies with 2^k <= |xi| <= 2^(k+1)."""
    top = int(math.floor(2.0 ** (k + 1) / freq_spacing + 1e-9))
    ax = np.arange(-top, top + 1) * freq_spacing
    pts = np.stack([m.ravel() for m in np.meshgrid(*([ax] * dim), indexing="ij")], axis=-1)
    r = np.sqrt(np.sum(pts**2, axis=-1))
    tol = 1e-9 * 2.0**k
    return pts[(r >= 2.0**k - tol) & (r <= 2.0 ** (k + 1) + tol)]


def subdyadic_cover(k: int, alpha: float, dim: int = 1, grid: Grid | None = None,
                    freq_spacing: float = 1.0) -> BallCover:
    """Cover the annulus 2^k <= |xi| <= 2^(k+1) by balls of radius 2^(k(1-alpha)).

    Centres sit on a lattice-snapped square grid of pitch close to the radius.
    Without a grid the lattice of pitch ``freq_spacing`` is used (1.0 is the
    lattice of a torus of length 2 pi).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    dxi = grid.freq_spacing if grid is not None else float(freq_spacing)
    dim = grid.dim if grid is not None else dim
    if grid is not None and 2.0 ** (k + 1) > grid.nyquist:
        raise GridError(f"annulus 2^{k + 1} exceeds the Nyquist frequency")
    radius = 2.0 ** (k * (1.0 - alpha))
    # 1-d intervals of radius r tile at any pitch <= 2r; discs need pitch <= r sqrt(2)
    pitch_units = max(1, int(round(radius / dxi)))
    if dim == 2:
        pitch_units = max(1, int(math.floor(radius * math.sqrt(2.0) / dxi + 1e-9)))
    pitch = pitch_units * dxi
    tol = 1e-9 * radius
    pts = annulus_points(k, dim, dxi)
    # centres within reach of a point sit in a small box of the pitch grid around it
    base = np.floor(pts / pitch + 1e-9).astype(np.int64)
    span = int(math.ceil(radius / pitch)) + 1
    pairs_p, pairs_c = [], []
    for off in itertools.product(range(-span, span + 1), repeat=dim):
        idx = base + np.array(off)
        hit = np.sqrt(np.sum((pts - idx * pitch) ** 2, axis=-1)) <= radius + tol
        pairs_p.append(np.nonzero(hit)[0])
        pairs_c.append(idx[hit])
    pp = np.concatenate(pairs_p)
    cells, cc = np.unique(np.concatenate(pairs_c).reshape(-1, dim), axis=0, return_inverse=True)
    cc = cc.ravel()
    counts = np.bincount(pp, minlength=len(pts))
    # reverse delete: drop a ball when every point it holds is covered elsewhere
    order = np.argsort(cc, kind="stable")
    bounds = np.searchsorted(cc[order], np.arange(len(cells) + 1))
    norms = np.sqrt(np.sum((cells * pitch) ** 2, axis=-1))
    keep = np.ones(len(cells), dtype=bool)
    for c in np.lexsort((cells[:, 0], -norms)):
        members = pp[order[bounds[c]:bounds[c + 1]]]
        if members.size and np.all(counts[members] >= 2):
            counts[members] -= 1
            keep[c] = False
    centers = cells[keep].astype(float) * pitch
    uniq, freq = np.unique(counts, return_counts=True)
    hist = {int(a): int(b) for a, b in zip(uniq, freq)}
    return BallCover(centers, radius, k, alpha, dxi, hist, bool(np.all(counts >= 1)))


# --- spatial partition of unity ---------------------------------------------

@dataclass
class UnitPartition:
    grid: Grid
    indices: list
    bumps: list

    def total(self) -> np.ndarray:
        return sum(b.values.real for b in self.bumps)


def unit_partition(grid: Grid) -> UnitPartition:
    """psi(x - i) for every integer point i of the torus; they sum to one."""
    L = grid.length
    if abs(L - round(L)) > 1e-12 or round(L) < 2:
        raise GridError("unit partition needs an integer torus length >= 2")
    L = int(round(L))
    mesh = grid.mesh()
    idx, bumps = [], []
    for i in itertools.product(range(L), repeat=grid.dim):
        vals = np.ones(grid.shape)
        for axis, ii in enumerate(i):
            vals = vals * partition_bump(grid.torus_delta(mesh[axis], float(ii)))
        idx.append(i)
        bumps.append(Field(grid, vals))
    return UnitPartition(grid, idx, bumps)
