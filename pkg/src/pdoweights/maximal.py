"""Maximal and majorant operators on the discretized torus, plus weight diagnostics.

Balls are closed torus balls ``{y : dist(y, c) <= r}`` with grid-point centres.
Averages are discrete means over the grid points of a ball, so constants are
reproduced exactly. Where a formula needs the continuum volume ``|B| = c_d r^d``
(``c_1 = 2``, ``c_2 = pi``) it is used explicitly and integrals are taken as
``mean * |B|``.

Radii run over every multiple of the grid spacing (``radii="full"``) or over
powers of two (``radii="dyadic"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.integrate import quad
from scipy.special import gamma

from .grid import Field, Grid, GridError

BALL_CONST = {1: 2.0, 2: math.pi}
_EPS = 1e-9


@dataclass(frozen=True)
class Weight:
    """Strictly positive real weight: ``values = raw + floor``."""

    field: Field
    floor: float

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def scaled(self, c: float) -> "Weight":
        return Weight(Field(self.grid, c * self.values.real), c * self.floor)

    def to_dict(self) -> dict:
        v = self.values.real
        return {"floor": self.floor, "min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}


def make_weight(grid: Grid, values, floor: float | None = None) -> Weight:
    """Wrap non-negative samples as a weight; default floor is 1e-8 times the mean."""
    v = np.asarray(values.values if isinstance(values, Field) else values)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 0):
            raise GridError("weight must be real-valued")
        v = v.real
    v = np.broadcast_to(np.asarray(v, dtype=float), grid.shape)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise GridError("weight samples must be finite and non-negative")
    if floor is None:
        floor = 1e-8 * float(np.mean(v)) if np.mean(v) > 0 else 1e-8
    if floor <= 0:
        raise GridError("floor must be positive")
    return Weight(Field(grid, v + floor), float(floor))


def as_weight(w) -> Weight:
    return w if isinstance(w, Weight) else make_weight(w.grid, w.values)


def _real(w) -> np.ndarray:
    if isinstance(w, (Weight, Field)):
        return np.asarray(w.values.real, dtype=float)
    return np.asarray(w, dtype=float)


# --- geometry ---------------------------------------------------------------

def covering_radius(grid: Grid) -> float:
    """Smallest radius whose closed torus ball is the whole torus."""
    return float(np.max(grid.offset_dist()))


def radius_grid(grid: Grid, r_min: float, r_max: float, radii: str = "full") -> np.ndarray:
    h = grid.spacing
    if radii == "full":
        j = np.arange(max(1, math.ceil(r_min / h - _EPS)), math.floor(r_max / h + _EPS) + 1)
        return j * h
    if radii == "dyadic":
        out = []
        r = r_max
        while r >= r_min * (1 - _EPS):
            out.append(r)
            r /= 2.0
        return np.array(sorted(out))
    raise ValueError(f"unknown radius grid {radii!r}")


@dataclass(frozen=True)
class ApproachRegionSpec:
    """Radii r in (0, 1] (closed at 1) and approach radius r**rho."""

    rho: float
    r_grid: tuple

    @classmethod
    def build(cls, grid: Grid, rho: float, radii: str = "full", r_max: float = 1.0) -> "ApproachRegionSpec":
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        r = radius_grid(grid, grid.spacing, r_max, radii)
        return cls(rho, tuple(float(x) for x in r[::-1]))


def ball_volume(dim: int, r) -> np.ndarray:
    return BALL_CONST[dim] * np.asarray(r, dtype=float) ** dim


def _ball_mask(grid: Grid, r: float) -> np.ndarray:
    return grid.offset_dist() <= r + _EPS * grid.spacing


def ball_means(values: np.ndarray, grid: Grid, radii) -> np.ndarray:
    """Stack of centred ball means, one grid-shaped slice per radius."""
    values = np.asarray(values, dtype=float)
    dist = grid.offset_dist()
    cover = covering_radius(grid)
    fw = np.fft.fftn(values)
    axes = tuple(range(1, grid.dim + 1))
    out = np.empty((len(radii),) + grid.shape)
    inner = [i for i, r in enumerate(radii) if r < cover]
    if inner:
        masks = np.stack([(dist <= radii[i] + _EPS * grid.spacing).astype(float) for i in inner])
        counts = masks.reshape(len(inner), -1).sum(axis=1)
        conv = np.fft.ifftn(np.fft.fftn(masks, axes=axes) * fw, axes=axes).real
        conv /= counts.reshape((-1,) + (1,) * grid.dim)
        out[inner] = conv
    for i, r in enumerate(radii):
        if r >= cover:
            out[i] = values.mean()
    return out


def max_over_ball(values: np.ndarray, grid: Grid, r: float) -> np.ndarray:
    """sup_{dist(y, x) <= r} values(y) on the torus."""
    k = math.floor(r / grid.spacing + _EPS)
    if k <= 0:
        return np.array(values, dtype=float)
    if r >= covering_radius(grid) - _EPS * grid.spacing:
        return np.full(grid.shape, np.max(values))
    if grid.dim == 1:
        return ndimage.maximum_filter1d(values, size=2 * k + 1, mode="grid-wrap")
    # disc = union of horizontal segments; 1-d filter per half-width, then shift rows
    rk = r / grid.spacing + _EPS
    out = None
    rows = {}
    for dy in range(-k, k + 1):
        half = math.floor(math.sqrt(max(rk * rk - dy * dy, 0.0)))
        if half not in rows:
            rows[half] = ndimage.maximum_filter1d(values, size=2 * half + 1, axis=1, mode="grid-wrap")
        shifted = np.roll(rows[half], dy, axis=0)
        out = shifted if out is None else np.maximum(out, shifted)
    return out


def local_sup(w, radius: float = 1.0) -> Field:
    """w~(x) = sup_{|y - x| <= radius} w(y)."""
    g = w.grid
    return Field(g, max_over_ball(_real(w), g, radius))


# --- Hardy-Littlewood --------------------------------------------------------

def hl_maximal(w, centered: bool = False, r_max: float | None = None, radii: str = "full") -> Field:
    """Hardy-Littlewood maximal function over closed torus balls.

    The uncentred version takes the sup over all grid-centred balls that
    contain x, including the degenerate single-point ball, so ``Mw >= w``.
    ``r_max`` defaults to the covering radius (``length/2`` when d = 1).
    """
    g = w.grid
    vals = _real(w)
    r_max = covering_radius(g) if r_max is None else r_max
    rs = radius_grid(g, g.spacing, r_max, radii)
    means = ball_means(vals, g, rs)
    out = vals.copy()
    for r, mean in zip(rs, means):
        np.maximum(out, mean if centered else max_over_ball(mean, g, r), out=out)
    return Field(g, out)


def iterated_maximal(w, k: int, **kw) -> Field:
    if not 1 <= k <= 8:
        raise ValueError("k must lie in 1..8")
    out = w
    for _ in range(k):
        out = hl_maximal(out, **kw)
    return out


def power_maximal(w, s: float, **kw) -> Field:
    """(M w^s)^(1/s)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    g = w.grid
    if s == 1:
        return hl_maximal(w, **kw)
    return Field(g, hl_maximal(Field(g, _real(w) ** s), **kw).values.real ** (1.0 / s))


# --- fractional non-tangential maximal function ------------------------------

def nontangential_fractional(w, rho: float, m: float, radii: str = "full", r_max: float = 1.0) -> Field:
    """sup over r <= r_max and dist(y, x) <= r**rho of |B(y, r)|^(-2m/d) * mean_{B(y, r)} w."""
    g = w.grid
    spec = ApproachRegionSpec.build(g, rho, radii, r_max)
    rs = np.array(spec.r_grid)
    means = ball_means(_real(w), g, rs)
    out = np.zeros(g.shape)
    for r, mean in zip(rs, means):
        val = ball_volume(g.dim, r) ** (-2.0 * m / g.dim) * mean
        np.maximum(out, max_over_ball(val, g, r**rho), out=out)
    return Field(g, out)


@dataclass
class DominationReport:
    rho: float
    m: float
    s: float
    constant: float
    geometric_constant: float
    tol: float
    passed: bool
    literal_constant_one: bool
    worst_index: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def domination_constant(grid: Grid, rho: float, m: float, s: float, radii: str = "full", r_max: float = 1.0) -> float:
    """Constant from Hoelder plus enlarging B(y, r) to the ball B(x, r + r**rho).

    ``sup_r |B(r)|^(-2m/d) * (#B(x, r + r^rho) / #B(y, r))^(1/s)`` with discrete counts.
    """
    rs = radius_grid(grid, grid.spacing, r_max, radii)
    dist = grid.offset_dist()
    best = 0.0
    for r in rs:
        n_small = np.count_nonzero(dist <= r + _EPS * grid.spacing)
        n_big = np.count_nonzero(dist <= r + r**rho + _EPS * grid.spacing)
        best = max(best, float(ball_volume(grid.dim, r) ** (-2.0 * m / grid.dim) * (n_big / n_small) ** (1.0 / s)))
    return best


def check_domination(w, rho: float, m: float, tol: float = 0.05, radii: str = "full") -> DominationReport:
    """Pointwise check of  M_{rho,m} w <= C (M w^s)^(1/s)  with 2 s m = (rho - 1) d."""
    g = w.grid
    if m >= 0:
        raise ValueError("domination needs m < 0")
    s = (rho - 1.0) * g.dim / (2.0 * m)
    if s < 1 - 1e-12:
        raise ValueError(f"s = {s:g} < 1")
    lhs = nontangential_fractional(w, rho, m, radii).values.real
    rhs = power_maximal(w, s, radii=radii).values.real
    ratio = lhs / rhs
    c_geo = domination_constant(g, rho, m, s, radii)
    c_emp = float(ratio.max())
    return DominationReport(rho, m, s, c_emp, c_geo, tol, bool(c_emp <= (1 + tol) * c_geo),
                            bool(c_emp <= 1 + tol), int(np.argmax(ratio)))


# --- ball averages --------------------------------------------------------

def ball_average(w, r: float) -> Field:
    g = w.grid
    if not g.spacing - _EPS <= r <= max(g.length / 2, covering_radius(g)) + _EPS:
        raise ValueError(f"radius {r} outside [spacing, length/2]")
    return Field(g, ball_means(_real(w), g, [r])[0])


def sup_ball_average(w) -> Field:
    """A_1* w = sup over r in {1, 2, 4, ...} capped at length/2.

    On a torus of length <= 2 the only admissible radius covers the torus and
    the result is the global mean.
    """
    g = w.grid
    cap = g.length / 2.0
    if cap < 1.0:
        rs = [covering_radius(g)]
    else:
        rs = [2.0**j for j in range(int(math.floor(math.log2(cap) + _EPS)) + 1)]
    return Field(g, np.max(ball_means(_real(w), g, rs), axis=0))


def a1star_degenerate(grid: Grid) -> bool:
    return grid.length / 2.0 <= 1.0


# --- smooth majorants ----------------------------------------------------

def psi_integral(N: float, dim: int) -> float:
    """Integral over R^d of (1 + |x|^2)^(-N/2)."""
    if N <= dim:
        return math.inf
    if dim == 1:
        return math.sqrt(math.pi) * gamma((N - 1) / 2) / gamma(N / 2)
    return 2.0 * math.pi / (N - 2)


def _psi(t2, N):
    return (1.0 + t2) ** (-N / 2.0)


@lru_cache(maxsize=64)
def _psi_periodized(dim: int, n: int, length: float, N: float, scale: float) -> np.ndarray:
    """sum_k Psi(scale * (x + k length)) on the grid, with a far-field tail correction."""
    grid = Grid(dim, n, length)
    delta = [grid.torus_delta(mm, 0.0) for mm in grid.mesh()]
    L = scale * length
    if dim == 1:
        K = 4096
        x = scale * delta[0]
        ks = np.arange(-K, K + 1) * L
        total = np.zeros(grid.shape)
        for chunk in np.array_split(ks, 16):
            total += _psi((x[:, None] + chunk[None, :]) ** 2, N).sum(axis=1)
        edge = (K + 0.5) * L
        # t = tan(theta) maps the tail integral onto a finite interval
        tail = 2.0 * quad(lambda th: np.cos(th) ** (N - 2.0), math.atan(edge), math.pi / 2)[0] / L
        return total + tail
    K = 24
    total = np.zeros(grid.shape)
    X, Y = (scale * d for d in delta)
    for kx in range(-K, K + 1):
        for ky in range(-K, K + 1):
            total += _psi((X + kx * L) ** 2 + (Y + ky * L) ** 2, N)
    edge = (K + 0.5) * L * 2.0 / math.sqrt(math.pi)
    tail = 2.0 * math.pi * (1.0 + edge**2) ** (1.0 - N / 2.0) / (N - 2.0) / L**2
    return total + tail


def psi_kernel(grid: Grid, N: float, scale: float = 1.0) -> np.ndarray:
    """Periodized Psi^(N)(scale * x) sampled at the grid offsets (read-only)."""
    if N <= grid.dim:
        raise ValueError(f"N = {N} must exceed dim = {grid.dim}")
    return _psi_periodized(grid.dim, grid.n, grid.length, float(N), float(scale))


def torus_convolve(kernel: np.ndarray, values: np.ndarray, grid: Grid) -> np.ndarray:
    """Circular convolution times spacing^d."""
    return np.fft.ifftn(np.fft.fftn(kernel) * np.fft.fftn(values)).real * grid.cell_volume


def smooth_majorant(w, N0: int, radius: float = 1.0) -> Field:
    """Aw = Psi^(N0) * w~ with w~ the local sup over unit balls."""
    g = w.grid
    if N0 <= g.dim:
        raise ValueError(f"N0 = {N0} must exceed dim = {g.dim}")
    wt = max_over_ball(_real(w), g, radius)
    return Field(g, torus_convolve(psi_kernel(g, N0), wt, g))


def band_majorant(w, rho: float, m: float, R: float, N0: int) -> Field:
    """R^(2m) * int sup_{|y-z| <= R^-rho} w(z) * R^(rho d) Psi^(N0)(R^rho (x - y)) dy."""
    g = w.grid
    if R < 1:
        raise ValueError("R must be >= 1")
    if N0 <= g.dim:
        raise ValueError(f"N0 = {N0} must exceed dim = {g.dim}")
    scale = R**rho
    wt = max_over_ball(_real(w), g, 1.0 / scale)
    kern = scale**g.dim * psi_kernel(g, N0, scale)
    return Field(g, R ** (2 * m) * torus_convolve(kern, wt, g))


def rescale_weight(w, R: float, rho: float) -> Weight:
    """w_R(x) = R^(-rho d) w(R^-rho x), sampled on the torus scaled by R^rho (same n)."""
    g = w.grid
    scale = R**rho
    g2 = Grid(g.dim, g.n, g.length * scale)
    floor = w.floor * scale ** (-g.dim) if isinstance(w, Weight) else 0.0
    return Weight(Field(g2, _real(w) * scale ** (-g.dim)), floor)


# --- weight classes ----------------------------------------------------------

def _interval_averages(values: np.ndarray):
    """Means over every cyclic interval of 1..n points (1-d), as an (n, n) array."""
    n = values.size
    ext = np.concatenate([values, values])
    csum = np.concatenate([[0.0], np.cumsum(ext)])
    lengths = np.arange(1, n + 1)
    starts = np.arange(n)
    sums = csum[starts[:, None] + lengths[None, :]] - csum[starts[:, None]]
    return sums / lengths[None, :]


def _ball_family_averages(values: np.ndarray, grid: Grid):
    if grid.dim == 1:
        return _interval_averages(values)
    rs = radius_grid(grid, grid.spacing, covering_radius(grid))
    return ball_means(values, grid, rs)


def ap_characteristic(w, p: float) -> float:
    """sup_B (avg_B w)(avg_B w^(-1/(p-1)))^(p-1): all cyclic intervals (d=1) or grid balls (d=2)."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    g = w.grid
    v = _real(w)
    a = _ball_family_averages(v, g)
    b = _ball_family_averages(v ** (-1.0 / (p - 1.0)), g)
    return float(np.max(a * b ** (p - 1.0)))


def rh_constant(w, s: float) -> float:
    """sup_B (avg_B w^s)^(1/s) / avg_B w."""
    if s <= 1:
        raise ValueError("s must exceed 1")
    g = w.grid
    v = _real(w)
    a = _ball_family_averages(v**s, g) ** (1.0 / s)
    b = _ball_family_averages(v, g)
    return float(np.max(a / b))
