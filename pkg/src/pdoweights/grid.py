"""Discretized torus, discrete Fourier pair and Riemann-sum quadrature.

Conventions
-----------
Grid points are ``x_j = j * spacing`` for ``j = 0..n-1`` on each axis. The
frequency lattice is ``k in [-n/2, n/2)`` (Nyquist on the negative side) with
physical frequency ``xi(k) = 2*pi*k / length``. Spectra are stored in FFT
order; ``Spectrum.k`` gives the integer lattice in that order.

The forward transform is normalised so that a constant field ``c`` has zero
mode ``c``::

    fhat(k) = n**-d * sum_j f(x_j) exp(-i x_j . xi(k))
    f(x_j)  = sum_k fhat(k) exp(i x_j . xi(k))

so that ``spacing**d * sum |f|**2 == length**d * sum |fhat|**2``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Invalid grid parameters or mismatched grids."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    dim: int
    points_per_axis: int
    length: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        n = self.points_per_axis
        if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < 8:
            raise GridError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not self.length > 0:
            raise GridError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "points_per_axis", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def n(self) -> int:
        return self.points_per_axis

    @property
    def spacing(self) -> float:
        return self.length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def nyquist(self) -> float:
        """Largest representable |xi| along an axis."""
        return np.pi * self.n / self.length

    @property
    def freq_spacing(self) -> float:
        return 2.0 * np.pi / self.length

    def axis(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def axis_k(self) -> np.ndarray:
        """Integer frequencies along one axis in FFT order."""
        return np.rint(np.fft.fftfreq(self.n, d=1.0 / self.n)).astype(int)

    def axis_xi(self) -> np.ndarray:
        return self.axis_k() * self.freq_spacing

    def mesh(self) -> tuple[np.ndarray, ...]:
        ax = self.axis()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """All grid points as an ``(size, dim)`` array in C order."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def frequencies(self) -> np.ndarray:
        """All physical frequencies as ``(size, dim)`` in flattened FFT order."""
        ax = self.axis_xi()
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def xi_norm(self) -> np.ndarray:
        """|xi| on the spectral array (FFT order, grid shape)."""
        ax = self.axis_xi()
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.sqrt(sum(m**2 for m in mesh))

    def torus_delta(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Componentwise periodic difference a - b folded into [-L/2, L/2)."""
        diff = np.asarray(a) - np.asarray(b)
        return (diff + 0.5 * self.length) % self.length - 0.5 * self.length

    def torus_dist(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        delta = self.torus_delta(a, b)
        if delta.ndim and delta.shape[-1] == self.dim and self.dim > 1:
            return np.sqrt(np.sum(delta**2, axis=-1))
        if delta.ndim and delta.shape[-1] == 1:
            return np.abs(delta[..., 0])
        return np.abs(delta)

    def offset_dist(self) -> np.ndarray:
        """Torus distance from the origin to every grid point (grid shape)."""
        delta = [self.torus_delta(m, 0.0) for m in self.mesh()]
        return np.sqrt(sum(d**2 for d in delta))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "points_per_axis": self.n, "length": self.length}


def make_grid(dim: int, points_per_axis: int, length: float = 1.0) -> Grid:
    return Grid(dim, points_per_axis, length)


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.size != self.grid.size:
            raise GridError(f"field has {values.size} samples, grid has {self.grid.size}")
        values = np.array(values.reshape(self.grid.shape))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.values * other.values)
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def roll(self, shift: int | tuple[int, ...]) -> "Field":
        axes = tuple(range(self.grid.dim))
        if isinstance(shift, int):
            shift = (shift,) * self.grid.dim
        return Field(self.grid, np.roll(self.values, shift, axis=axes))

    def ravel(self) -> np.ndarray:
        return self.values.ravel()


@dataclass(frozen=True)
class Spectrum:
    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.size != self.grid.size:
            raise GridError("spectrum size does not match grid")
        c = np.array(c.reshape(self.grid.shape))
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        ax = self.grid.axis_k()
        return tuple(np.meshgrid(*([ax] * self.grid.dim), indexing="ij"))

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        return tuple(kk * self.grid.freq_spacing for kk in self.k)

    def at(self, *k: int) -> complex:
        idx = tuple(int(kk) % self.grid.n for kk in k)
        return complex(self.coefficients[idx])


def transform(f: Field) -> Spectrum:
    g = f.grid
    return Spectrum(g, np.fft.fftn(f.values) / g.size)


def inverse(s: Spectrum) -> Field:
    g = s.grid
    return Field(g, np.fft.ifftn(s.coefficients) * g.size)


def integrate(f: Field) -> complex:
    return complex(f.grid.cell_volume * np.sum(f.values))


def weighted_l2(f: Field, w: Field | np.ndarray | float | None = None) -> float:
    """Riemann sum of ``|f|**2 * w``; ``w=None`` means the unweighted norm."""
    mag = np.abs(f.values) ** 2
    if w is None:
        return float(f.grid.cell_volume * np.sum(mag))
    wv = w.values if isinstance(w, Field) else np.asarray(w)
    if isinstance(w, Field):
        f._check(w)
    if np.iscomplexobj(wv):
        if np.any(np.abs(wv.imag) > 0):
            raise GridError("weight must be real-valued")
        wv = wv.real
    if np.any(wv < 0):
        raise GridError("weight has negative entries")
    return float(f.grid.cell_volume * np.sum(mag * wv))


# --- serialization -------------------------------------------------------

_HEADER = struct.Struct("<iid")
_MATRIX_EXT = struct.Struct("<qq")


def _interleave(values: np.ndarray) -> bytes:
    c = np.asarray(values, dtype=np.complex128)
    return np.ascontiguousarray(c).view(np.float64).astype("<f8").tobytes()


def _deinterleave(payload: bytes, count: int) -> np.ndarray:
    flat = np.frombuffer(payload, dtype="<f8", count=2 * count)
    return flat.view(np.complex128).copy()


def to_bytes(obj: Field | Spectrum) -> bytes:
    """Flat binary layout: (dim:int32, n:int32, length:float64) LE + complex payload."""
    g = obj.grid
    data = obj.values if isinstance(obj, Field) else obj.coefficients
    return _HEADER.pack(g.dim, g.n, g.length) + _interleave(data.ravel())


def from_bytes(blob: bytes, kind: str = "field") -> Field | Spectrum:
    dim, n, length = _HEADER.unpack_from(blob, 0)
    g = Grid(dim, n, length)
    data = _deinterleave(blob[_HEADER.size:], g.size).reshape(g.shape)
    return Field(g, data) if kind == "field" else Spectrum(g, data)


def matrix_to_bytes(grid: Grid, matrix: np.ndarray) -> bytes:
    rows, cols = matrix.shape
    return _HEADER.pack(grid.dim, grid.n, grid.length) + _MATRIX_EXT.pack(rows, cols) + _interleave(matrix.ravel())


def matrix_from_bytes(blob: bytes) -> tuple[Grid, np.ndarray]:
    dim, n, length = _HEADER.unpack_from(blob, 0)
    rows, cols = _MATRIX_EXT.unpack_from(blob, _HEADER.size)
    off = _HEADER.size + _MATRIX_EXT.size
    return Grid(dim, n, length), _deinterleave(blob[off:], rows * cols).reshape(rows, cols)


def to_json(obj: Field | Spectrum) -> str:
    data = obj.values if isinstance(obj, Field) else obj.coefficients
    data = np.asarray(data, dtype=complex).ravel()
    return json.dumps({
        "kind": "field" if isinstance(obj, Field) else "spectrum",
        "grid": obj.grid.to_dict(),
        "real": data.real.tolist(),
        "imag": data.imag.tolist(),
    })


def from_json(text: str) -> Field | Spectrum:
    doc = json.loads(text)
    g = Grid(**doc["grid"])
    data = np.asarray(doc["real"]) + 1j * np.asarray(doc["imag"])
    return Field(g, data) if doc["kind"] == "field" else Spectrum(g, data)
