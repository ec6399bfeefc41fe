"""Seeded test families: weights and functions described by JSON-ready descriptors.

Every member is defined in physical units (positions and frequencies, not
grid indices), so refining the grid resamples the same continuum object.
Random members draw from ``numpy.random.default_rng([seed, index])``.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Field, Grid, GridError
from .maximal import Weight, make_weight

CORPUS_VERSION = 1
WEIGHT_KINDS = ("constant", "spike", "power", "random-lognormal", "indicator")
FUNCTION_KINDS = ("band-limited", "mode", "packet")


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def _dist_to(grid: Grid, center) -> np.ndarray:
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    mesh = grid.mesh()
    return np.sqrt(sum(grid.torus_delta(m, ci) ** 2 for m, ci in zip(mesh, c)))


def _smooth_gaussian(grid: Grid, rng: np.random.Generator, modes: int) -> np.ndarray:
    """Unit-variance random trigonometric polynomial with integer wavenumbers |k| <= modes."""
    ks = np.arange(-modes, modes + 1)
    grids = np.meshgrid(*([ks] * grid.dim), indexing="ij")
    kv = np.stack([g.ravel() for g in grids], axis=-1)
    kv = kv[np.any(kv != 0, axis=1)]
    amp = rng.standard_normal(len(kv))
    phase = rng.uniform(0.0, 2.0 * np.pi, len(kv))
    pts = grid.points()
    arg = 2.0 * np.pi * (pts @ kv.T) / grid.length + phase[None, :]
    g = np.cos(arg) @ amp * math.sqrt(2.0 / len(kv))
    return g.reshape(grid.shape)


def weight_values(grid: Grid, desc: dict, seed: int = 0, index: int = 0) -> np.ndarray:
    """Raw (pre-floor) weight samples for a descriptor ``{"kind": ..., "params": {...}}``."""
    kind = desc.get("kind")
    p = desc.get("params", {})
    L = grid.length
    if kind == "constant":
        return np.full(grid.shape, float(p.get("value", 1.0)))
    if kind == "spike":
        width = float(p.get("width", L / 64.0))
        center = p.get("center", L / 2.0)
        base = float(p.get("base", 0.0))
        height = float(p.get("height", 1.0))
        return base + height * (_dist_to(grid, center) <= width / 2.0 + 1e-12 * L)
    if kind == "power":
        a = float(p.get("exponent", 0.5))
        if a <= -grid.dim:
            raise GridError(f"power exponent {a} is not locally integrable in dimension {grid.dim}")
        r = np.maximum(_dist_to(grid, p.get("center", 0.0)), grid.spacing / 2.0)
        return r**a
    if kind == "random-lognormal":
        sigma = float(p.get("sigma", 1.0))
        modes = int(p.get("modes", 8))
        s = int(p.get("seed", seed))
        return np.exp(sigma * _smooth_gaussian(grid, _rng(s, index), modes))
    if kind == "indicator":
        lo, hi = (float(t) for t in p.get("interval", (0.0, L / 4.0)))
        base = float(p.get("base", 0.0))
        coords = grid.mesh()[0]
        return base + ((coords >= lo - 1e-12) & (coords <= hi + 1e-12)).astype(float)
    raise GridError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")


def make_corpus_weight(grid: Grid, desc: dict, seed: int = 0, index: int = 0) -> Weight:
    floor = desc.get("floor")
    return make_weight(grid, weight_values(grid, desc, seed, index), None if floor is None else float(floor))


def standard_weight_descriptors(seed: int = 0, size: int = 10, length: float = 1.0) -> list[dict]:
    """The frozen weight corpus: one of each deterministic kind, the rest lognormal."""
    base = [
        {"kind": "constant", "params": {"value": 1.0}},
        {"kind": "spike", "params": {"width": length / 32.0, "center": length / 2.0, "height": 1.0}},
        {"kind": "power", "params": {"exponent": 0.5, "center": 0.0}},
        {"kind": "power", "params": {"exponent": -0.5, "center": 0.0}},
        {"kind": "indicator", "params": {"interval": [0.0, length / 4.0]}},
    ]
    out = base[: min(size, len(base))]
    sigmas = (0.5, 1.0, 1.5, 2.0)
    for j in range(size - len(out)):
        out.append({"kind": "random-lognormal", "params": {"sigma": sigmas[j % len(sigmas)], "modes": 8,
                                                          "seed": int(seed) * 1000 + j}})
    return out


def lognormal_descriptors(seed: int = 0, size: int = 10, sigma: float = 1.0, modes: int = 8) -> list[dict]:
    return [{"kind": "random-lognormal", "params": {"sigma": sigma, "modes": modes, "seed": int(seed) * 1000 + j}}
            for j in range(size)]


# --- functions ---------------------------------------------------------------

def function_values(grid: Grid, desc: dict, seed: int = 0, index: int = 0) -> np.ndarray:
    kind = desc.get("kind")
    p = desc.get("params", {})
    dk = grid.freq_spacing
    if kind == "band-limited":
        lo, hi = (float(t) for t in p.get("band", (0.0, 8.0 * dk)))
        if hi > grid.nyquist:
            raise GridError(f"band edge {hi} exceeds the Nyquist frequency {grid.nyquist:.4g}")
        s = int(p.get("seed", seed))
        rng = _rng(s, index)
        # draw on the coarsest common lattice so refinement keeps the same function
        top = int(math.floor(hi / dk + 1e-9))
        ks = np.arange(-top, top + 1)
        grids = np.meshgrid(*([ks] * grid.dim), indexing="ij")
        kv = np.stack([g.ravel() for g in grids], axis=-1)
        r = np.sqrt(np.sum((kv * dk) ** 2, axis=-1))
        kv = kv[(r >= lo - 1e-9) & (r <= hi + 1e-9)]
        if len(kv) == 0:
            raise GridError("band contains no lattice frequency")
        coef = rng.standard_normal(len(kv)) + 1j * rng.standard_normal(len(kv))
        vals = np.exp(1j * dk * (grid.points() @ kv.T)) @ coef / math.sqrt(len(kv))
        return vals.reshape(grid.shape)
    if kind == "mode":
        k = np.broadcast_to(np.asarray(p.get("k", 1), dtype=float), (grid.dim,))
        if np.max(np.abs(k)) * dk > grid.nyquist:
            raise GridError("mode exceeds the Nyquist frequency")
        return np.exp(1j * dk * (grid.points() @ k)).reshape(grid.shape)
    if kind == "packet":
        center = p.get("center", grid.length / 2.0)
        width = float(p.get("width", grid.length / 16.0))
        xi0 = np.broadcast_to(np.asarray(p.get("xi", 4.0 * dk), dtype=float), (grid.dim,))
        env = np.exp(-0.5 * (_dist_to(grid, center) / width) ** 2)
        phase = np.exp(1j * (grid.points() @ xi0)).reshape(grid.shape)
        return env * phase
    raise GridError(f"unknown function kind {kind!r}; expected one of {FUNCTION_KINDS}")


def make_function(grid: Grid, desc: dict, seed: int = 0, index: int = 0) -> Field:
    return Field(grid, function_values(grid, desc, seed, index))


def standard_function_descriptors(seed: int = 0, size: int = 10, length: float = 1.0,
                                  band: tuple[float, float] | None = None) -> list[dict]:
    """Band-limited random fields, single modes and wave packets (at least one of each when size >= 3)."""
    dk = 2.0 * np.pi / length
    band = band or (0.0, 8.0 * dk)
    lo, hi = band
    mid = max(1, int(round(0.5 * (lo + hi) / dk)))
    out = []
    kinds = ["band-limited", "mode", "packet"]
    for j in range(size):
        kind = kinds[j % 3] if j < 3 else ("band-limited" if j % 2 else kinds[1 + (j // 2) % 2])
        if kind == "band-limited":
            out.append({"kind": kind, "params": {"band": [lo, hi], "seed": int(seed) * 1000 + j}})
        elif kind == "mode":
            top = max(1, int(math.floor(hi / dk + 1e-9)))
            bot = max(1, int(math.ceil(lo / dk - 1e-9)))
            k = bot + (j * 7) % max(top - bot + 1, 1)
            out.append({"kind": kind, "params": {"k": int(k if j % 2 == 0 else -k)}})
        else:
            frac = (0.25, 0.5, 0.75)[j % 3]
            out.append({"kind": kind, "params": {"center": frac * length, "width": length / 16.0,
                                                "xi": float(mid * dk)}})
    return out


def corpus_document(seed: int = 0, size: int = 10, length: float = 1.0) -> dict:
    """JSON-ready record of the frozen corpus."""
    return {"version": CORPUS_VERSION, "seed": int(seed), "length": float(length),
            "weights": standard_weight_descriptors(seed, size, length),
            "functions": standard_function_descriptors(seed, size, length)}
