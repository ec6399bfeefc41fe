"""Test symbols in the Hormander classes and empirical class-constant audits.

A symbol is a single vectorised evaluator ``a(x, xi)`` where ``x`` and ``xi``
are arrays of shape ``(..., dim)`` that broadcast against each other. Symbols
of the form ``profile(x) * multiplier(xi)`` also carry the two factors so that
operators can take the FFT fast path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .bumps import step_down

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


class SymbolError(ValueError):
    pass


@dataclass(frozen=True)
class ClassParams:
    m: float
    rho: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0 or not 0.0 <= self.delta <= 1.0:
            raise SymbolError(f"rho, delta must lie in [0, 1], got {self.rho}, {self.delta}")

    def exponent(self, nu: int, sigma: int) -> float:
        return self.m - self.rho * sigma + self.delta * nu

    def admissible(self) -> bool:
        """delta <= rho and delta < 1, the range of the main inequality."""
        return self.delta <= self.rho and self.delta < 1.0

    def to_dict(self) -> dict:
        return {"m": self.m, "rho": self.rho, "delta": self.delta}


@dataclass(frozen=True)
class Symbol:
    evaluator: Evaluator = field(repr=False)
    params: ClassParams
    label: str
    dim: int = 1
    length: float = 1.0
    spec: dict = field(default_factory=dict, compare=False)
    profile: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    multiplier: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    x_support_note: str | None = None
    xi_support_note: str | None = None

    def __call__(self, x, xi) -> np.ndarray:
        return self.evaluator(_as_points(x, self.dim), _as_points(xi, self.dim))

    @property
    def separable(self) -> bool:
        return self.multiplier is not None

    @property
    def xi_only(self) -> bool:
        return self.multiplier is not None and self.profile is None


def _as_points(a, dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if dim == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        a = a[..., None]
    return a


def _norm(xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(xi**2, axis=-1))


def low_cutoff(xi_norm) -> np.ndarray:
    """eta: 1 for |xi| <= 1, 0 for |xi| >= 2."""
    return step_down(xi_norm, 1.0, 2.0)


# --- builtin kinds -------------------------------------------------------

def _make_profile(spec: dict | None, dim: int, length: float):
    spec = dict(spec or {"kind": "cosine"})
    kind = spec.get("kind", "cosine")
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        return (lambda x: np.full(x.shape[:-1], value)), spec
    if kind == "cosine":
        amp = float(spec.get("amplitude", 0.5))
        harm = int(spec.get("harmonic", 1))
        offset = float(spec.get("offset", 1.0))
        spec.update(amplitude=amp, harmonic=harm, offset=offset)

        def profile(x):
            phase = 2.0 * np.pi * harm * x / length
            return offset + amp * np.mean(np.cos(phase), axis=-1)
        return profile, spec
    if kind == "sine_phase":
        kappa = float(spec.get("kappa", 1.0))
        harm = int(spec.get("harmonic", 1))
        spec.update(kappa=kappa, harmonic=harm)

        def profile(x):
            return np.exp(1j * kappa * np.mean(np.sin(2.0 * np.pi * harm * x / length), axis=-1))
        return profile, spec
    raise SymbolError(f"unknown profile kind {kind!r}")


def _from_multiplier(mult, params, label, dim, length, spec, profile=None):
    if profile is None:
        ev = lambda x, xi: np.broadcast_to(mult(xi), np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]))
    else:
        ev = lambda x, xi: profile(x) * mult(xi)
    return Symbol(ev, params, label, dim, length, spec, profile=profile, multiplier=mult)


def make_builtin_symbol(kind: str, params: dict | None = None, *, dim: int = 1, length: float = 1.0) -> Symbol:
    """Build one of the catalogued symbols from a kind string and parameter map.

    Kinds: ``constant``, ``bessel``, ``multiplier_oscillatory``,
    ``x_modulated``, ``phase_modulated``, ``separable`` and ``s000``.
    Nested symbols (``base``, ``multiplier``) are given as
    ``{"kind": ..., "params": {...}}`` maps.
    """
    params = dict(params or {})
    spec = {"kind": kind, "params": params}

    if kind == "constant":
        value = complex(params.get("value", 1.0))
        mult = lambda xi: np.full(xi.shape[:-1], value)
        return _from_multiplier(mult, ClassParams(0.0, 1.0, 0.0), "constant", dim, length, spec)

    if kind == "bessel":
        m = float(params.get("m", 0.0))
        mult = lambda xi: (1.0 + np.sum(xi**2, axis=-1)) ** (m / 2.0)
        return _from_multiplier(mult, ClassParams(m, 1.0, 0.0), f"bessel({m:g})", dim, length, spec)

    if kind == "multiplier_oscillatory":
        a_exp = float(params.get("a_exp", 0.5))
        m = float(params.get("m", 0.0))
        if not 0.0 < a_exp < 1.0:
            raise SymbolError(f"a_exp must lie in (0, 1), got {a_exp}")

        def mult(xi):
            r = _norm(xi)
            return (1.0 - low_cutoff(r)) * np.exp(1j * r**a_exp) * (1.0 + r**2) ** (m / 2.0)
        declared = ClassParams(m, float(params.get("rho", 1.0 - a_exp)), float(params.get("delta", 0.0)))
        return _from_multiplier(mult, declared, f"osc({a_exp:g},{m:g})", dim, length, spec)

    if kind == "x_modulated":
        base = _nested(params.get("base", {"kind": "bessel", "params": {"m": 0.0}}), dim, length)
        profile, pspec = _make_profile(params.get("profile"), dim, length)
        params["profile"] = pspec
        label = f"xmod[{base.label}]"
        if base.xi_only:
            return _from_multiplier(base.multiplier, base.params, label, dim, length, spec, profile=profile)
        ev = lambda x, xi: profile(x) * base.evaluator(x, xi)
        return Symbol(ev, base.params, label, dim, length, spec)

    if kind == "phase_modulated":
        base = _nested(params.get("base", {"kind": "bessel", "params": {"m": 0.0}}), dim, length)
        delta = float(params.get("delta", 0.5))
        kappa = float(params.get("kappa", 1.0))
        if not 0.0 <= delta < 1.0:
            raise SymbolError(f"delta must lie in [0, 1), got {delta}")

        def ev(x, xi):
            phase = kappa * np.mean(np.cos(2.0 * np.pi * x / length), axis=-1)
            phase = phase * (1.0 + np.sum(xi**2, axis=-1)) ** (delta / 2.0)
            return base.evaluator(x, xi) * np.exp(1j * phase)
        bp = base.params
        declared = ClassParams(bp.m, min(bp.rho, 1.0 - delta), max(bp.delta, delta))
        return Symbol(ev, declared, f"phase[{base.label},{delta:g}]", dim, length, spec)

    if kind == "separable":
        mult_sym = _nested(params.get("multiplier", {"kind": "bessel", "params": {"m": 0.0}}), dim, length)
        if not mult_sym.xi_only:
            raise SymbolError("separable needs an xi-only multiplier")
        profile, pspec = _make_profile(params.get("profile"), dim, length)
        params["profile"] = pspec
        return _from_multiplier(mult_sym.multiplier, mult_sym.params, f"sep[{mult_sym.label}]",
                                dim, length, spec, profile=profile)

    if kind == "s000":
        kappa = float(params.get("kappa", 1.0))
        freq = float(params.get("freq", 1.0))
        cutoff = params.get("xi_cutoff")

        def ev(x, xi):
            sx = np.mean(np.sin(2.0 * np.pi * x / length), axis=-1)
            cx = np.mean(np.cos(freq * xi), axis=-1)
            out = np.exp(1j * kappa * sx * cx)
            if cutoff is not None:
                out = out * low_cutoff(_norm(xi) / float(cutoff))
            return out
        return Symbol(ev, ClassParams(0.0, 0.0, 0.0), "s000", dim, length, spec,
                      xi_support_note=None if cutoff is None else f"|xi| <= {2 * float(cutoff):g}")

    raise SymbolError(f"unknown symbol kind {kind!r}")


def _nested(spec: dict, dim: int, length: float) -> Symbol:
    return make_builtin_symbol(spec["kind"], spec.get("params", {}), dim=dim, length=length)


def symbol_from_spec(spec: dict, *, dim: int = 1, length: float = 1.0) -> Symbol:
    return make_builtin_symbol(spec["kind"], spec.get("params", {}), dim=dim, length=length)


def redeclare(sym: Symbol, **changes) -> Symbol:
    """Same evaluator, different declared class parameters."""
    return replace(sym, params=replace(sym.params, **changes))


def split_symbol(sym: Symbol) -> tuple[Symbol, Symbol]:
    """a = a0 + a1 with a0 = a * eta(xi) supported in |xi| <= 2."""
    def ev0(x, xi):
        return sym.evaluator(x, xi) * low_cutoff(_norm(xi))

    def ev1(x, xi):
        return sym.evaluator(x, xi) * (1.0 - low_cutoff(_norm(xi)))

    kw = dict(dim=sym.dim, length=sym.length, profile=sym.profile)
    if sym.separable:
        m0 = lambda xi: sym.multiplier(xi) * low_cutoff(_norm(xi))
        m1 = lambda xi: sym.multiplier(xi) * (1.0 - low_cutoff(_norm(xi)))
    else:
        m0 = m1 = None
    a0 = Symbol(ev0, sym.params, f"{sym.label}.low", spec={"split": "low", "of": sym.spec},
                multiplier=m0, xi_support_note="|xi| <= 2", **kw)
    a1 = Symbol(ev1, sym.params, f"{sym.label}.high", spec={"split": "high", "of": sym.spec},
                multiplier=m1, xi_support_note="|xi| >= 1", **kw)
    return a0, a1


# --- class constants -----------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    scales: tuple[int, ...] = (3, 4, 5, 6, 7)
    xi_per_scale: int = 24
    x_points: int = 16
    step_factor: float = 1e-3
    x_step: float | None = None
    seed: int = 0

    def __post_init__(self):
        if len(self.scales) < 3:
            raise SymbolError("sample spec must cover at least 3 dyadic scales")


@dataclass
class ClassConstant:
    nu: tuple[int, ...]
    sigma: tuple[int, ...]
    constant: float
    per_scale: list[float]
    max_growth: float
    slope: float
    finite: bool
    uniform: bool

    def to_dict(self) -> dict:
        return {
            "nu": list(self.nu), "sigma": list(self.sigma), "constant": self.constant,
            "per_scale": self.per_scale, "max_growth": self.max_growth, "slope": self.slope,
            "finite": self.finite, "uniform": self.uniform,
        }


@dataclass
class ClassVerificationReport:
    label: str
    params: ClassParams
    max_order: int
    scales: tuple[int, ...]
    entries: list[ClassConstant]

    @property
    def all_finite(self) -> bool:
        return all(e.finite for e in self.entries)

    @property
    def uniform(self) -> bool:
        return all(e.uniform for e in self.entries)

    def get(self, nu, sigma) -> ClassConstant:
        nu, sigma = tuple(np.atleast_1d(nu)), tuple(np.atleast_1d(sigma))
        for e in self.entries:
            if e.nu == nu and e.sigma == sigma:
                return e
        raise KeyError((nu, sigma))

    def to_dict(self) -> dict:
        return {"label": self.label, "params": self.params.to_dict(), "max_order": self.max_order,
                "scales": list(self.scales), "uniform": self.uniform, "all_finite": self.all_finite,
                "entries": [e.to_dict() for e in self.entries]}

    def table(self) -> str:
        head = f"{'nu':>6} {'sigma':>6} {'C':>12} {'growth':>8} {'slope':>7}  ok"
        rows = [f"symbol {self.label}  declared m={self.params.m:g} rho={self.params.rho:g} "
                f"delta={self.params.delta:g}", head]
        for e in self.entries:
            flag = "yes" if (e.finite and e.uniform) else "NONUNIFORM" if e.finite else "NONFINITE"
            rows.append(f"{str(e.nu):>6} {str(e.sigma):>6} {e.constant:12.5g} {e.max_growth:8.3f} "
                        f"{e.slope:7.3f}  {flag}")
        return "\n".join(rows)


def _multi_indices(dim: int, max_order: int):
    for total in range(max_order + 1):
        for combo in itertools.product(range(total + 1), repeat=2 * dim):
            if sum(combo) == total:
                yield tuple(combo[:dim]), tuple(combo[dim:])


def _central_weights(order: int) -> list[tuple[float, float]]:
    """(offset in steps, weight) pairs of the symmetric order-th difference."""
    return [(order / 2.0 - j, (-1) ** j * math.comb(order, j)) for j in range(order + 1)]


def mixed_derivative(sym: Symbol, x: np.ndarray, xi: np.ndarray, nu, sigma,
                     hx: float, hxi: np.ndarray) -> np.ndarray:
    """Central finite-difference estimate of d_x^nu d_xi^sigma a at (x, xi)."""
    d = sym.dim
    axes = [(0, k, nu[k]) for k in range(d) if nu[k]] + [(1, k, sigma[k]) for k in range(d) if sigma[k]]
    if not axes:
        return sym.evaluator(x, xi)
    stencils = [_central_weights(o) for (_, _, o) in axes]
    total = 0.0
    for combo in itertools.product(*stencils):
        xs, xis, weight = x.copy(), xi.copy(), 1.0
        for (var, k, _), (off, wgt) in zip(axes, combo):
            weight *= wgt
            if var == 0:
                xs[..., k] += off * hx
            else:
                xis[..., k] += off * hxi
        total = total + weight * sym.evaluator(xs, xis)
    scale = hx ** sum(nu) * hxi ** sum(sigma)
    return total / scale


def _xi_samples(dim: int, scale: int, count: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = 2.0**scale, 2.0 ** (scale + 1)
    mags = np.linspace(lo, hi, count, endpoint=False)
    if dim == 1:
        signs = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
        return (mags * signs)[:, None]
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return np.stack([mags * np.cos(theta), mags * np.sin(theta)], axis=-1)


def estimate_class_constants(sym: Symbol, max_order: int = 2, sample_spec: SampleSpec | None = None,
                             params: ClassParams | None = None) -> ClassVerificationReport:
    """Sup of |d_x^nu d_xi^sigma a| / (1+|xi|)^(m - rho|sigma| + delta|nu|) per dyadic scale.

    ``params`` overrides the declared class (used to probe how tight a
    declaration is). A (nu, sigma) pair is flagged non-uniform when the
    per-scale sups grow by more than 2x between adjacent scales or show a
    sustained log2-slope above 0.25 across the sampled scales.
    """
    if max_order > 4:
        raise SymbolError("max_order is capped at 4")
    spec = sample_spec or SampleSpec()
    cp = params or sym.params
    rng = np.random.default_rng(spec.seed)
    d = sym.dim
    hx = spec.x_step if spec.x_step is not None else sym.length / 256
    xs1 = np.linspace(0.0, sym.length, spec.x_points, endpoint=False)
    if d == 1:
        xs = xs1[:, None]
    else:
        xs = np.stack(np.meshgrid(xs1, xs1, indexing="ij"), axis=-1).reshape(-1, 2)

    samples = []
    for j in spec.scales:
        xi = _xi_samples(d, j, spec.xi_per_scale, rng)
        X = np.broadcast_to(xs[:, None, :], (xs.shape[0], xi.shape[0], d)).copy()
        XI = np.broadcast_to(xi[None, :, :], (xs.shape[0], xi.shape[0], d)).copy()
        samples.append((X, XI))

    entries = []
    for nu, sigma in _multi_indices(d, max_order):
        per_scale = []
        finite = True
        for X, XI in samples:
            r = _norm(XI)
            hxi = spec.step_factor * (1.0 + r) ** cp.rho
            deriv = mixed_derivative(sym, X, XI, nu, sigma, hx, hxi)
            ratio = np.abs(deriv) / (1.0 + r) ** cp.exponent(sum(nu), sum(sigma))
            if not np.all(np.isfinite(ratio)):
                finite = False
                ratio = np.where(np.isfinite(ratio), ratio, np.inf)
            per_scale.append(float(np.max(ratio)))
        vals = np.array(per_scale)
        noise = 1e-9 * max(float(np.max(vals[np.isfinite(vals)], initial=0.0)), 1e-300)
        safe = np.maximum(vals, noise)
        growth = safe[1:] / safe[:-1]
        slope = float(np.polyfit(np.arange(len(safe)), np.log2(safe), 1)[0]) if np.all(np.isfinite(safe)) else np.inf
        max_growth = float(np.max(growth)) if np.all(np.isfinite(growth)) else np.inf
        if np.max(vals) <= 1e-8:
            slope, max_growth = 0.0, 1.0
        uniform = finite and max_growth <= 2.0 and slope <= 0.25
        entries.append(ClassConstant(nu, sigma, float(np.max(vals)), per_scale, max_growth, slope,
                                     finite, uniform))
    return ClassVerificationReport(sym.label, cp, max_order, spec.scales, entries)
