"""Inequality reports and their JSON, CSV and SVG renderings.

All serializers are deterministic: keys are sorted, floats use ``repr`` and
nothing time- or host-dependent is written.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "pdoweights.report/1"


def _clean(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)


def params_hash(params: dict) -> str:
    blob = json.dumps(_clean(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass
class InequalityReport:
    """One instance of a weighted inequality: LHS, RHS and their ratio."""

    inequality_id: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    refinement_ratios: list = field(default_factory=list)
    member: str = ""

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if self.lhs < 0 or self.rhs < 0:
            raise ValueError("both sides of an inequality must be non-negative")
        if not self.rhs > 0:
            raise ZeroDivisionError(f"{self.inequality_id}: right-hand side is zero")

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def params_hash(self) -> str:
        return params_hash(self.params)

    def to_dict(self) -> dict:
        return {"id": self.inequality_id, "member": self.member, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "params": self.params, "params_hash": self.params_hash,
                "refinement_ratios": self.refinement_ratios}


@dataclass
class Check:
    name: str
    passed: bool
    value: float | None = None
    bound: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "bound": self.bound, "detail": self.detail}


@dataclass
class ReportSet:
    """A batch of reports plus the assertions made about them."""

    name: str
    reports: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    advisory: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, value=None, bound=None, detail: str = "") -> Check:
        c = Check(name, bool(passed), None if value is None else float(value),
                  None if bound is None else float(bound), detail)
        self.checks.append(c)
        return c

    def sup_ratio(self, inequality_id: str | None = None) -> float:
        rs = [r.ratio for r in self.reports if inequality_id is None or r.inequality_id == inequality_id]
        return max(rs) if rs else float("nan")

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def merge(self, other: "ReportSet") -> "ReportSet":
        self.reports.extend(other.reports)
        self.checks.extend(Check(f"{other.name}:{c.name}", c.passed, c.value, c.bound, c.detail) for c in other.checks)
        self.summary[other.name] = other.summary
        return self

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "name": self.name, "passed": self.passed, "advisory": self.advisory,
                "provenance": self.provenance, "summary": self.summary,
                "checks": [c.to_dict() for c in self.checks],
                "reports": [r.to_dict() for r in self.reports]}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["id", "member", "params_hash", "lhs", "rhs", "ratio"])
        for r in self.reports:
            wr.writerow([r.inequality_id, r.member, r.params_hash, repr(r.lhs), repr(r.rhs), repr(r.ratio)])
        return buf.getvalue()


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x), ignoring non-positive y."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


# --- SVG ----------------------------------------------------------------

_W, _H, _PAD = 480, 320, 48


def _svg_open(title: str) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
            f'<title>{_esc(title)}</title>',
            f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
            f'<path d="M{_PAD},{_H - _PAD} L{_W - _PAD},{_H - _PAD} M{_PAD},{_H - _PAD} L{_PAD},{_PAD}" '
            'stroke="black" fill="none"/>']


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _scale(v, lo, hi, a, b):
    if hi == lo:
        return 0.5 * (a + b)
    return a + (v - lo) * (b - a) / (hi - lo)


def svg_loglog_fit(xs, ys, title: str = "decay fit", xlabel: str = "x", ylabel: str = "y") -> str:
    """Scatter of log y against log x with the least-squares line."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    ok = (x > 0) & (y > 0)
    if ok.sum() == 0:
        raise ValueError("nothing positive to plot")
    lx, ly = np.log10(x[ok]), np.log10(y[ok])
    x0, x1 = lx.min(), lx.max()
    y0, y1 = ly.min(), ly.max()
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    px = lambda v: _scale(v, x0, x1, _PAD, _W - _PAD)
    py = lambda v: _scale(v, y0, y1, _H - _PAD, _PAD)
    out = _svg_open(title)
    for a, b in zip(lx, ly):
        out.append(f'<circle class="mark" cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="steelblue"/>')
    if ok.sum() >= 2:
        slope, icept = np.polyfit(lx, ly, 1)
        out.append(f'<path class="fit" d="M{px(x0):.2f},{py(slope * x0 + icept):.2f} '
                   f'L{px(x1):.2f},{py(slope * x1 + icept):.2f}" stroke="crimson" fill="none"/>')
        out.append(f'<text x="{_W - _PAD:.1f}" y="{_PAD - 8}" text-anchor="end" font-size="11">'
                   f'slope {slope:.3f}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="11">log10 {_esc(xlabel)}</text>')
    out.append(f'<text x="14" y="{_H / 2:.1f}" font-size="11" transform="rotate(-90 14 {_H / 2:.1f})">'
               f'log10 {_esc(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_histogram(values, title: str = "ratios", bins: int = 10) -> str:
    """Histogram bars plus one rug mark per value."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        raise ValueError("nothing to plot")
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    top = max(int(counts.max()), 1)
    px = lambda t: _scale(t, lo, hi, _PAD, _W - _PAD)
    out = _svg_open(title)
    base = _H - _PAD
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        hgt = (base - _PAD - 12) * c / top
        out.append(f'<rect class="bar" x="{px(a):.2f}" y="{base - hgt:.2f}" width="{max(px(b) - px(a) - 1, 0.5):.2f}" '
                   f'height="{hgt:.2f}" fill="lightsteelblue" stroke="steelblue"/>')
    for t in v:
        out.append(f'<path class="mark" d="M{px(t):.2f},{base + 2} L{px(t):.2f},{base + 10}" stroke="black"/>')
    out.append(f'<text x="{_PAD}" y="{_H - 12}" font-size="11">{lo:.4g}</text>')
    out.append(f'<text x="{_W - _PAD}" y="{_H - 12}" text-anchor="end" font-size="11">{hi:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
