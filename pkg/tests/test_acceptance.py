"""Acceptance criteria 1-9, each at its stated tolerance, with one PASS/FAIL line per criterion."""

import io
import json
import math
import time
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from pdoweights.calculus import compose_cutoff
from pdoweights.cli import main
from pdoweights.grid import Field, Grid, inverse, transform, weighted_l2
from pdoweights.operators import apply_pdo, apply_pdo_adjoint, inner
from pdoweights.symbols import estimate_class_constants, make_builtin_symbol, redeclare

pytestmark = pytest.mark.acceptance

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
BUILTINS = [
    ("constant", {}),
    ("bessel", {"m": -1.0}),
    ("multiplier_oscillatory", {"a_exp": 0.5, "m": -0.25}),
    ("x_modulated", {}),
    ("phase_modulated", {"delta": 0.5}),
    ("separable", {}),
    ("s000", {}),
]


def _announce(capsys, number, ok, detail, seconds):
    with capsys.disabled():
        print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'} ({seconds:.1f}s) {detail}")


def _verify(name, out):
    with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
        code = main(["verify", str(SCENARIOS / f"{name}.json"), "--out", str(out), "--format", "json,csv"])
    return code, json.loads((out / f"{name}.json").read_text())


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Every scenario once; criterion 9 repeats them."""
    out = tmp_path_factory.mktemp("first")
    results, times = {}, {}
    for path in sorted(SCENARIOS.glob("*.json")):
        t0 = time.perf_counter()
        results[path.stem] = _verify(path.stem, out)
        times[path.stem] = time.perf_counter() - t0
    return out, results, times


def _failed_checks(doc):
    return [c["name"] for c in doc["checks"] if not c["passed"]]


def test_criterion_1_exactness(capsys):
    t0 = time.perf_counter()
    worst = {}
    rng = np.random.default_rng(1)
    for n in (256, 1024):
        g = Grid(1, n)
        f = Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        h = Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        mode = Field(g, np.exp(2j * np.pi * g.axis()))
        rel = lambda a, b: float(np.linalg.norm(a - b) / np.linalg.norm(b))
        errs = {
            "identity": rel(apply_pdo(make_builtin_symbol("constant"), f).values, f.values),
            "round-trip": rel(inverse(transform(f)).values, f.values),
            "eigenfunction": rel(apply_pdo(make_builtin_symbol("bessel", {"m": -1}), mode).values,
                                 (1 + 4 * math.pi**2) ** -0.5 * mode.values),
            "parseval": abs(weighted_l2(f) - np.sum(np.abs(transform(f).coefficients) ** 2)) / weighted_l2(f),
        }
        b = make_builtin_symbol("bessel", {"m": -2})
        errs["self-adjoint"] = rel(apply_pdo_adjoint(b, f).values, apply_pdo(b, f).values)
        for kind, params in (("phase_modulated", {"delta": 0.5}), ("s000", {})):
            a = make_builtin_symbol(kind, params)
            lhs, rhs = inner(apply_pdo(a, f), h), inner(f, apply_pdo_adjoint(a, h))
            errs[f"adjoint-{kind}"] = abs(lhs - rhs) / abs(lhs)
        for k, v in errs.items():
            worst[k] = max(worst.get(k, 0.0), v)
    ok = all(v <= 1e-10 for v in worst.values())
    _announce(capsys, 1, ok, f"worst relative error {max(worst.values()):.2e} <= 1e-10 at n = 256, 1024",
              time.perf_counter() - t0)
    assert ok, worst


def test_criterion_2_symbol_audit(capsys):
    t0 = time.perf_counter()
    bad = []
    for kind, params in BUILTINS + [("bessel", {"m": 0.0}), ("bessel", {"m": -2.0})]:
        rep = estimate_class_constants(make_builtin_symbol(kind, params), max_order=2)
        if rep.scales != (3, 4, 5, 6, 7) or not (rep.all_finite and rep.uniform):
            bad.append(rep.label)
    mis = redeclare(make_builtin_symbol("multiplier_oscillatory", {"a_exp": 0.5, "m": 0.0}), rho=0.9)
    flagged = not estimate_class_constants(mis, max_order=2).uniform
    dt = time.perf_counter() - t0
    ok = not bad and flagged and dt < 30
    _announce(capsys, 2, ok, f"non-uniform builtins {bad or 'none'}; misdeclared rho flagged: {flagged}", dt)
    assert ok


def test_criterion_3_kernel_decay(capsys, runs):
    _, results, times = runs
    (c1, stable), (c2, unstable) = results["kernel-stable"], results["kernel-unstable"]
    dt = times["kernel-stable"] + times["kernel-unstable"]
    (s_rep,) = [v for k, v in stable["summary"].items() if k != "decay"]
    (u_rep,) = [v for k, v in unstable["summary"].items() if k != "decay"]
    ok = c1 == 0 and c2 == 0 and s_rep["spread"] <= 2 and not u_rep["stable"] and dt < 60
    _announce(capsys, 3, ok, f"bessel(-2) spread {s_rep['spread']:.3f} <= 2; bessel(-0.5) flagged "
              f"(spread {u_rep['spread']:.3f}, slope {u_rep['slope']:.3f})", dt)
    assert ok


def test_criterion_4_littlewood_paley(capsys, runs):
    _, results, times = runs
    code, doc = results["lp-d1"]
    partition = [c for c in doc["checks"] if c["name"].startswith("partition")]
    ok = code == 0 and all(c["value"] <= 1e-12 for c in partition) and times["lp-d1"] < 60
    ok = ok and len(doc["reports"]) == 2 * 10 * 10
    sup = doc["summary"]
    _announce(capsys, 4, ok, f"partition error {max(c['value'] for c in partition):.1e}; forward sup "
              f"{sup['prop-lp-forward']}, reverse sup {sup['prop-lp-reverse']}; failures {_failed_checks(doc)}",
              times["lp-d1"])
    assert ok


def test_criterion_5_calculus(capsys, runs):
    t0 = time.perf_counter()
    g = Grid(1, 256, 8.0)
    ident = 0.0
    for kind, params in BUILTINS:
        a = make_builtin_symbol(kind, params, length=8.0)
        for R in (8, 16):
            ident = max(ident, compose_cutoff(a, R, 1, g, n_fields=4).identity_error)
    _, results, times = runs
    code, doc = results["compose-d1"]
    checks = {c["name"]: c for c in doc["checks"]}
    slope = checks["x_modulated():decay-slope"]["value"]
    kern = checks["x_modulated():kernel-R-uniform"]["value"]
    e0 = max(c["value"] for n, c in checks.items() if n.endswith("multiplier-e0"))
    dt = time.perf_counter() - t0 + times["compose-d1"]
    ok = ident <= 1e-8 and code == 0 and slope <= -0.5 + 0.2 and kern <= 3 and e0 <= 1e-10 and dt < 120
    _announce(capsys, 5, ok, f"identity {ident:.1e}; multiplier e^1 {e0:.1e}; x_modulated slope {slope:.3f}; "
              f"kernel R-spread {kern:.2f}", dt)
    assert ok


def test_criterion_6_cotlar(capsys, runs):
    _, results, times = runs
    code, doc = results["cotlar-d1"]
    ok = code == 0 and times["cotlar-d1"] < 180
    checks = {c["name"].split(":")[-1]: c["value"] for c in doc["checks"]}
    _announce(capsys, 6, ok, f"telescoping {checks.get('telescoping')}; disjoint {checks.get('x-disjoint-zero')}; "
              f"decay {checks.get('decay-exponent')}; weight spread {checks.get('opnorm-weight-uniform')}; "
              f"failures {_failed_checks(doc)}", times["cotlar-d1"])
    assert ok, _failed_checks(doc)


@pytest.mark.parametrize("name", ["thm-main-d1", "cor-m8-d1", "origin-d1", "dyadic-d1", "s000-d1"])
def test_criterion_7_main_inequalities(capsys, runs, name):
    _, results, times = runs
    code, doc = results[name]
    refine = [c["value"] for c in doc["checks"] if c["name"].endswith(":refinement")]
    uniform = [c["value"] for c in doc["checks"] if c["name"].endswith("R-uniform")]
    ok = code == 0 and refine and all(v <= 2 for v in refine) and all(v <= 3 for v in uniform)
    _announce(capsys, f"7/{name}", ok, f"sup ratio {max(r['ratio'] for r in doc['reports']):.4g}; refinement "
              f"spread <= {max(refine):.3f}" + (f"; R-spread <= {max(uniform):.3f}" if uniform else ""),
              times[name])
    assert ok, _failed_checks(doc)


def test_criterion_8_pointwise(capsys, runs):
    _, results, times = runs
    (cd, dom), (cp, psi), (cb, bad) = results["domination-d1"], results["psi-lemmas"], results["psi-lemmas-known-bad"]
    dt = times["domination-d1"] + times["psi-lemmas"] + times["psi-lemmas-known-bad"]
    flagged = cb == 1 and any("lem-psi-conv" in n for n in _failed_checks(bad))
    ok = cd == 0 and cp == 0 and flagged and dt < 60
    _announce(capsys, 8, ok, f"domination+lemmas failures {_failed_checks(dom) or 'none'}; psi lemmas "
              f"{_failed_checks(psi) or 'pass'}; N <= d flagged: {flagged}", dt)
    assert ok


def test_criterion_9_determinism(capsys, runs, tmp_path):
    first, results, _ = runs
    t0 = time.perf_counter()
    mismatched = []
    for name in results:
        _verify(name, tmp_path)
        for ext in ("json", "csv"):
            if (first / f"{name}.{ext}").read_bytes() != (tmp_path / f"{name}.{ext}").read_bytes():
                mismatched.append(f"{name}.{ext}")
    ok = not mismatched
    _announce(capsys, 9, ok, f"{len(results)} scenarios rerun; mismatched files: {mismatched or 'none'}",
              time.perf_counter() - t0)
    assert ok
