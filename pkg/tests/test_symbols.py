import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdoweights.symbols import (ClassParams, SampleSpec, SymbolError, estimate_class_constants,
                                make_builtin_symbol, redeclare, split_symbol, symbol_from_spec)

BUILTINS = [
    ("constant", {}),
    ("bessel", {"m": -1.0}),
    ("bessel", {"m": 0.0}),
    ("multiplier_oscillatory", {"a_exp": 0.5, "m": -0.25}),
    ("x_modulated", {}),
    ("phase_modulated", {"delta": 0.5}),
    ("separable", {}),
    ("s000", {}),
]


def test_constant_symbol():
    a = make_builtin_symbol("constant")
    assert a.params == ClassParams(0.0, 1.0, 0.0)
    assert np.all(a(np.linspace(0, 1, 7), np.linspace(-50, 50, 7)) == 1.0)


def test_bessel_formula():
    a = make_builtin_symbol("bessel", {"m": -1})
    xi = np.linspace(-30, 30, 41)
    np.testing.assert_allclose(a(0.3, xi), (1 + xi**2) ** -0.5, rtol=1e-15)
    assert a.params == ClassParams(-1.0, 1.0, 0.0)


def test_oscillatory_declared_class():
    a = make_builtin_symbol("multiplier_oscillatory", {"a_exp": 0.5, "m": -0.25})
    assert (a.params.m, a.params.rho, a.params.delta) == (-0.25, 0.5, 0.0)


def test_unknown_and_bad_params():
    with pytest.raises(SymbolError):
        make_builtin_symbol("nope")
    with pytest.raises(SymbolError):
        make_builtin_symbol("multiplier_oscillatory", {"a_exp": 1.5})
    with pytest.raises(SymbolError):
        ClassParams(0.0, 1.5, 0.0)


def test_spec_round_trip():
    spec = {"kind": "x_modulated", "params": {"base": {"kind": "bessel", "params": {"m": -1}}}}
    a = symbol_from_spec(spec)
    assert a.label == "xmod[bessel(-1)]"
    assert a.separable and not a.xi_only


def test_split_regions():
    a = make_builtin_symbol("multiplier_oscillatory", {"a_exp": 0.5, "m": 0.0})
    a0, a1 = split_symbol(a)
    x = np.array([0.1, 0.7])
    for r in (0.5, -0.5):
        assert np.allclose(a0(x, r), a(x, r)) and np.allclose(a1(x, r), 0.0)
    for r in (3.0, -3.0):
        assert np.allclose(a0(x, r), 0.0) and np.allclose(a1(x, r), a(x, r))


def test_split_partition_identity(rng):
    a = make_builtin_symbol("phase_modulated", {"delta": 0.5})
    a0, a1 = split_symbol(a)
    x, xi = rng.uniform(0, 1, 1000), rng.uniform(-4, 4, 1000)
    assert np.max(np.abs(a0(x, xi) + a1(x, xi) - a(x, xi))) < 1e-14


def test_constant_class_constants():
    rep = estimate_class_constants(make_builtin_symbol("constant"), max_order=2)
    assert rep.get(0, 0).constant == pytest.approx(1.0)
    for e in rep.entries:
        if e.nu != (0,) or e.sigma != (0,):
            assert e.constant == 0.0
    assert rep.all_finite and rep.uniform


def test_bessel_first_derivative_oracle():
    # brute-force sup of |d/dxi (1+xi^2)^(-1/2)| (1+|xi|)^2 over the sample lattice
    spec = SampleSpec()
    rep = estimate_class_constants(make_builtin_symbol("bessel", {"m": -1}), max_order=1, sample_spec=spec)
    xi = np.concatenate([np.linspace(2.0**s, 2.0 ** (s + 1), 2000) for s in spec.scales])
    brute = np.max(np.abs(xi) * (1 + xi**2) ** -1.5 * (1 + xi) ** 2)
    c = rep.get(0, 1).constant
    assert np.isfinite(c) and c <= 1.01 * brute and c >= 0.9 * brute


@pytest.mark.parametrize("kind,params", BUILTINS)
def test_builtins_are_uniform(kind, params):
    rep = estimate_class_constants(make_builtin_symbol(kind, params), max_order=2)
    assert rep.all_finite and rep.uniform, rep.table()


def test_misdeclared_rho_is_flagged():
    a = redeclare(make_builtin_symbol("multiplier_oscillatory", {"a_exp": 0.5, "m": 0.0}), rho=0.9)
    rep = estimate_class_constants(a, max_order=1)
    assert not rep.get(0, 1).uniform
    assert "NONUNIFORM" in rep.table()


@given(st.floats(-3, 1), st.floats(-200, 200))
def test_bessel_is_real_positive(m, xi):
    a = make_builtin_symbol("bessel", {"m": m})
    v = a(0.0, xi)
    assert np.all(v > 0) and np.all(np.isreal(v))


@given(st.floats(0, 1), st.floats(-100, 100))
def test_s000_unimodular(x, xi):
    v = make_builtin_symbol("s000")(x, xi)
    assert abs(abs(complex(np.ravel(v)[0])) - 1.0) < 1e-12
