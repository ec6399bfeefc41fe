import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdoweights.corpus import make_corpus_weight, standard_weight_descriptors
from pdoweights.grid import Field, Grid
from pdoweights.maximal import (Weight, ap_characteristic, ball_average, band_majorant, check_domination, hl_maximal,
                                iterated_maximal, make_weight, max_over_ball, nontangential_fractional,
                                power_maximal, psi_integral, psi_kernel, rescale_weight, rh_constant,
                                smooth_majorant, sup_ball_average)


def _w(g, values):
    return make_weight(g, values)


def _spike(g, x0=0.5, mass=1.0):
    v = np.zeros(g.shape)
    v[int(round(x0 / g.spacing))] = mass / g.spacing
    return v


def test_constant_weight_fixed_by_M():
    g = Grid(1, 128)
    w = _w(g, np.full(128, 3.0))
    np.testing.assert_allclose(hl_maximal(w).values.real, w.values.real, rtol=1e-12)
    assert w.values.real[0] == pytest.approx(3.0, rel=1e-7)


def test_indicator_maximal_value():
    g = Grid(1, 256)
    x = g.axis()
    w = _w(g, ((x >= 0) & (x <= 0.25)).astype(float))
    got = hl_maximal(w).values.real[128]
    # brute force over every cyclic interval of grid points containing x = 1/2
    v = w.values.real
    best = 0.0
    for a in range(256):
        for length in range(1, 257):
            idx = (a + np.arange(length)) % 256
            if 128 in idx:
                best = max(best, v[idx].mean())
    assert abs(got - 0.5) <= 2 * g.spacing
    assert abs(got - best) <= 2 * g.spacing


def test_iterated_maximal():
    g = Grid(1, 128)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {"sigma": 1.0}}, 3)
    m1 = hl_maximal(w).values.real
    np.testing.assert_allclose(iterated_maximal(w, 1).values.real, m1)
    assert np.all(m1 >= w.values.real * (1 - 1e-12))
    assert np.all(iterated_maximal(w, 2).values.real >= m1 * (1 - 1e-12))
    one = _w(g, np.ones(128))
    np.testing.assert_allclose(iterated_maximal(one, 8).values.real, one.values.real, rtol=1e-12)


@pytest.mark.parametrize("rho", [0.25, 0.5, 1.0])
def test_fractional_m0_constant(rho):
    g = Grid(1, 128)
    one = _w(g, np.ones(128))
    np.testing.assert_allclose(nontangential_fractional(one, rho, 0.0).values.real, one.values.real, rtol=1e-12)


def test_fractional_sqrt2():
    g = Grid(1, 256)
    v = nontangential_fractional(_w(g, np.ones(256)), 0.5, -0.25).values.real
    np.testing.assert_allclose(v, math.sqrt(2.0), rtol=1e-7)


def test_fractional_spike_inverse_distance():
    g = Grid(1, 256)
    v = nontangential_fractional(_w(g, _spike(g, 0.5)), 1.0, 0.0).values.real
    for j in range(4, 128):
        d = j * g.spacing
        # smallest centred grid ball holding both points has 2 ceil(j/2) + 1 cells
        cells = 2 * math.ceil(j / 2) + 1
        assert v[128 + j] == pytest.approx(1.0 / (cells * g.spacing), rel=1e-7)
        assert v[128 - j] == pytest.approx(v[128 + j], rel=1e-12)
        # continuum value 1/dist, up to two cells of counting slack
        assert 1.0 / (d + 2 * g.spacing) * (1 - 1e-7) <= v[128 + j] <= 1.0 / d


def test_ball_averages():
    g = Grid(1, 64)
    np.testing.assert_allclose(ball_average(_w(g, np.full(64, 2.0)), 0.1).values.real, 2.0)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, 1)
    np.testing.assert_allclose(sup_ball_average(w).values.real, w.values.real.mean(), rtol=1e-12)


def test_a1star_spike_on_length_8():
    g = Grid(1, 256, 8.0)
    v = np.zeros(256)
    v[128] = 1.0 / g.spacing
    w = _w(g, v)
    got = sup_ball_average(w).values.real
    v = w.values.real
    x = g.axis()
    for j in range(0, 256, 7):
        best = 0.0
        for r in (1.0, 2.0, 4.0):
            pts = np.abs(g.torus_delta(x, x[j])) <= r + 1e-9
            best = max(best, v[pts].sum() / pts.sum())
        assert got[j] == pytest.approx(best, rel=1e-12)
        # the spike mass over the ball length, up to one cell of counting slack
        dist = abs(g.torus_delta(4.0, x[j]))
        expect = max((1.0 / (2 * r) if dist <= r else 0.0) for r in (1.0, 2.0, 4.0))
        assert got[j] == pytest.approx(expect, rel=0.02)


def test_smooth_majorant_constant():
    g = Grid(1, 256, 8.0)
    out = smooth_majorant(_w(g, np.full(256, 2.0)), 2).values.real
    np.testing.assert_allclose(out, 2.0 * psi_integral(2, 1), rtol=1e-6)


def test_local_sup_plateau():
    g = Grid(1, 256, 8.0)
    v = np.zeros(256)
    v[128] = 1.0
    plateau = max_over_ball(v, g, 1.0)
    assert np.count_nonzero(plateau) == 2 * int(round(1.0 / g.spacing)) + 1


def test_psi_kernel_integrates():
    for N in (1.5, 2, 3, 10):
        g = Grid(1, 512, 4.0)
        assert g.spacing * psi_kernel(g, N).sum() == pytest.approx(psi_integral(N, 1), rel=1e-8)
    g2 = Grid(2, 64, 8.0)
    assert g2.cell_volume * psi_kernel(g2, 3).sum() == pytest.approx(psi_integral(3, 2), rel=2e-3)


def test_band_majorant_reduces_at_R1():
    g = Grid(1, 256, 8.0)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, 2)
    np.testing.assert_allclose(band_majorant(w, 0.5, 0.0, 1.0, 2).values, smooth_majorant(w, 2).values,
                               rtol=1e-12)


def test_band_majorant_R_independent_for_constant():
    g = Grid(1, 1024, 8.0)
    vals = [band_majorant(_w(g, np.ones(1024)), 0.5, 0.0, R, 2).values.real.mean() for R in (1.0, 4.0, 16.0)]
    for v in vals:
        assert v == pytest.approx(psi_integral(2, 1), rel=0.01)


@pytest.mark.parametrize("seed", range(10))
def test_scaling_identity(seed):
    g = Grid(1, 512, 8.0)
    R, rho = 16.0, 0.5
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {"sigma": 1.0}}, seed)
    lhs = smooth_majorant(rescale_weight(w, R, rho), 2).values.real * R ** (rho * g.dim)
    rhs = band_majorant(w, rho, 0.0, R, 2).values.real
    assert np.max(np.abs(lhs / rhs - 1)) <= 0.02


def test_domination_cases():
    g = Grid(1, 256)
    np.testing.assert_allclose(power_maximal(_w(g, np.arange(1, 257.0)), 1.0).values,
                               hl_maximal(_w(g, np.arange(1, 257.0))).values)
    assert check_domination(_w(g, np.ones(256)), 0.5, -0.25).passed
    spike = _w(g, _spike(g))
    rep = check_domination(spike, 0.5, -0.25)
    assert rep.passed and rep.s == pytest.approx(1.0)


def test_domination_lognormal_corpus():
    g = Grid(1, 256)
    for j, d in enumerate(standard_weight_descriptors(0)):
        assert check_domination(make_corpus_weight(g, d, 0, j), 0.5, -0.25).passed


def test_ap_rh_constant_weight():
    g = Grid(1, 128)
    w = _w(g, np.ones(128))
    assert ap_characteristic(w, 2.0) == pytest.approx(1.0)
    assert rh_constant(w, 2.0) == pytest.approx(1.0)


def test_ap_power_weights():
    g = Grid(1, 512)
    good = make_corpus_weight(g, {"kind": "power", "params": {"exponent": 0.5}})
    assert np.isfinite(ap_characteristic(good, 2.0))
    vals = []
    for n in (256, 512, 1024):
        gn = Grid(1, n)
        r = np.maximum(np.abs(gn.torus_delta(gn.axis(), 0.0)), gn.spacing / 2)
        vals.append(ap_characteristic(make_weight(gn, r**-1.5, 1e-3), 2.0))
    assert vals[2] > 2 * vals[0]


@given(st.floats(0.01, 100.0), st.integers(0, 1000))
def test_maximal_is_homogeneous(c, seed):
    g = Grid(1, 64)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, seed)
    np.testing.assert_allclose(hl_maximal(w.scaled(c)).values, c * hl_maximal(w).values, rtol=1e-10)


@given(st.integers(0, 1000), st.floats(0.0, 3.0))
def test_maximal_is_monotone(seed, bump):
    g = Grid(1, 64)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, seed)
    w2 = make_weight(g, w.values.real + bump * (np.arange(64) % 5 == 0))
    assert np.all(hl_maximal(w2).values.real >= hl_maximal(w).values.real * (1 - 1e-12))
    assert np.all(smooth_majorant(w2, 2).values.real >= smooth_majorant(w, 2).values.real * (1 - 1e-12))


@given(st.integers(0, 63), st.integers(0, 1000))
def test_maximal_translation_covariant(shift, seed):
    g = Grid(1, 64)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, seed)
    rolled = Weight(Field(g, np.roll(w.values.real, shift)), w.floor)
    np.testing.assert_allclose(hl_maximal(rolled).values.real, np.roll(hl_maximal(w).values.real, shift),
                               rtol=1e-12)
