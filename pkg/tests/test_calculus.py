import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdoweights.calculus import (MAX_BLOCKS, build_S_blocks, compose_cutoff, default_grid, error_kernel_decay,
                                 phi_hat, schur_bound, schur_condition_constant, verify_error_decay)
from pdoweights.corpus import lognormal_descriptors, make_corpus_weight
from pdoweights.grid import Grid, GridError
from pdoweights.maximal import smooth_majorant
from pdoweights.operators import opnorm_2, pdo_kernel
from pdoweights.symbols import make_builtin_symbol

L8 = 8.0


def _sym(kind, params=None, length=L8):
    return make_builtin_symbol(kind, params or {}, length=length)


def test_phi_hat_shape():
    r = np.array([0.0, 0.4, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
    v = phi_hat(r)
    assert v[0] == 0 and v[1] == 0 and v[3] == 1 and v[4] == 1 and v[5] == 1 and v[6] == 0 and v[7] == 0


def test_nyquist_guard():
    with pytest.raises(GridError):
        compose_cutoff(_sym("bessel", length=1.0), 100, 1, Grid(1, 64))


@pytest.mark.parametrize("kind,params", [
    ("constant", {}), ("bessel", {"m": -1}), ("multiplier_oscillatory", {"a_exp": 0.5, "m": -0.25}),
    ("x_modulated", {}), ("phase_modulated", {"delta": 0.5}), ("separable", {}), ("s000", {}),
])
@pytest.mark.parametrize("R", [8, 16])
def test_operator_identity(kind, params, R):
    res = compose_cutoff(_sym(kind, params), R, 1, Grid(1, 256, L8), n_fields=4)
    assert res.identity_error <= 1e-8


@pytest.mark.parametrize("kind,params", [("bessel", {"m": 0}), ("bessel", {"m": -1}),
                                         ("multiplier_oscillatory", {"a_exp": 0.5})])
def test_multiplier_error_vanishes(kind, params):
    res = compose_cutoff(_sym(kind, params), 8, 1, Grid(1, 256, L8), check_identity=False)
    assert res.sup_error() <= 1e-10


def test_higher_order_expansion_is_smaller():
    g = Grid(1, 512, L8)
    a = _sym("x_modulated")
    e1 = compose_cutoff(a, 16, 1, g, check_identity=False).sup_error()
    e3 = compose_cutoff(a, 16, 3, g, check_identity=False).sup_error()
    assert e3 < e1


def test_phase_modulated_identity_R8():
    res = compose_cutoff(_sym("phase_modulated", {"delta": 0.5}), 8, 2, Grid(1, 512, L8))
    assert res.identity_error <= 1e-8


def test_error_decay_oracles():
    g = Grid(1, 512, L8)
    vac = verify_error_decay(_sym("bessel", {"m": -1}), grid=g)
    assert vac.vacuous and vac.passed
    rep = verify_error_decay(_sym("x_modulated"), (8, 16, 32, 64), N=1, epsilon=0.5, grid=g)
    assert rep.slope <= -0.3 and rep.passed
    assert rep.monotone


def test_error_decay_needs_large_N():
    with pytest.raises(ValueError):
        verify_error_decay(_sym("phase_modulated", {"delta": 0.5}), N=1, grid=Grid(1, 512, L8))


def test_error_kernel_decay():
    g = Grid(1, 512, L8)
    a = _sym("x_modulated")
    consts = [error_kernel_decay(compose_cutoff(a, R, 2, g, check_identity=False), 0.0) for R in (8, 32)]
    assert all(np.isfinite(consts))
    assert max(consts) / min(consts) <= 3
    zero = error_kernel_decay(compose_cutoff(_sym("bessel", {"m": -1}), 8, 2, g, check_identity=False), 2.0)
    assert zero <= 1e-9
    with pytest.raises(ValueError):
        error_kernel_decay(compose_cutoff(a, 8, 1, g, check_identity=False), 0.0)


def test_default_grid():
    g = default_grid(_sym("bessel"), 64)
    assert g.nyquist >= 3 * 64 and g.n >= 256


def test_schur_identity_and_diagonal():
    g = Grid(1, 64)
    ident = pdo_kernel(make_builtin_symbol("constant"), g)
    assert schur_bound(ident, np.ones(64), np.ones(64)) == pytest.approx(1.0, rel=1e-9)
    d = np.linspace(-3, 2, 10)
    assert schur_bound(np.diag(d), np.ones(10), np.ones(10)) == pytest.approx(3.0)


@given(st.integers(0, 2**20), st.integers(3, 30))
def test_schur_dominates_svd(seed, n):
    rng = np.random.default_rng(seed)
    K = rng.uniform(0, 1, (n, n))
    h = rng.uniform(0.5, 2.0, n)
    assert schur_bound(K, h, h) >= np.linalg.svd(K, compute_uv=False)[0] * (1 - 1e-12)


def test_schur_bounds_kernel_operator():
    g = Grid(1, 128, 2.0)
    K = pdo_kernel(make_builtin_symbol("bessel", {"m": -2}, length=2.0), g)
    assert schur_bound(K, np.ones(128), np.ones(128)) >= opnorm_2(K.as_operator_matrix()) * (1 - 1e-12)


@pytest.fixture(scope="module")
def blocks():
    g = Grid(1, 256, L8)
    w = make_corpus_weight(g, lognormal_descriptors(0, 1)[0])
    return build_S_blocks(_sym("s000", {"xi_cutoff": 2.0}), w)


def test_blocks_telescoping_and_disjoint(blocks):
    assert blocks.telescoping_error <= 1e-8
    assert blocks.disjoint_max <= 1e-10
    assert blocks.dense_check_error <= 1e-8


def test_blocks_decay_and_cotlar(blocks):
    assert blocks.decay_exponent <= -2
    assert np.isfinite(blocks.opnorm) and blocks.opnorm <= blocks.cotlar_bound
    assert np.isfinite(blocks.schur_constant)


def test_block_guards():
    g = Grid(1, 256, L8)
    w = make_corpus_weight(g, lognormal_descriptors(0, 1)[0])
    with pytest.raises(MemoryError):
        build_S_blocks(_sym("s000"), w)
    with pytest.raises(GridError):
        build_S_blocks(_sym("s000", length=1.0), make_corpus_weight(Grid(1, 64), lognormal_descriptors(0, 1)[0]))
    assert MAX_BLOCKS > 0


def test_schur_condition_constant_finite():
    g = Grid(1, 256, L8)
    w = make_corpus_weight(g, lognormal_descriptors(0, 1)[0])
    Aw = smooth_majorant(w, 2).values.real
    c = schur_condition_constant(Aw, g, 4)
    assert np.isfinite(c) and c > 0
