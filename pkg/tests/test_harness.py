import json
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdoweights.corpus import make_corpus_weight, make_function
from pdoweights.grid import Field, Grid
from pdoweights.harness import (RUNNERS, THREADS_ENV, ConfigError, SweepConfig, _pmap, lemma_poly_growth,
                                lemma_w_le_Aw, majorant_chain, psi_conv_constant, verify_main_theorem,
                                verify_m8, verify_origin_part, verify_psi_lemmas, weighted_ratio)
from pdoweights.maximal import Weight, hl_maximal, make_weight
from pdoweights.symbols import make_builtin_symbol

OSC = {"kind": "multiplier_oscillatory", "params": {"a_exp": 0.5, "m": -0.25}}


def _cfg(**kw):
    base = dict(symbols=[{"kind": "constant", "params": {}}], sizes=(64, 128), corpus_size=4)
    base.update(kw)
    return SweepConfig(**base)


def _members(g, seed=0):
    f = make_function(g, {"kind": "band-limited", "params": {"band": [0, 40]}}, seed)
    w = make_corpus_weight(g, {"kind": "random-lognormal", "params": {}}, seed)
    return f, w


def test_identity_ratios():
    g = Grid(1, 128)
    f, w = _members(g)
    assert weighted_ratio(None, f, w, w).ratio == pytest.approx(1.0)
    assert weighted_ratio(make_builtin_symbol("constant"), f, w, hl_maximal(w)).ratio <= 1.0


def test_main_chain_sweep_25_members():
    g = Grid(1, 128)
    sym = make_builtin_symbol("bessel", {"m": -0.25})
    ratios = []
    for j in range(5):
        f = make_function(g, {"kind": "band-limited", "params": {"band": [0, 40]}}, j)
        w = make_corpus_weight(g, {"kind": "spike", "params": {"center": 0.1 + 0.2 * j}})
        maj = majorant_chain(w, "main", 0.5, -0.25)
        for k in range(5):
            ratios.append(weighted_ratio(sym, f * (k + 1), w, maj).ratio)
    assert len(ratios) == 25 and np.all(np.isfinite(ratios)) and max(ratios) < 1


def test_config_validation():
    with pytest.raises(ConfigError):
        _cfg(weights=[{"kind": "constant"}] * 2)
    with pytest.raises(ConfigError):
        _cfg(sizes=())
    with pytest.raises(ConfigError):
        majorant_chain(make_weight(Grid(1, 16), np.ones(16)), "nope")
    with pytest.raises(ConfigError):
        verify_m8(_cfg(symbols=[{"kind": "bessel", "params": {"m": 0.5}}]))


def test_config_round_trip():
    cfg = _cfg(params={"band": [0, 30]})
    back = SweepConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()


def test_constant_symbol_sweep():
    rs = verify_main_theorem(_cfg())
    assert rs.passed
    assert rs.sup_ratio() <= 1 + 1e-9


def test_oscillatory_sweep_refinement():
    rs = verify_main_theorem(_cfg(symbols=[OSC], sizes=(256, 512)))
    assert rs.passed
    sup = rs.summary["multiplier_oscillatory(a_exp=0.5,m=-0.25)"]["sup_ratio"]
    assert max(sup.values()) / min(sup.values()) <= 2


def test_spike_member_finite():
    rs = verify_main_theorem(_cfg(symbols=[OSC], corpus_size=3, sizes=(128,)))
    spikes = [r for r in rs.reports if r.params["weight"]["kind"] == "spike"]
    assert spikes and all(np.isfinite(r.ratio) for r in spikes)


def test_m8_unweighted_collapse():
    cfg = _cfg(symbols=[{"kind": "bessel", "params": {"m": 0.0}}], weights=[{"kind": "constant"}] * 3)
    rs = verify_m8(cfg)
    for r in rs.reports[:3]:
        assert r.ratio == pytest.approx(1.0, rel=1e-6)


def test_origin_part_kills_high_frequencies():
    cfg = _cfg(symbols=[OSC], length=8.0, sizes=(256,),
               functions=[{"kind": "mode", "params": {"k": k}} for k in (8, 9, 10)])
    rs = verify_origin_part(cfg)
    assert max(r.lhs for r in rs.reports) < 1e-20


def test_lemma_suites():
    cfg = _cfg(corpus_size=6)
    assert lemma_w_le_Aw(cfg).passed
    assert lemma_poly_growth(cfg, ells=(-1.0, 1.0)).passed


def test_psi_lemmas():
    good = verify_psi_lemmas(N=2)
    assert good.passed
    bad = verify_psi_lemmas(N=1)
    assert not bad.passed
    assert any("conv" in c.name for c in bad.failures())
    assert np.isfinite(psi_conv_constant(2, 1.0, 1.0, 16.0))


def test_runner_registry():
    assert {"thm-main", "cor-m8", "prop-origin", "thm-dyadic", "prop-s000", "eq-domination", "prop-lp",
            "compose", "kernel-decay", "cotlar", "lem-psi"} <= set(RUNNERS)


def test_pmap_order(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert _pmap(lambda x: x * x, list(range(20))) == [x * x for x in range(20)]


def test_sweep_is_deterministic(monkeypatch):
    a = verify_main_theorem(_cfg(symbols=[OSC])).to_json()
    monkeypatch.setenv(THREADS_ENV, "4")
    b = verify_main_theorem(_cfg(symbols=[OSC])).to_json()
    assert a == b


@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0), st.integers(0, 100))
def test_ratio_scale_invariance(cw, cf, seed):
    g = Grid(1, 64)
    f, w = _members(g, seed)
    sym = make_builtin_symbol("multiplier_oscillatory", {"a_exp": 0.5, "m": -0.25})
    r0 = weighted_ratio(sym, f, w, majorant_chain(w, "m8")).ratio
    w2 = w.scaled(cw)
    r1 = weighted_ratio(sym, cf * f, w2, majorant_chain(w2, "m8")).ratio
    assert r1 == pytest.approx(r0, rel=1e-9)


@given(st.integers(0, 63), st.integers(0, 100))
def test_ratio_translation_covariance(shift, seed):
    g = Grid(1, 64)
    f, w = _members(g, seed)
    sym = make_builtin_symbol("bessel", {"m": -1})
    r0 = weighted_ratio(sym, f, w, majorant_chain(w, "M")).ratio
    w2 = Weight(Field(g, np.roll(w.values.real, shift)), w.floor)
    r1 = weighted_ratio(sym, f.roll(shift), w2, majorant_chain(w2, "M")).ratio
    assert r1 == pytest.approx(r0, rel=1e-9)
