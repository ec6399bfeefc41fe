import numpy as np
import pytest

from pdoweights.corpus import (CORPUS_VERSION, FUNCTION_KINDS, WEIGHT_KINDS, corpus_document, lognormal_descriptors,
                               make_corpus_weight, make_function, standard_function_descriptors,
                               standard_weight_descriptors, weight_values)
from pdoweights.grid import Grid, GridError


def test_standard_corpus_shape():
    doc = corpus_document(0, 10)
    assert doc["version"] == CORPUS_VERSION
    assert len(doc["weights"]) == 10 and len(doc["functions"]) == 10
    assert {d["kind"] for d in doc["weights"]} == set(WEIGHT_KINDS)
    assert {d["kind"] for d in doc["functions"]} == set(FUNCTION_KINDS)


def test_corpus_is_seeded():
    g = Grid(1, 128)
    for j, d in enumerate(lognormal_descriptors(4, 3)):
        a = make_corpus_weight(g, d, 4, j).values
        b = make_corpus_weight(g, d, 4, j).values
        assert np.array_equal(a, b)
    assert not np.array_equal(make_corpus_weight(g, lognormal_descriptors(0, 1)[0]).values,
                              make_corpus_weight(g, lognormal_descriptors(1, 1)[0]).values)


def test_members_resample_same_object():
    # every descriptor is physical, so a coarse grid is a subsample of a fine one
    for d in standard_weight_descriptors(0) + standard_function_descriptors(0):
        coarse, fine = Grid(1, 128), Grid(1, 256)
        if d["kind"] in WEIGHT_KINDS:
            a, b = weight_values(coarse, d), weight_values(fine, d)[::2]
            if d["kind"] in ("spike", "indicator", "power"):
                continue  # edge cells / the h/2 clamp depend on the spacing
        else:
            a, b = make_function(coarse, d).values, make_function(fine, d).values[::2]
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)


def test_bad_descriptors():
    g = Grid(1, 64)
    with pytest.raises(GridError):
        weight_values(g, {"kind": "unknown"})
    with pytest.raises(GridError):
        weight_values(g, {"kind": "power", "params": {"exponent": -1.0}})
    with pytest.raises(GridError):
        make_function(g, {"kind": "band-limited", "params": {"band": [0, 1e4]}})
    with pytest.raises(GridError):
        make_function(g, {"kind": "mode", "params": {"k": 40}})


def test_floor_is_positive():
    g = Grid(1, 64)
    w = make_corpus_weight(g, {"kind": "indicator", "params": {}})
    assert w.values.real.min() > 0
