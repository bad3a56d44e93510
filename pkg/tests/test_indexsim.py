from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffko.errors import DegenerateAtEndpoint, EmptyOverlap, NotACover, NotEquivariant, ParseError
from cliffko.indexsim import (OperatorFamily, compare_cutoffs, crossing_family, cutoff_bundle, cutoff_module,
                              family_from_json, gluing_data, index_cocycle, numeric_gluing_residuals,
                              projected_connection, six_dim_family, spectral_cover, validate_index_cocycle)
from cliffko.scalars import Scalar
from cliffko.superconn import suspension_module

F = Fraction


def test_crossing_spectral_cover():
    fam = crossing_family()
    (reg,) = spectral_cover(fam, [1])
    assert len(reg.intervals) == 3
    lo, mid, hi = reg.intervals
    assert lo[0] == -2 and hi[1] == 2
    assert abs(float(lo[1]) + 1) < 1e-8 and abs(float(mid[1]) - 1) < 1e-8
    ranks = [b.rank for b in cutoff_bundle(fam, 1, reg)]
    assert ranks == [0, 2, 0]


def test_constant_family_has_single_component():
    M = suspension_module()
    fam = OperatorFamily((F(-1), F(1)), M, [[[0], [3]], [[3], [0]]])
    assert fam.check() == []
    (reg,) = spectral_cover(fam, [1])
    assert reg.intervals == [(F(-1), F(1))]
    assert cutoff_bundle(fam, 1, reg)[0].rank == 0
    assert cutoff_bundle(fam, 10, reg)[0].rank == 2


def test_zero_family_cover_is_everything():
    M = suspension_module()
    fam = OperatorFamily((F(0), F(1)), M, [[[0], [0]], [[0], [0]]])
    (reg,) = spectral_cover(fam, [F(1, 2)])
    assert reg.intervals == [(F(0), F(1))]
    Mod, B, basis = cutoff_module(fam, F(1, 2), (F(0), F(1)))
    assert Mod.dim == 2


def test_witness_squares_to_complement_projector():
    fam = crossing_family()
    g, e, small, big = gluing_data(fam, F(1, 2), 2, (F(3, 4), F(5, 4)))
    assert small.dim == 0 and big.dim == 2
    assert (e @ e).entries == {(0, 0): Scalar.const(1), (1, 1): Scalar.const(1)}
    res = numeric_gluing_residuals(fam, F(1, 2), 2, (F(3, 4), F(5, 4)))
    assert max(res.values()) < 1e-10


def test_equal_cutoffs_give_identity():
    fam = crossing_family()
    g, e, small, big = gluing_data(fam, 1, 1, (F(-1, 2), F(1, 2)))
    assert e is None
    assert small.dim == big.dim == 2
    assert g.to_numpy().real.tolist() == np.eye(2).tolist()


def test_inclusions_compose():
    fam = six_dim_family()
    iv = (F(1, 10), F(1, 5))  # eigenvalues near 0.81, 1.21 and 4
    g12, _, _, _ = gluing_data(fam, 1, F(3, 2), iv)
    g23, _, _, _ = gluing_data(fam, F(3, 2), 5, iv)
    g13, _, _, _ = gluing_data(fam, 1, 5, iv)
    assert (g23 @ g12) == g13


def test_compare_cutoffs_crossing():
    results = compare_cutoffs(crossing_family(), [F(1, 2), 2], [1])
    assert results and all(ok for _, ok in results)


def test_index_cocycle_crossing_validates():
    ic = index_cocycle(crossing_family(), [F(1, 2), 2])
    rep = validate_index_cocycle(ic)
    assert rep.passed, [r.to_json() for r in rep.failures()]


def test_six_dim_gluing_residuals():
    fam = six_dim_family()
    ic = index_cocycle(fam, [F(1, 4), 1, F(9, 4)])
    worst = 0.0
    for sigma, tau, c in ic.bundle.pairs():
        lam_s = max(ic.lams[i] for i in sigma)
        lam_t = max(ic.lams[i] for i in tau)
        lo, hi = ic.bundle.cover.components(tau)[c][0][0]
        worst = max(worst, *numeric_gluing_residuals(fam, lam_s, lam_t, (lo, hi)).values())
    assert worst <= 1e-10


def test_projected_connection_superdimension_vanishes():
    fam = crossing_family()
    (reg,) = spectral_cover(fam, [1])
    for pc in projected_connection(fam, 1, reg):
        assert pc.superdimension == Scalar.const(0)
        for A in pc.connection:
            assert np.max(np.abs(A)) < 1e-6


def test_degenerate_endpoint():
    with pytest.raises(DegenerateAtEndpoint):
        spectral_cover(crossing_family(), [4])


def test_empty_overlap():
    with pytest.raises(EmptyOverlap):
        gluing_data(crossing_family(), 1, 2, (F(1), F(1)))


def test_not_a_cover():
    with pytest.raises(NotACover):
        index_cocycle(crossing_family(), [1])


def test_family_json_roundtrip_and_errors():
    fam = crossing_family()
    back = family_from_json(fam.to_json())
    assert back.coeffs == fam.coeffs and back.interval == fam.interval
    bad = fam.to_json()
    bad["matrix"] = [[["1"], ["0"]], [["0"], ["1"]]]
    with pytest.raises(NotEquivariant):
        family_from_json(bad)
    with pytest.raises(ParseError):
        family_from_json({"interval": [0, 1]})


@settings(max_examples=12)
@given(st.integers(1, 6), st.integers(-3, 3), st.integers(1, 5))
def test_linear_families_glue(slope, shift, mu):
    # D(b) = (slope b + shift) e, cutoffs chosen away from the endpoints
    M = suspension_module()
    fam = OperatorFamily((F(-1), F(1)), M, [[[0], [shift, slope]], [[shift, slope], [0]]])
    lams = [F(1, 7), F(mu) + F(1, 3), F(100)]
    ic = index_cocycle(fam, lams)
    rep = validate_index_cocycle(ic, samples=2)
    assert rep.passed
