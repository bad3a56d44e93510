import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffko.cech import (ClnBundleData, Cochain, Cover, DifferentialCocycle, FormEntry, Gluing, _erf_phi,
                          _uniform_bundle, assemble_cocycle, closed_form_cocycle, cocycle_from_json,
                          cocycle_to_json, global_cocycle, slice_cocycle, suspension_cocycle,
                          suspension_concordance, total_cs, total_differential, validate_all, validate_bundle,
                          validate_differential_cocycle)
from cliffko.errors import InvalidConcordance, NotACover, ParseError
from cliffko.forms import CoeffFn, DifferentialForm, d_exterior, mathai_quillen, random_form
from cliffko.superconn import flat, suspension, suspension_module

seeds = st.integers(0, 2 ** 32 - 1)


def test_cover_nerve_and_components():
    cov = Cover(1, [[((-1, 1),)], [((None, 0),), ((0, None),)]])
    assert cov.nerve == [(0,), (1,), (0, 1)]
    assert len(cov.components((1,))) == 2
    assert len(cov.components((0, 1))) == 2
    assert cov.parent((1,), (0, 1), 1) == 1
    assert cov.anchor((0, 1), 0) == [-1.0]
    with pytest.raises(NotACover):
        Cover(1, [[]])
    with pytest.raises(ParseError):
        Cover.from_json({"dim": 1})


def test_suspension_cocycle_validates():
    D = suspension_cocycle(1)
    assert D.global_form == mathai_quillen(1)
    rep = validate_all(D)
    assert rep.passed, [r.to_json() for r in rep.failures()]
    names = {r.name for r in rep.records}
    assert {"determines_chern", "compatible_chern", "global_closed", "d_plus_delta_closed"} <= names


def test_erf_phi_derivative():
    assert d_exterior(_erf_phi(1, -1)) == mathai_quillen(1)
    assert d_exterior(_erf_phi(1, 1)) == mathai_quillen(1)


def test_mutation_fails_compatibility():
    D = suspension_cocycle(1)
    D.phis[(1, 0)] = DifferentialForm(1)
    rep = validate_differential_cocycle(D)
    assert "compatible_chern" in rep.failed_names()


def test_closed_form_cocycle_passes():
    phi = DifferentialForm.basis(2, [0], CoeffFn.const(2, 3)) + DifferentialForm.basis(2, [1])
    D = closed_form_cocycle(phi)
    assert D.global_form.is_zero()
    assert validate_all(D).passed


def test_single_patch_is_chern():
    D = global_cocycle(suspension(1))
    C = assemble_cocycle(D.bundle, D)
    assert C.entry((0,), 0).exact == mathai_quillen(1)
    assert C.closedness().passed


def test_identical_data_gives_zero_cs():
    cov = Cover(1, [[((-2, 1),)], [((-1, 2),)]])
    B = _uniform_bundle(cov, [True, True], suspension_module())
    A = suspension(1)
    C = assemble_cocycle(B, {k: A for k in cov.keys()})
    assert C.entry((0, 1), 0).exact == DifferentialForm(1)


def _reversed_suspension():
    cov = Cover(1, [[((None, 0),), ((0, None),)], [((-1, 1),)]])
    B = _uniform_bundle(cov, [False, True], suspension_module())
    A = suspension(1)
    superconns = {k: (A if B.module(*k).dim else flat(1, B.module(*k))) for k in cov.keys()}
    phis = {(0, 0): _erf_phi(1, -1), (0, 1): _erf_phi(1, 1), (1, 0): DifferentialForm(1)}
    return DifferentialCocycle(B, superconns, phis, mathai_quillen(1))


def test_reordering_flips_cs_sign():
    D, R = suspension_cocycle(1), _reversed_suspension()
    assert validate_all(R).passed
    a = assemble_cocycle(D.bundle, D)
    b = assemble_cocycle(R.bundle, R)
    for c in range(2):
        x = D.cover.interior_point((0, 1), c)
        va, vb = a.entry((0, 1), c).evaluate(x), b.entry((0, 1), c).evaluate(x)
        assert abs(va.get((), 0) + vb.get((), 0)) < 1e-12
        assert abs(va.get((), 0)) > 1e-3


def test_bundle_checks_catch_bad_gluing():
    D = suspension_cocycle(1)
    B = D.bundle
    key = next(k for k, gl in B.gluings.items() if gl.e is not None)
    bad = dict(B.gluings)
    bad[key] = Gluing(B.gluings[key].g, B.gluings[key].e.scale(2))
    rep = validate_bundle(ClnBundleData(B.cover, B.modules, bad))
    assert "witness_involution" in rep.failed_names()


def test_suspension_two():
    D = suspension_cocycle(2)
    assert D.global_form == mathai_quillen(2)
    assert validate_differential_cocycle(D, samples=3).passed


def test_concordance_total_cs_vanishes():
    D = suspension_concordance()
    assert validate_all(D).passed
    assert total_cs(D) == DifferentialForm(1)
    start, end = slice_cocycle(D, 0), slice_cocycle(D, 1)
    assert validate_all(start).passed and validate_all(end).passed
    assert start.global_form == mathai_quillen(1)


def test_product_concordance_has_zero_total_cs():
    A = suspension(2, axis=0)
    D = global_cocycle(A)
    assert total_cs(D) == DifferentialForm(1)


def test_total_cs_rejects_invalid():
    D = suspension_concordance()
    D.phis[(1, 0)] = DifferentialForm(2)
    with pytest.raises(InvalidConcordance):
        total_cs(D)


def test_json_roundtrip():
    D = suspension_cocycle(1)
    data = json.loads(json.dumps(cocycle_to_json(D)))
    back = cocycle_from_json(data)
    assert back.global_form == D.global_form
    assert validate_all(back).passed
    with pytest.raises(ParseError):
        cocycle_from_json({"schema": "other"})


THREE = Cover(1, [[((-3, 1),)], [((-1, 2),)], [((0, 3),)]])


@given(seeds)
def test_total_differential_squares_to_zero(seed):
    rng = np.random.default_rng(seed)
    entries = {k: FormEntry.of(random_form(rng, 1)) for k in THREE.keys()}
    C = Cochain(THREE, entries)
    DD = total_differential(total_differential(C))
    assert all(e.exact.is_zero() for e in DD.entries.values())


@settings(max_examples=20)
@given(seeds)
def test_assembled_cocycles_are_closed(seed):
    # random self-adjoint data on three overlapping patches with a common fiber
    from cliffko.superconn import random_superconnection
    rng = np.random.default_rng(seed)
    M = suspension_module()
    B = _uniform_bundle(THREE, [True, True, True], M)
    As = [random_superconnection(rng, 1, M, degrees=(1,)) for _ in range(3)]
    superconns = {}
    for sigma, c in THREE.keys():
        superconns[(sigma, c)] = As[sigma[0]]
    C = assemble_cocycle(B, superconns)
    assert C.closedness().passed
