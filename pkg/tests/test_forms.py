from fractions import Fraction
from math import erf, pi, sqrt

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cliffko.errors import NonCentralBody, NotAntisymmetric, NotIntegrable
from cliffko.forms import (CoeffFn, DifferentialForm, EndValuedForm, a_hat, d_exterior, exp_central, exp_numeric,
                           form_from_json, form_to_json, integrate_full, integrate_numeric,
                           log_x_over_sinh_coeffs, mathai_quillen, random_form)
from cliffko.scalars import Scalar
from cliffko.superconn import suspension
from cliffko.superlinear import SuperMap, SuperVectorSpace

P = Scalar.monomial(1, p=1)
SQRT2 = Scalar.sqrt2_power(1)
seeds = st.integers(0, 2 ** 32 - 1)


def test_d_examples():
    x = DifferentialForm.function(CoeffFn.coordinate(1, 0))
    assert d_exterior(x) == DifferentialForm.basis(1, [0])
    g = DifferentialForm.function(CoeffFn.gaussian(1, [1]))
    assert d_exterior(g) == DifferentialForm.basis(1, [0], CoeffFn.monomial(1, [1], [1], -2))
    phi = DifferentialForm.function(CoeffFn.erf_atom(1, 0, 1, -1, SQRT2))
    assert d_exterior(phi) == mathai_quillen(1)


def test_erf_numeric_value():
    f = CoeffFn.erf_atom(1, 0, 1, -1)
    for x in (-1.5, 0.0, 0.7):
        assert abs(f.evaluate_real([x]) - sqrt(pi) / 2 * (1 + erf(x))) < 1e-12


def test_integration_examples():
    assert integrate_full(mathai_quillen(1)) == SQRT2 * P
    xg = DifferentialForm.basis(1, [0], CoeffFn.monomial(1, [1], [1]))
    assert integrate_full(xg) == Scalar.const(0)
    x2g = DifferentialForm.basis(1, [0], CoeffFn.monomial(1, [2], [1]))
    assert integrate_full(x2g) == Scalar.monomial(Fraction(1, 2), p=1)
    # oracle: numeric quadrature with p -> sqrt(pi)
    assert abs(integrate_numeric(x2g) - sqrt(pi) / 2) < 1e-12


def test_integration_errors():
    with pytest.raises(NotIntegrable):
        integrate_full(DifferentialForm.basis(1, [0], CoeffFn.const(1)))
    with pytest.raises(NotIntegrable):
        integrate_full(DifferentialForm.basis(1, [0], CoeffFn.erf_atom(1, 0)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_mathai_quillen_normalization(n):
    U = mathai_quillen(n)
    assert U[tuple(range(n))] == CoeffFn.gaussian(n, [1] * n, Scalar.sqrt2_power(n))
    two_pi_half = Scalar.sqrt2_power(n) * Scalar.monomial(1, p=n)
    assert integrate_full(U) * two_pi_half.inv() == Scalar.const(1)


def test_mathai_quillen_two():
    assert mathai_quillen(2) == DifferentialForm.basis(2, [0, 1], CoeffFn.gaussian(2, [1, 1], 2))


def test_exp_central_suspension_has_two_terms():
    X = suspension(1).curvature().scale(-1)
    E = exp_central(X)
    assert set(E.comps) == {(), (0,)}
    assert E.comps[()] == {(0, 0): CoeffFn.gaussian(1, [1]), (1, 1): CoeffFn.gaussian(1, [1])}


def test_exp_central_trivial_cases():
    V = SuperVectorSpace(1, 1)
    assert exp_central(EndValuedForm.zero(2, V)) == EndValuedForm.identity(2, V)
    T = SuperMap.identity(V)
    X = EndValuedForm.from_map(2, T, idx=(0, 1))
    assert exp_central(X) == EndValuedForm.identity(2, V) + X


def test_exp_central_rejects_noncentral():
    V = SuperVectorSpace(2, 0)
    X = EndValuedForm.from_map(1, SuperMap.from_dense([[1, 0], [0, 2]], V))
    with pytest.raises(NonCentralBody):
        exp_central(X)
    got = exp_numeric(X, [0.3])[()]
    assert np.allclose(got, np.diag([np.e, np.e ** 2]), atol=1e-12)


def test_exp_numeric_matches_exp_central():
    X = suspension(1).curvature().scale(-1)
    E = exp_central(X)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-2, 2, size=10):
        num = exp_numeric(X, [x])
        ex = E.evaluate([x])
        for idx in set(num) | set(ex):
            a = num.get(idx, 0)
            b = ex.get(idx, 0)
            assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= 1e-10


def _block(dim, form):
    z = DifferentialForm(dim)
    return [[z, form], [-form, z]]


def test_a_hat_trivial_and_two_dim():
    z = DifferentialForm(4)
    assert a_hat([[z, z], [z, z]], 4) == DifferentialForm.const(4)
    w = DifferentialForm.basis(2, [0, 1])
    assert a_hat(_block(2, w), 2) == DifferentialForm.const(2)
    with pytest.raises(NotAntisymmetric):
        a_hat([[z, DifferentialForm.basis(4, [0, 1])], [z, z]], 4)


def _sympy_xsin_coeffs(order):
    # independent oracle: for a 2x2 block with eigenvalues +-i u w, det^(1/2)(uR/sinh uR) = uw / sin(uw)
    x = sympy.symbols("x")
    ser = sympy.series(x / sympy.sin(x), x, 0, 2 * order + 2).removeO()
    return [Fraction(str(ser.coeff(x, 2 * k))) for k in range(order + 1)]


def _block_diag(dim, blocks):
    n = 2 * len(blocks)
    z = DifferentialForm(dim)
    R = [[z] * n for _ in range(n)]
    for k, w in enumerate(blocks):
        R[2 * k][2 * k + 1] = w
        R[2 * k + 1][2 * k] = -w
    return R


def test_a_hat_against_series_oracle():
    c = _sympy_xsin_coeffs(2)
    # one block with w = dx0dx1 + dx2dx3 on R^4: w^2 = 2 dx0123
    w = DifferentialForm.basis(4, [0, 1]) + DifferentialForm.basis(4, [2, 3])
    want = DifferentialForm.const(4) + DifferentialForm.basis(4, [0, 1, 2, 3]).scale(Scalar.u_power(4, 2 * c[1]))
    assert a_hat(_block_diag(4, [w]), 4) == want
    # two blocks on R^4 with square-zero 2-forms: all corrections vanish
    blocks = [DifferentialForm.basis(4, [0, 1]), DifferentialForm.basis(4, [2, 3])]
    assert a_hat(_block_diag(4, blocks), 4) == DifferentialForm.const(4)
    # two blocks on R^8, each w_k^2 = 2 vol_k: the product of the block series
    w1 = DifferentialForm.basis(8, [0, 1]) + DifferentialForm.basis(8, [2, 3])
    w2 = DifferentialForm.basis(8, [4, 5]) + DifferentialForm.basis(8, [6, 7])
    v1, v2 = DifferentialForm.basis(8, [0, 1, 2, 3]), DifferentialForm.basis(8, [4, 5, 6, 7])
    one = DifferentialForm.const(8)
    f1 = one + v1.scale(Scalar.u_power(4, 2 * c[1]))
    f2 = one + v2.scale(Scalar.u_power(4, 2 * c[1]))
    assert a_hat(_block_diag(8, [w1, w2]), 8) == f1.wedge(f2)


def test_log_series_against_sympy():
    x = sympy.symbols("x")
    ser = sympy.series(sympy.log(x / sympy.sinh(x)), x, 0, 12).removeO()
    want = [Fraction(str(ser.coeff(x, 2 * k))) for k in range(6)]
    assert log_x_over_sinh_coeffs(5) == want


@given(seeds, st.integers(1, 3))
def test_d_squared_zero(seed, dim):
    w = random_form(np.random.default_rng(seed), dim)
    assert d_exterior(d_exterior(w)).is_zero()


@given(seeds, st.integers(1, 3))
def test_leibniz(seed, dim):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, dim + 1))
    a = random_form(rng, dim, degree=k)
    b = random_form(rng, dim)
    lhs = d_exterior(a.wedge(b))
    rhs = d_exterior(a).wedge(b) + a.wedge(d_exterior(b)).scale((-1) ** k)
    assert lhs == rhs


@given(seeds, st.integers(1, 3))
def test_stokes_on_gaussian_forms(seed, dim):
    rng = np.random.default_rng(seed)
    w = DifferentialForm(dim)
    for j in range(dim):
        idx = [i for i in range(dim) if i != j]
        mono = [int(rng.integers(0, 3)) for _ in range(dim)]
        rates = [int(rng.integers(1, 3)) for _ in range(dim)]
        w = w + DifferentialForm.basis(dim, idx, CoeffFn.monomial(dim, mono, rates, int(rng.integers(-3, 4))))
    assert integrate_full(d_exterior(w)) == Scalar.const(0)


@given(seeds)
def test_exp_inverse_for_nilpotent(seed):
    rng = np.random.default_rng(seed)
    V = SuperVectorSpace(1, 1)
    X = EndValuedForm.zero(2, V)
    for idx in [(0,), (1,), (0, 1)]:
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            if rng.random() < 0.5:
                T = SuperMap(V, V, {(r, c): Scalar.const(int(rng.integers(-3, 4)))})
                X = X + EndValuedForm.from_map(2, T, CoeffFn.monomial(2, [int(rng.integers(0, 2)), 0], [0, 1]), idx)
    assert exp_central(X) @ exp_central(X.scale(-1)) == EndValuedForm.identity(2, V)


@given(seeds)
def test_form_json_roundtrip(seed):
    w = random_form(np.random.default_rng(seed), 2)
    assert form_from_json(form_to_json(w)) == w
