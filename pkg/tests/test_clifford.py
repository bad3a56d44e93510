import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffko.clifford import (CliffordElement, CliffordSignature, basis_words, clifford_mul, gamma, left_matrix,
                              regular_representation, star, tensor_iso)
from cliffko.errors import MixedSignConvention, SignatureMismatch
from cliffko.scalars import Scalar

from conftest import scalars

CL1 = CliffordSignature(1, 0)
CL01 = CliffordSignature(0, 1)
CL11 = CliffordSignature(1, 1)


def element(sig):
    words = st.integers(0, (1 << sig.rank) - 1)
    return st.builds(lambda terms: CliffordElement(sig, terms), st.dictionaries(words, scalars(2), max_size=4))


def test_generator_squares():
    f = CliffordElement.f(CL1, 1)
    e = CliffordElement.e(CL01, 1)
    assert f * f == CliffordElement.scalar(CL1, -1)
    assert e * e == CliffordElement.scalar(CL01, 1)
    fe = CliffordElement.f(CL11, 1) * CliffordElement.e(CL11, 1)
    assert fe * fe == CliffordElement.scalar(CL11, 1)


def test_fefe_via_regular_representation():
    V, (f, e) = regular_representation(CL11)
    fe = f @ e
    assert fe @ fe == fe.identity(V)


def test_signature_mismatch():
    with pytest.raises(SignatureMismatch):
        clifford_mul(CliffordElement.scalar(CL1), CliffordElement.scalar(CL11))


def test_gamma_examples():
    fe = CliffordElement.f(CL11, 1) * CliffordElement.e(CL11, 1)
    assert gamma(CL11) == fe.scale(Scalar.const(Fraction(1, 2)))
    assert gamma(CL1) == CliffordElement.f(CL1, 1).scale(Scalar.sqrt2_power(-1))
    assert gamma(CliffordSignature()) == CliffordElement.scalar(CliffordSignature())


def test_star_examples():
    f = CliffordElement.f(CL11, 1)
    e = CliffordElement.e(CL11, 1)
    assert star(f) == -f
    assert star(e) == e
    assert star(f * e) == f * e
    one = CliffordElement.scalar(CL11)
    assert star(one) == one


def test_tensor_iso_generators():
    f = CliffordElement.f(CL1, 1)
    one = CliffordElement.scalar(CL1)
    a, b = tensor_iso(f, one), tensor_iso(one, f)
    sig2 = CliffordSignature(2, 0)
    assert a * a == CliffordElement.scalar(sig2, -1)
    assert b * b == CliffordElement.scalar(sig2, -1)
    assert a * b == -(b * a)
    assert tensor_iso(one, one) == CliffordElement.scalar(sig2)
    # orientation: Gamma_1 (x) Gamma_1 = Gamma_2 with sign +1 in the standard order
    assert tensor_iso(gamma(CL1), gamma(CL1)) == gamma(sig2)


def test_tensor_iso_rejects_mixed_conventions():
    with pytest.raises(MixedSignConvention):
        tensor_iso(CliffordElement.scalar(CL1), CliffordElement.scalar(CL01))


@pytest.mark.parametrize("n,m", [(n, m) for n in range(4) for m in range(4) if n + m <= 6])
def test_basis_dimension(n, m):
    assert len(basis_words(CliffordSignature(n, m))) == 2 ** (n + m)


@pytest.mark.parametrize("n,m", [(2, 1), (1, 2), (3, 0), (0, 3), (2, 2), (3, 3)])
def test_regular_representation_is_homomorphism(n, m):
    sig = CliffordSignature(n, m)
    words = basis_words(sig)
    for a, b in itertools.islice(itertools.product(words, words), 0, None, 7):
        x = CliffordElement(sig, {a: Scalar.const(1)})
        y = CliffordElement(sig, {b: Scalar.const(1)})
        assert left_matrix(x * y) == left_matrix(x) @ left_matrix(y)


@given(element(CliffordSignature(2, 2)), element(CliffordSignature(2, 2)))
def test_star_is_anti_involution(x, y):
    assert star(star(x)) == x
    assert star(x * y) == star(y) * star(x)


@given(element(CliffordSignature(1, 2)), element(CliffordSignature(1, 2)), element(CliffordSignature(1, 2)))
def test_associativity(x, y, z):
    assert (x * y) * z == x * (y * z)
