from fractions import Fraction

import pytest
from hypothesis import given

from cliffko.errors import InvNonMonomial, NotAlphaPolynomial, ParseError
from cliffko.scalars import I, Scalar, parse, render, substitute_alpha

from conftest import scalars

SQRT2 = Scalar.sqrt2_power(1)


def test_defining_relations():
    assert SQRT2 * SQRT2 == Scalar.const(2)
    assert I * I == Scalar.const(-1)


def test_product_of_cl4_traces_has_expected_key():
    x = Scalar.u_power(-4, 2)
    assert (x * x).terms == {(0, 0, 0, -8): Fraction(4)}


def test_monomial_inverse_and_failure():
    m = Scalar.monomial(Fraction(3, 2), i=1, sqrt2=1, p=-1, v=5)
    assert m * m.inv() == Scalar.const(1)
    with pytest.raises(InvNonMonomial):
        (Scalar.const(1) + SQRT2).inv()


def test_reciprocal_in_sqrt2_field():
    x = Scalar.const(3) + SQRT2
    assert x * x.reciprocal() == Scalar.const(1)


def test_canonical_form_drops_cancelled_terms():
    assert (SQRT2 - SQRT2).terms == {}
    assert Scalar({(2, 2, 0, 0): 1}) == Scalar.const(-2)


def test_alpha_substitution_examples():
    # u^-4 = (alpha/2)^-2
    assert substitute_alpha(Scalar.u_power(-8)).terms == {-2: Scalar.const(4)}
    # alpha^-1 = u^-2 / 2
    assert substitute_alpha(Scalar.u_power(-4, 2)).terms == {-1: Scalar.const(4)}
    assert substitute_alpha(Scalar.const(0)).terms == {}


def test_alpha_substitution_rejects_odd_powers():
    with pytest.raises(NotAlphaPolynomial):
        substitute_alpha(Scalar.u_power(-2))


@given(scalars(), scalars(), scalars())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert a - a == Scalar.const(0)


@given(scalars())
def test_alpha_roundtrip(a):
    terms = {(i, r, p, 4 * (v // 4)): c for (i, r, p, v), c in a.terms.items()}
    x = Scalar(terms)
    assert substitute_alpha(x).back_substitute() == x


@given(scalars())
def test_render_parse_roundtrip(a):
    assert parse(render(a)) == a


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("2 * q")
    with pytest.raises(ParseError):
        parse("")


def test_numeric_evaluation_at_u_one():
    x = parse("2 * sqrt2 * u^{-4/2}")
    assert abs(complex(x) - 2 * 2 ** 0.5) < 1e-12
