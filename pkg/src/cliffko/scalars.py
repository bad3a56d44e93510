"""Exact scalars: Q[i, sqrt2] extended by invertible formal symbols p and v.

``p`` stands for sqrt(pi) and ``v`` for u^(1/2), where u is the Bott variable.
A monomial key is ``(i_exp, r2_exp, p_pow, v_pow)`` with ``i_exp, r2_exp`` in
{0, 1}; the relations i^2 = -1 and sqrt2^2 = 2 are applied on construction.
"""
from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InvNonMonomial, NotAlphaPolynomial, ParseError

Key = tuple[int, int, int, int]
ONE_KEY: Key = (0, 0, 0, 0)


def _key_mul(a: Key, b: Key) -> tuple[Key, int]:
    """Multiply two monomial keys, returning the reduced key and a rational factor."""
    i = a[0] + b[0]
    r = a[1] + b[1]
    factor = 1
    if i == 2:
        i = 0
        factor = -1
    if r == 2:
        r = 0
        factor *= 2
    return (i, r, a[2] + b[2], a[3] + b[3]), factor


class Scalar:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Key, Fraction | int] | None = None):
        clean: dict[Key, Fraction] = {}
        if terms:
            for key, c in terms.items():
                i, r, pp, vp = key
                c = Fraction(c)
                # bring exponents of i and sqrt2 into {0, 1}
                if r not in (0, 1):
                    c *= Fraction(2) ** (r // 2)
                    r %= 2
                if i not in (0, 1):
                    if (i // 2) % 2:
                        c = -c
                    i %= 2
                k = (i, r, int(pp), int(vp))
                total = clean.get(k, Fraction(0)) + c
                if total:
                    clean[k] = total
                else:
                    clean.pop(k, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Key, Fraction]) -> "Scalar":
        s = cls.__new__(cls)
        s._terms = terms
        s._hash = None
        return s

    # constructors

    @classmethod
    def const(cls, q) -> "Scalar":
        q = Fraction(q)
        return cls._raw({ONE_KEY: q} if q else {})

    @classmethod
    def monomial(cls, coeff=1, i: int = 0, sqrt2: int = 0, p: int = 0, v: int = 0) -> "Scalar":
        return cls({(i, sqrt2, p, v): Fraction(coeff)})

    @classmethod
    def u_power(cls, half_exponent: int, coeff=1) -> "Scalar":
        """coeff * u^(half_exponent/2)."""
        return cls.monomial(coeff, v=half_exponent)

    @classmethod
    def sqrt2_power(cls, k: int, coeff=1) -> "Scalar":
        """coeff * sqrt2^k for any integer k."""
        q = Fraction(coeff) * Fraction(2) ** (k // 2)
        return cls.monomial(q, sqrt2=k % 2)

    # inspection

    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_KEY in self._terms)

    def is_real(self) -> bool:
        return all(k[0] == 0 for k in self._terms)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms[ONE_KEY]

    def v_powers(self) -> set[int]:
        return {k[3] for k in self._terms}

    def is_alpha_polynomial(self, shift: int = 0) -> bool:
        """True when every v exponent (plus ``shift``) is divisible by 4."""
        return all((k[3] + shift) % 4 == 0 for k in self._terms)

    # arithmetic

    def __add__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            t = out.get(k)
            if t is None:
                out[k] = c
            else:
                t += c
                if t:
                    out[k] = t
                else:
                    del out[k]
        return Scalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return ZERO
            q = Fraction(other)
            return Scalar._raw({k: c * q for k, c in self._terms.items()})
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if not self._terms or not other._terms:
            return ZERO
        out: dict[Key, Fraction] = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                k, f = _key_mul(ka, kb)
                c = ca * cb * f
                t = out.get(k)
                if t is None:
                    out[k] = c
                else:
                    t += c
                    if t:
                        out[k] = t
                    else:
                        del out[k]
        return Scalar._raw(out)

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        """Inverse of a single monomial; other values raise InvNonMonomial."""
        if len(self._terms) != 1:
            raise InvNonMonomial(f"cannot invert non-monomial {self}")
        (k, c), = self._terms.items()
        i, r, pp, vp = k
        q = 1 / c
        if r:
            q /= 2  # 1/sqrt2 = sqrt2/2
        if i:
            q = -q  # 1/i = -i
        return Scalar._raw({(i, r, -pp, -vp): q})

    def reciprocal(self) -> "Scalar":
        """Field inverse for values whose terms share one (p, v) monomial.

        Such a value is m * z with m a unit and z in Q(i, sqrt2), a field.
        """
        if not self._terms:
            raise ZeroDivisionError("reciprocal of zero")
        pv = {(k[2], k[3]) for k in self._terms}
        if len(pv) != 1:
            raise InvNonMonomial(f"{self} mixes several p/v monomials")
        if len(self._terms) == 1:
            return self.inv()
        (pp, vp), = pv
        unit = Scalar.monomial(1, p=pp, v=vp)
        z = self * unit.inv()
        # z = a + b*sqrt2 with a, b in Q(i); multiply by the sqrt2-conjugate
        zc = Scalar._raw({k: (-c if k[1] else c) for k, c in z._terms.items()})
        n = z * zc  # in Q(i)
        nc = Scalar._raw({k: (-c if k[0] else c) for k, c in n._terms.items()})
        nn = (n * nc).as_fraction()
        return zc * nc * (1 / nn) * unit.inv()

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "Scalar":
        """Complex conjugation: i -> -i; p, v and sqrt2 are real symbols."""
        return Scalar._raw({k: (-c if k[0] else c) for k, c in self._terms.items()})

    # comparison

    def __eq__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # numerics

    def evaluate(self, v: complex = 1.0, p: float = math.sqrt(math.pi)) -> complex:
        total = 0j
        for (i, r, pp, vp), c in self._terms.items():
            term = float(c) * (p ** pp) * (v ** vp)
            if r:
                term *= math.sqrt(2)
            if i:
                term *= 1j
            total += term
        return total

    def __complex__(self):
        return complex(self.evaluate())

    # text

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Scalar({render(self)!r})"


def as_scalar(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar.const(x)
    return NotImplemented


ZERO = Scalar._raw({})
ONE = Scalar._raw({ONE_KEY: Fraction(1)})
I = Scalar.monomial(1, i=1)
SQRT2 = Scalar.monomial(1, sqrt2=1)
P = Scalar.monomial(1, p=1)
V = Scalar.monomial(1, v=1)
U = Scalar.monomial(1, v=2)


def scalar_arith(a: Scalar, b: Scalar | None, op: str) -> Scalar:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    raise ValueError(f"unknown op {op!r}")


def ssum(values: Iterable[Scalar]) -> Scalar:
    out: dict[Key, Fraction] = {}
    for s in values:
        for k, c in s._terms.items():
            t = out.get(k, 0) + c
            if t:
                out[k] = t
            else:
                out.pop(k, None)
    return Scalar._raw(out)


# --- alpha substitution ----------------------------------------------------


class AlphaSeries:
    """Laurent polynomial in alpha = 2u^2 with coefficients free of v."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, Scalar]):
        self.terms = {k: c for k, c in terms.items() if c}

    def back_substitute(self) -> Scalar:
        # alpha^k = 2^k u^(2k) = 2^k v^(4k)
        out = ZERO
        for k, c in self.terms.items():
            out = out + c * Scalar.monomial(Fraction(2) ** k, v=4 * k)
        return out

    def __eq__(self, other):
        return isinstance(other, AlphaSeries) and self.terms == other.terms

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = render(self.terms[k])
            parts.append(c if k == 0 else f"({c}) * alpha^{k}")
        return " + ".join(parts)


def substitute_alpha(a: Scalar) -> AlphaSeries:
    """Rewrite u^(2k) as (alpha/2)^k."""
    out: dict[int, Scalar] = {}
    for (i, r, pp, vp), c in a._terms.items():
        if vp % 4:
            raise NotAlphaPolynomial(f"monomial with u^({vp}/2) is not a power of u^2")
        k = vp // 4
        coeff = Scalar({(i, r, pp, 0): c / Fraction(2) ** k})
        out[k] = out.get(k, ZERO) + coeff
    return AlphaSeries(out)


# --- text grammar -----------------------------------------------------------


def _render_term(key: Key, c: Fraction) -> str:
    i, r, pp, vp = key
    parts = [str(c)]
    if i:
        parts.append("i")
    if r:
        parts.append("sqrt2")
    if pp:
        parts.append(f"p^{pp}")
    if vp:
        parts.append(f"u^{{{vp}/2}}")
    return " * ".join(parts)


def render(a: Scalar) -> str:
    """Canonical text: terms 'q * i^a * sqrt2^b * p^c * u^{d/2}' joined by ' + '."""
    if not a._terms:
        return "0"
    return " + ".join(_render_term(k, a._terms[k]) for k in sorted(a._terms))


_FACTOR = re.compile(
    r"^(?P<sym>i|sqrt2|p|u|v)(?:\^(?:\{(?P<bnum>-?\d+)(?:/(?P<bden>\d+))?\}|(?P<num>-?\d+)(?:/(?P<den>\d+))?))?$"
)
_RATIONAL = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse(text: str) -> Scalar:
    """Parse the canonical grammar (plus a few lenient spellings)."""
    text = text.strip()
    if not text:
        raise ParseError("empty scalar")
    total = ZERO
    for raw in _split_top(text.replace(" ", ""), "+"):
        if not raw:
            raise ParseError(f"empty term in {text!r}")
        coeff = Fraction(1)
        key = [0, 0, 0, 0]
        if raw.startswith("-") and not _RATIONAL.match(raw.split("*")[0]):
            coeff = -coeff
            raw = raw[1:]
        for fac in _split_top(raw, "*"):
            if _RATIONAL.match(fac):
                coeff *= Fraction(fac)
                continue
            m = _FACTOR.match(fac)
            if not m:
                raise ParseError(f"bad factor {fac!r} in {text!r}")
            num = m.group("bnum") or m.group("num")
            den = m.group("bden") or m.group("den")
            exp = Fraction(int(num) if num else 1, int(den) if den else 1)
            sym = m.group("sym")
            if sym == "u":
                exp *= 2  # stored as a power of v = u^(1/2)
                sym = "v"
            if exp.denominator != 1:
                raise ParseError(f"fractional exponent in {fac!r}")
            idx = {"i": 0, "sqrt2": 1, "p": 2, "v": 3}[sym]
            key[idx] += int(exp)
        total = total + Scalar({tuple(key): coeff})
    return total


def to_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, str):
        return parse(x)
    if isinstance(x, (int, Fraction)):
        return Scalar.const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Scalar")


def numeric(x, v: complex = 1.0) -> complex:
    if isinstance(x, Scalar):
        return x.evaluate(v)
    return complex(x)


def is_close(a: complex, b: complex, tol: float) -> bool:
    return cmath.isclose(a, b, abs_tol=tol, rel_tol=0)
