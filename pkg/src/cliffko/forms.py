"""Differential forms on R^d whose coefficients are polynomial times Gaussian.

Coordinates are 0-based internally: x_0 .. x_{d-1}.  A form is a dict from
strictly increasing index tuples to coefficient functions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from math import factorial, isqrt
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm, expm_frechet
from scipy.special import erfc

from .errors import NonCentralBody, NotAntisymmetric, NotIntegrable
from .scalars import ZERO, Scalar, parse, render, to_scalar
from .superlinear import SuperMap, SuperVectorSpace

# term key: (monomial exponents, gaussian rates, erf atoms)
# an erf atom (axis, rate, side): side -1 integrates from -inf, +1 from +inf
Atom = tuple[int, Fraction, int]
Key = tuple[tuple[int, ...], tuple[Fraction, ...], tuple[Atom, ...]]


class CoeffFn:
    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Key, Scalar] | None = None):
        self.dim = dim
        out: dict[Key, Scalar] = {}
        for k, c in (terms or {}).items():
            c = to_scalar(c)
            if c:
                out[k] = out[k] + c if k in out else c
        self.terms = {k: c for k, c in out.items() if c}

    # constructors
    @classmethod
    def const(cls, dim: int, c=1) -> "CoeffFn":
        return cls(dim, {cls._unit_key(dim): to_scalar(c)})

    @staticmethod
    def _unit_key(dim: int) -> Key:
        return ((0,) * dim, (Fraction(0),) * dim, ())

    @classmethod
    def coordinate(cls, dim: int, j: int, c=1) -> "CoeffFn":
        mono = tuple(int(k == j) for k in range(dim))
        return cls(dim, {(mono, (Fraction(0),) * dim, ()): to_scalar(c)})

    @classmethod
    def monomial(cls, dim: int, mono: Sequence[int], rates: Sequence | None = None, c=1,
                 erfs: Iterable[Atom] = ()) -> "CoeffFn":
        rates = tuple(Fraction(r) for r in (rates or (0,) * dim))
        if any(r < 0 for r in rates):
            raise ValueError("Gaussian rates must be nonnegative")
        atoms = tuple(sorted((int(a), Fraction(r), int(s)) for a, r, s in erfs))
        return cls(dim, {(tuple(mono), rates, atoms): to_scalar(c)})

    @classmethod
    def gaussian(cls, dim: int, rates: Sequence, c=1) -> "CoeffFn":
        return cls.monomial(dim, (0,) * dim, rates, c)

    @classmethod
    def erf_atom(cls, dim: int, axis: int, rate=1, side: int = -1, c=1) -> "CoeffFn":
        """c * integral of exp(-rate t^2) dt from -inf (side=-1) or +inf (side=+1) to x_axis."""
        return cls.monomial(dim, (0,) * dim, None, c, [(axis, Fraction(rate), side)])

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_polynomial(self) -> bool:
        return all(not any(r) and not a for (_, r, a) in self.terms)

    def has_erf(self) -> bool:
        return any(a for (_, _, a) in self.terms)

    def constant_value(self) -> Scalar | None:
        """The value if this function is constant, else None."""
        if not self.terms:
            return ZERO
        if len(self.terms) == 1:
            k, c = next(iter(self.terms.items()))
            if k == self._unit_key(self.dim):
                return c
        return None

    def _check(self, other: "CoeffFn"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, CoeffFn):
            other = CoeffFn.const(self.dim, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return CoeffFn(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffFn(self.dim, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "CoeffFn":
        s = to_scalar(s)
        if not s:
            return CoeffFn(self.dim)
        return CoeffFn(self.dim, {k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, CoeffFn):
            return self.scale(other)
        self._check(other)
        out: dict[Key, Scalar] = {}
        for (m1, r1, a1), c1 in self.terms.items():
            for (m2, r2, a2), c2 in other.terms.items():
                k = (tuple(x + y for x, y in zip(m1, m2)), tuple(x + y for x, y in zip(r1, r2)),
                     tuple(sorted(a1 + a2)))
                c = c1 * c2
                out[k] = out[k] + c if k in out else c
        return CoeffFn(self.dim, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = CoeffFn.const(self.dim)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, CoeffFn):
            return self.dim == other.dim and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def partial(self, j: int) -> "CoeffFn":
        """Exact partial derivative along x_j."""
        out: dict[Key, Scalar] = {}

        def put(k, c):
            out[k] = out[k] + c if k in out else c

        for (mono, rates, atoms), c in self.terms.items():
            if mono[j]:
                m = list(mono)
                m[j] -= 1
                put((tuple(m), rates, atoms), c * mono[j])
            if rates[j]:
                m = list(mono)
                m[j] += 1
                put((tuple(m), rates, atoms), c * Scalar.const(-2 * rates[j]))
            for idx, (axis, lam, _side) in enumerate(atoms):
                if axis != j:
                    continue
                r = list(rates)
                r[j] += lam
                put((mono, tuple(r), atoms[:idx] + atoms[idx + 1:]), c)
        return CoeffFn(self.dim, out)

    def extend(self, new_dim: int) -> "CoeffFn":
        """The same function viewed on R^{new_dim}, ignoring the extra trailing coordinates."""
        pad = new_dim - self.dim
        if pad < 0:
            raise ValueError("cannot shrink dimension")
        return CoeffFn(new_dim, {(m + (0,) * pad, r + (Fraction(0),) * pad, a): c
                                 for (m, r, a), c in self.terms.items()})

    def embed(self, new_dim: int, positions: Sequence[int]) -> "CoeffFn":
        """Pull back along the projection sending coordinate k to coordinate positions[k]."""
        out = {}
        for (m, r, a), c in self.terms.items():
            mm, rr = [0] * new_dim, [Fraction(0)] * new_dim
            for k, p in enumerate(positions):
                mm[p], rr[p] = m[k], r[k]
            atoms = tuple(sorted((positions[ax], lam, s) for ax, lam, s in a))
            out[(tuple(mm), tuple(rr), atoms)] = c
        return CoeffFn(new_dim, out)

    def map_scalars(self, fn) -> "CoeffFn":
        return CoeffFn(self.dim, {k: fn(c) for k, c in self.terms.items()})

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    def evaluate(self, point: Sequence[float], v: complex = 1.0) -> complex:
        x = np.asarray(point, dtype=float)
        total = 0j
        for (mono, rates, atoms), c in self.terms.items():
            val = complex(c.evaluate(v))
            for j in range(self.dim):
                if mono[j]:
                    val *= x[j] ** mono[j]
                if rates[j]:
                    val *= math.exp(-float(rates[j]) * x[j] ** 2)
            for axis, lam, side in atoms:
                val *= erf_value(float(lam), side, x[axis])
            total += val
        return total

    def evaluate_real(self, point: Sequence[float], v: float = 1.0) -> float:
        return self.evaluate(point, v).real

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (mono, rates, atoms), c in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            bits = [f"({render(c)})"]
            bits += [f"x{j}^{e}" if e > 1 else f"x{j}" for j, e in enumerate(mono) if e]
            if any(rates):
                bits.append("exp(-(" + " + ".join(f"{r}*x{j}^2" for j, r in enumerate(rates) if r) + "))")
            bits += [f"Erf[{'-' if s < 0 else '+'}inf,{lam}](x{ax})" for ax, lam, s in atoms]
            parts.append("*".join(bits))
        return " + ".join(parts)

    __repr__ = __str__


def erf_value(rate: float, side: int, x: float) -> float:
    if rate <= 0:
        raise ValueError("Erf atoms need a positive rate")
    s = math.sqrt(rate)
    half = math.sqrt(math.pi) / (2 * s)
    # int_{-inf}^x = half*erfc(-s x); int_{+inf}^x = -half*erfc(s x)
    return half * erfc(-s * x) if side < 0 else -half * erfc(s * x)


# --- index helpers ---------------------------------------------------------------


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...] | None]:
    """Sign and index of dx_a ^ dx_b (None when they share an index)."""
    if set(a) & set(b):
        return 0, None
    inv = sum(1 for i in a for j in b if i > j)
    return (-1 if inv % 2 else 1), tuple(sorted(a + b))


class DifferentialForm:
    __slots__ = ("dim", "comps")

    def __init__(self, dim: int, comps: Mapping[tuple[int, ...], CoeffFn] | None = None):
        self.dim = dim
        out = {}
        for idx, c in (comps or {}).items():
            idx = tuple(idx)
            if list(idx) != sorted(set(idx)) or any(i >= dim or i < 0 for i in idx):
                raise ValueError(f"bad multi-index {idx}")
            if c.dim != dim:
                raise ValueError("coefficient dimension mismatch")
            if c:
                out[idx] = out[idx] + c if idx in out else c
        self.comps = {k: v for k, v in out.items() if v}

    @classmethod
    def function(cls, f: CoeffFn) -> "DifferentialForm":
        return cls(f.dim, {(): f})

    @classmethod
    def const(cls, dim: int, c=1) -> "DifferentialForm":
        return cls.function(CoeffFn.const(dim, c))

    @classmethod
    def basis(cls, dim: int, idx: Sequence[int], f: CoeffFn | None = None) -> "DifferentialForm":
        sign, merged = 1, ()
        for i in idx:
            s, merged = merge_sign(merged, (i,))
            if merged is None:
                return cls(dim)
            sign *= s
        f = f if f is not None else CoeffFn.const(dim)
        return cls(dim, {merged: f.scale(sign)})

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def degrees(self) -> set[int]:
        return {len(i) for i in self.comps}

    def degree_part(self, k: int) -> "DifferentialForm":
        return DifferentialForm(self.dim, {i: c for i, c in self.comps.items() if len(i) == k})

    def __getitem__(self, idx) -> CoeffFn:
        return self.comps.get(tuple(idx), CoeffFn(self.dim))

    def __add__(self, other: "DifferentialForm"):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.comps)
        for i, c in other.comps.items():
            out[i] = out[i] + c if i in out else c
        return DifferentialForm(self.dim, out)

    def __neg__(self):
        return DifferentialForm(self.dim, {i: -c for i, c in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "DifferentialForm":
        if isinstance(s, CoeffFn):
            return DifferentialForm(self.dim, {i: c * s for i, c in self.comps.items()})
        return DifferentialForm(self.dim, {i: c.scale(s) for i, c in self.comps.items()})

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out: dict = {}
        for i, a in self.comps.items():
            for j, b in other.comps.items():
                s, k = merge_sign(i, j)
                if k is None:
                    continue
                t = (a * b).scale(s)
                out[k] = out[k] + t if k in out else t
        return DifferentialForm(self.dim, out)

    __mul__ = wedge

    def __eq__(self, other):
        if isinstance(other, DifferentialForm):
            return self.dim == other.dim and self.comps == other.comps
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, frozenset(self.comps.items())))

    def extend(self, new_dim: int) -> "DifferentialForm":
        return DifferentialForm(new_dim, {i: c.extend(new_dim) for i, c in self.comps.items()})

    def embed(self, new_dim: int, positions: Sequence[int]) -> "DifferentialForm":
        out = DifferentialForm(new_dim)
        for i, c in self.comps.items():
            out = out + DifferentialForm.basis(new_dim, [positions[k] for k in i], c.embed(new_dim, positions))
        return out

    def map_scalars(self, fn) -> "DifferentialForm":
        return DifferentialForm(self.dim, {i: c.map_scalars(fn) for i, c in self.comps.items()})

    def evaluate(self, point: Sequence[float], v: complex = 1.0) -> dict[tuple[int, ...], complex]:
        return {i: c.evaluate(point, v) for i, c in self.comps.items()}

    def __str__(self):
        if not self.comps:
            return "0"
        return " + ".join(f"[{c}]" + ("" if not i else " d" + "^d".join(f"x{k}" for k in i))
                          for i, c in sorted(self.comps.items()))

    __repr__ = __str__


def d_exterior(w: DifferentialForm) -> DifferentialForm:
    out: dict = {}
    for idx, c in w.comps.items():
        for j in range(w.dim):
            if j in idx:
                continue
            dc = c.partial(j)
            if not dc:
                continue
            s, k = merge_sign((j,), idx)
            t = dc.scale(s)
            out[k] = out[k] + t if k in out else t
    return DifferentialForm(w.dim, out)


# --- integration -------------------------------------------------------------------------


def sqrt_rational(q: Fraction) -> Scalar:
    """sqrt(q) in Q(sqrt2); NotIntegrable when it is not there."""
    if q <= 0:
        raise NotIntegrable(f"no real square root of {q}")
    for mult, r2 in ((1, 0), (2, 1)):
        x = q / mult
        n, d = x.numerator, x.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Scalar.monomial(Fraction(rn, rd), sqrt2=r2)
    raise NotIntegrable(f"sqrt({q}) is not in Q(sqrt2)")


def gaussian_moment(a: int, lam: Fraction) -> Scalar:
    """Integral over R of x^a exp(-lam x^2), in terms of the symbol p = sqrt(pi)."""
    if a % 2:
        return ZERO
    if lam <= 0:
        raise NotIntegrable("zero Gaussian rate")
    dfact = 1
    for k in range(a - 1, 0, -2):
        dfact *= k
    root = sqrt_rational(Fraction(lam))  # sqrt(lam)
    # (a-1)!! / (2 lam)^{a/2} * sqrt(pi / lam)
    return Scalar.monomial(Fraction(dfact, 2 ** (a // 2)) / Fraction(lam) ** (a // 2), p=1) * root.reciprocal()


def integrate_full(w: DifferentialForm) -> Scalar:
    """Exact integral of the top-degree part over R^d (orientation dx_0 ^ ... ^ dx_{d-1})."""
    top = w[tuple(range(w.dim))]
    total = ZERO
    for (mono, rates, atoms), c in top.terms.items():
        if atoms:
            raise NotIntegrable("Erf atoms are not integrated symbolically")
        val = c
        for a, lam in zip(mono, rates):
            if lam <= 0:
                raise NotIntegrable("zero Gaussian rate along an axis")
            val = val * gaussian_moment(a, lam)
            if not val:
                break
        total = total + val
    return total


def integrate_numeric(w: DifferentialForm, radius: float = 10.0, tol: float = 1e-10) -> float:
    """Quadrature of the top-degree part over the box [-radius, radius]^d (d <= 2)."""
    from scipy.integrate import quad, dblquad

    top = w[tuple(range(w.dim))]
    if w.dim == 1:
        return quad(lambda x: top.evaluate_real([x]), -radius, radius, epsabs=tol, limit=200)[0]
    if w.dim == 2:
        return dblquad(lambda y, x: top.evaluate_real([x, y]), -radius, radius, -radius, radius,
                       epsabs=tol)[0]
    raise ValueError("numeric integration implemented for d <= 2")


def dirichlet_integral(alpha: Sequence[int]) -> Fraction:
    """Integral of s^alpha over the standard simplex {s_i >= 0, sum s_i <= 1} in R^k."""
    k = len(alpha)
    num = 1
    for a in alpha:
        num *= factorial(a)
    return Fraction(num, factorial(sum(alpha) + k))


def mathai_quillen(n: int) -> DifferentialForm:
    """2^{n/2} exp(-|x|^2) dx_0 ^ ... ^ dx_{n-1}."""
    if n < 1:
        raise ValueError("n >= 1")
    g = CoeffFn.gaussian(n, [1] * n, Scalar.sqrt2_power(n))
    return DifferentialForm(n, {tuple(range(n)): g})


# --- endomorphism-valued forms ------------------------------------------------------------


class EndValuedForm:
    """Sum over multi-indices I of dx_I (x) A_I, with A_I a matrix of CoeffFn on a super space."""

    __slots__ = ("dim", "space", "comps")

    def __init__(self, dim: int, space: SuperVectorSpace,
                 comps: Mapping[tuple[int, ...], Mapping[tuple[int, int], CoeffFn]] | None = None):
        self.dim = dim
        self.space = space
        out: dict = {}
        for idx, mat in (comps or {}).items():
            ents = {rc: f for rc, f in mat.items() if f}
            if ents:
                out[tuple(idx)] = ents
        self.comps = out

    @classmethod
    def zero(cls, dim: int, space: SuperVectorSpace) -> "EndValuedForm":
        return cls(dim, space)

    @classmethod
    def identity(cls, dim: int, space: SuperVectorSpace, c=1) -> "EndValuedForm":
        f = CoeffFn.const(dim, c)
        return cls(dim, space, {(): {(a, a): f for a in range(space.dim)}})

    @classmethod
    def from_map(cls, dim: int, T: SuperMap, f: CoeffFn | None = None,
                 idx: Sequence[int] = ()) -> "EndValuedForm":
        """dx_idx (x) f*T."""
        f = f if f is not None else CoeffFn.const(dim)
        form = DifferentialForm.basis(dim, idx, f)
        out = {}
        for i, c in form.comps.items():
            out[i] = {rc: c.scale(v) for rc, v in T.entries.items()}
        return cls(dim, T.source, out)

    @classmethod
    def tensor(cls, w: DifferentialForm, T: SuperMap) -> "EndValuedForm":
        return cls(w.dim, T.source, {i: {rc: c.scale(v) for rc, v in T.entries.items()}
                                     for i, c in w.comps.items()})

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def _check(self, other: "EndValuedForm"):
        if self.dim != other.dim or self.space != other.space:
            raise ValueError("shape mismatch between endomorphism-valued forms")

    def __add__(self, other: "EndValuedForm"):
        self._check(other)
        out = {i: dict(m) for i, m in self.comps.items()}
        for i, m in other.comps.items():
            tgt = out.setdefault(i, {})
            for rc, f in m.items():
                tgt[rc] = tgt[rc] + f if rc in tgt else f
        return EndValuedForm(self.dim, self.space, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "EndValuedForm":
        if isinstance(s, CoeffFn):
            return EndValuedForm(self.dim, self.space,
                                 {i: {rc: f * s for rc, f in m.items()} for i, m in self.comps.items()})
        s = to_scalar(s)
        return EndValuedForm(self.dim, self.space,
                             {i: {rc: f.scale(s) for rc, f in m.items()} for i, m in self.comps.items()})

    def __matmul__(self, other: "EndValuedForm") -> "EndValuedForm":
        """(dx_I (x) S)(dx_J (x) T) = (-1)^{|S||J|} dx_I ^ dx_J (x) ST."""
        self._check(other)
        par = self.space.parity
        out: dict = {}
        for I, A in self.comps.items():
            rows: dict[int, list] = {}
            for (r, k), f in A.items():
                rows.setdefault(r, []).append((k, f))
            for J, B in other.comps.items():
                s, K = merge_sign(I, J)
                if K is None:
                    continue
                cols: dict[int, list] = {}
                for (k, c), g in B.items():
                    cols.setdefault(k, []).append((c, g))
                tgt = out.setdefault(K, {})
                for r, lst in rows.items():
                    for k, f in lst:
                        sign = s * (-1 if (par(r) + par(k)) * len(J) % 2 else 1)
                        for c, g in cols.get(k, ()):
                            t = (f * g).scale(sign)
                            tgt[(r, c)] = tgt[(r, c)] + t if (r, c) in tgt else t
        return EndValuedForm(self.dim, self.space, out)

    def __eq__(self, other):
        if isinstance(other, EndValuedForm):
            return self.dim == other.dim and self.space == other.space and self.comps == other.comps
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, self.space, frozenset((i, frozenset(m.items())) for i, m in self.comps.items())))

    def degree_part(self, k: int) -> "EndValuedForm":
        return EndValuedForm(self.dim, self.space, {i: m for i, m in self.comps.items() if len(i) == k})

    def body(self) -> dict[tuple[int, int], CoeffFn]:
        return self.comps.get((), {})

    def total_parity(self) -> int | None:
        pars = {(len(i) + self.space.parity(r) + self.space.parity(c)) % 2
                for i, m in self.comps.items() for (r, c) in m}
        if len(pars) > 1:
            return None
        return pars.pop() if pars else 0

    def map_coeffs(self, fn) -> "EndValuedForm":
        return EndValuedForm(self.dim, self.space,
                             {i: {rc: fn(f) for rc, f in m.items()} for i, m in self.comps.items()})

    def extend(self, new_dim: int) -> "EndValuedForm":
        return self.map_coeffs(lambda f: f.extend(new_dim))._redim(new_dim)

    def _redim(self, new_dim: int) -> "EndValuedForm":
        return EndValuedForm(new_dim, self.space, self.comps)

    def embed(self, new_dim: int, positions: Sequence[int]) -> "EndValuedForm":
        out = EndValuedForm(new_dim, self.space)
        for i, m in self.comps.items():
            form_sign = DifferentialForm.basis(new_dim, [positions[k] for k in i])
            (K, c), = form_sign.comps.items()
            sign = c.constant_value()
            out = out + EndValuedForm(new_dim, self.space,
                                      {K: {rc: f.embed(new_dim, positions).scale(sign) for rc, f in m.items()}})
        return out

    def map_space(self, new_space: SuperVectorSpace, index: Sequence[int]) -> "EndValuedForm":
        """Re-index the matrix entries into a larger space (index[a] = new position of a)."""
        return EndValuedForm(self.dim, new_space,
                             {i: {(index[r], index[c]): f for (r, c), f in m.items()}
                              for i, m in self.comps.items()})

    def partial(self, j: int) -> "EndValuedForm":
        return self.map_coeffs(lambda f: f.partial(j))

    def evaluate(self, point: Sequence[float], v: complex = 1.0) -> dict[tuple[int, ...], np.ndarray]:
        n = self.space.dim
        out = {}
        for i, m in self.comps.items():
            a = np.zeros((n, n), dtype=complex)
            for (r, c), f in m.items():
                a[r, c] = f.evaluate(point, v)
            out[i] = a
        return out

    def __str__(self):
        return "; ".join(f"{i}: {{{', '.join(f'{rc}: {f}' for rc, f in sorted(m.items()))}}}"
                         for i, m in sorted(self.comps.items())) or "0"

    __repr__ = __str__


def d_end(X: EndValuedForm) -> EndValuedForm:
    """The trivial-connection exterior derivative, acting entrywise on coefficients."""
    out: dict = {}
    for idx, m in X.comps.items():
        for j in range(X.dim):
            if j in idx:
                continue
            s, k = merge_sign((j,), idx)
            tgt = out.setdefault(k, {})
            for rc, f in m.items():
                df = f.partial(j)
                if df:
                    df = df.scale(s)
                    tgt[rc] = tgt[rc] + df if rc in tgt else df
    return EndValuedForm(X.dim, X.space, out)


def _negative_quadratic(s: CoeffFn) -> tuple[Fraction, ...] | None:
    """Rates lam with s = -sum lam_j x_j^2 (lam >= 0), else None."""
    lam = [Fraction(0)] * s.dim
    for (mono, rates, atoms), c in s.terms.items():
        if any(rates) or atoms or not c.is_rational() or sum(mono) != 2 or max(mono) != 2:
            return None
        lam[mono.index(2)] = -c.as_fraction()
    if any(x < 0 for x in lam):
        return None
    return tuple(lam)


def central_body(X: EndValuedForm) -> CoeffFn | None:
    """s when the degree-0 block is literally s * id, else None."""
    body = X.body()
    n = X.space.dim
    if any(r != c for (r, c) in body):
        return None
    vals = {body.get((a, a), CoeffFn(X.dim)) for a in range(n)}
    if len(vals) > 1:
        return None
    return vals.pop() if vals else CoeffFn(X.dim)


def exp_central(X: EndValuedForm) -> EndValuedForm:
    """exp(X) = exp(s) sum_k N^k/k! for X = s*id + N with N of positive form degree."""
    s = central_body(X)
    if s is None:
        raise NonCentralBody("body is not a scalar multiple of the identity; use exp_numeric")
    if s:
        rates = _negative_quadratic(s)
        if rates is None:
            raise NonCentralBody("central body must be -sum lam_j x_j^2 for an exact exponential")
        gauss = CoeffFn.gaussian(X.dim, rates)
    else:
        gauss = CoeffFn.const(X.dim)
    N = EndValuedForm(X.dim, X.space, {i: m for i, m in X.comps.items() if i})
    term = EndValuedForm.identity(X.dim, X.space)
    total = term
    for k in range(1, X.dim + 1):
        term = (term @ N).scale(Fraction(1, k))
        if not term:
            break
        total = total + term
    return total.scale(gauss)


# --- numeric exponential -------------------------------------------------------------------


def _subsets(d: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    return [c for k in range(d + 1) for c in combinations(range(d), k)]


class ExteriorFrame:
    """Left-regular representation of Lambda(R^d) (x) End(V) on Lambda(R^d) (x) V."""

    def __init__(self, dim: int, space: SuperVectorSpace):
        self.dim = dim
        self.space = space
        self.subsets = _subsets(dim)
        self.pos = {s: k for k, s in enumerate(self.subsets)}
        self.n = space.dim
        self.parities = np.array([space.parity(a) for a in range(space.dim)])
        # for each (I, J) with disjoint merge: sign and target subset
        self.table = {}
        for I in self.subsets:
            for J in self.subsets:
                s, K = merge_sign(I, J)
                if K is not None:
                    self.table[(I, J)] = (s, K)

    @property
    def size(self) -> int:
        return len(self.subsets) * self.n

    def matrix(self, comps: Mapping[tuple[int, ...], np.ndarray]) -> np.ndarray:
        n = self.n
        L = np.zeros((self.size, self.size), dtype=complex)
        Apar = (self.parities[:, None] + self.parities[None, :]) % 2
        for I, A in comps.items():
            for J in self.subsets:
                hit = self.table.get((I, J))
                if hit is None:
                    continue
                s, K = hit
                signs = np.where((Apar * len(J)) % 2 == 1, -s, s)
                r0, c0 = self.pos[K] * n, self.pos[J] * n
                L[r0:r0 + n, c0:c0 + n] += signs * A
        return L

    def read(self, M: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
        """Recover the form components of the algebra element whose matrix is M."""
        n = self.n
        return {I: M[self.pos[I] * n:(self.pos[I] + 1) * n, 0:n] for I in self.subsets}


def exp_numeric(X: EndValuedForm, point: Sequence[float], derivatives: bool = False,
                frame: ExteriorFrame | None = None):
    """Numeric exp(X) at a point as {I: matrix}; optionally also its partial derivatives."""
    frame = frame or ExteriorFrame(X.dim, X.space)
    L = frame.matrix(X.evaluate(point))
    if not derivatives:
        return frame.read(expm(L))
    derivs = []
    E = None
    for j in range(X.dim):
        dL = frame.matrix(X.partial(j).evaluate(point))
        E, dE = expm_frechet(L, dL)
        derivs.append(frame.read(dE))
    if E is None:
        E = expm(L)
    return frame.read(E), derivs


# --- A-hat form --------------------------------------------------------------------------------


def log_x_over_sinh_coeffs(order: int) -> list[Fraction]:
    """c_k with log(x/sinh x) = sum_k c_k x^{2k}, k = 0..order."""
    # x/sinh x = 1 / (sum x^{2k}/(2k+1)!) as a series in y = x^2
    s = [Fraction(1, factorial(2 * k + 1)) for k in range(order + 1)]
    inv = [Fraction(0)] * (order + 1)
    inv[0] = Fraction(1)
    for k in range(1, order + 1):
        inv[k] = -sum(s[j] * inv[k - j] for j in range(1, k + 1))
    # log(1 + g) with g = inv - 1
    g = [Fraction(0)] + inv[1:]
    out = [Fraction(0)] * (order + 1)
    power = [Fraction(1)] + [Fraction(0)] * order
    for m in range(1, order + 1):
        power = [sum(power[j] * g[k - j] for j in range(k + 1)) for k in range(order + 1)]
        for k in range(order + 1):
            out[k] += Fraction((-1) ** (m + 1), m) * power[k]
    return out


def _mat_mul_forms(A, B, dim):
    n = len(A)
    out = [[DifferentialForm(dim) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if not A[i][k]:
                continue
            for j in range(n):
                if B[k][j]:
                    out[i][j] = out[i][j] + A[i][k].wedge(B[k][j])
    return out


def a_hat(R: Sequence[Sequence[DifferentialForm]], dim: int) -> DifferentialForm:
    """det^{1/2}(uR / sinh(uR)) = exp(1/2 tr log(uR / sinh(uR))) for an antisymmetric matrix of 2-forms."""
    n = len(R)
    for i in range(n):
        for j in range(n):
            if R[i][j] != -R[j][i]:
                raise NotAntisymmetric(f"entry ({i},{j}) is not minus entry ({j},{i})")
            if R[i][j] and R[i][j].degrees() != {2}:
                raise ValueError("curvature entries must be 2-forms")
    order = dim // 4
    coeffs = log_x_over_sinh_coeffs(order)
    R2 = _mat_mul_forms(R, R, dim)
    power = [[DifferentialForm.const(dim) if i == j else DifferentialForm(dim) for j in range(n)] for i in range(n)]
    log_part = DifferentialForm(dim)
    for k in range(1, order + 1):
        power = _mat_mul_forms(power, R2, dim)
        tr = DifferentialForm(dim)
        for i in range(n):
            tr = tr + power[i][i]
        # (uR)^{2k} carries u^{2k}
        log_part = log_part + tr.scale(Scalar.u_power(4 * k, coeffs[k] / 2))
    total = DifferentialForm.const(dim)
    term = DifferentialForm.const(dim)
    for k in range(1, dim // 4 + 1):
        term = term.wedge(log_part).scale(Fraction(1, k))
        if not term:
            break
        total = total + term
    return total


# --- JSON ----------------------------------------------------------------------------------------


def coeff_to_json(f: CoeffFn) -> list[dict]:
    return [{"c": render(c), "mono": list(m), "rates": [str(r) for r in rt],
             "erf": [[a, str(lam), s] for a, lam, s in at]}
            for (m, rt, at), c in sorted(f.terms.items(), key=lambda kv: str(kv[0]))]


def coeff_from_json(dim: int, data: list[dict]) -> CoeffFn:
    out = CoeffFn(dim)
    for t in data:
        out = out + CoeffFn.monomial(dim, t.get("mono", [0] * dim), [Fraction(r) for r in t.get("rates", [0] * dim)],
                                     parse(str(t["c"])), [(a, Fraction(lam), s) for a, lam, s in t.get("erf", [])])
    return out


def form_to_json(w: DifferentialForm) -> dict:
    return {"dim": w.dim, "components": [{"index": list(i), "coeff": coeff_to_json(c)}
                                         for i, c in sorted(w.comps.items())]}


def form_from_json(data: dict) -> DifferentialForm:
    dim = data["dim"]
    out = DifferentialForm(dim)
    for comp in data["components"]:
        out = out + DifferentialForm.basis(dim, comp["index"], coeff_from_json(dim, comp["coeff"]))
    return out


def random_coeff(rng, dim: int, terms: int = 2, max_deg: int = 2, gaussian: bool = True) -> CoeffFn:
    out = CoeffFn(dim)
    for _ in range(terms):
        mono = [int(rng.integers(0, max_deg + 1)) for _ in range(dim)]
        rates = [int(rng.integers(0, 2)) if gaussian else 0 for _ in range(dim)]
        c = int(rng.integers(-3, 4))
        out = out + CoeffFn.monomial(dim, mono, rates, c)
    return out


def random_form(rng, dim: int, degree: int | None = None, terms: int = 2) -> DifferentialForm:
    out = DifferentialForm(dim)
    for idx in _subsets(dim):
        if degree is not None and len(idx) != degree:
            continue
        if rng.random() < 0.6:
            out = out + DifferentialForm.basis(dim, idx, random_coeff(rng, dim, terms))
    return out


class CompiledEnd:
    """Vectorized pointwise evaluation of an EndValuedForm (at u = 1 unless v is given)."""

    def __init__(self, X: EndValuedForm, v: complex = 1.0):
        self.dim = X.dim
        self.n = X.space.dim
        self.indices = sorted(X.comps)
        slot = {I: k for k, I in enumerate(self.indices)}
        comp, rows, cols, coef, monos, rates, atoms = [], [], [], [], [], [], []
        for I, m in X.comps.items():
            for (r, c), f in m.items():
                for (mono, rt, at), s in f.terms.items():
                    comp.append(slot[I])
                    rows.append(r)
                    cols.append(c)
                    coef.append(complex(s.evaluate(v)))
                    monos.append(mono)
                    rates.append([float(x) for x in rt])
                    atoms.append(at)
        self.comp = np.array(comp, dtype=int)
        self.rows = np.array(rows, dtype=int)
        self.cols = np.array(cols, dtype=int)
        self.coef = np.array(coef, dtype=complex)
        self.monos = np.array(monos, dtype=float).reshape(len(coef), self.dim)
        self.rates = np.array(rates, dtype=float).reshape(len(coef), self.dim)
        self.atoms = [(k, a) for k, a in enumerate(atoms) if a]

    def evaluate(self, point: Sequence[float]) -> dict[tuple[int, ...], np.ndarray]:
        x = np.asarray(point, dtype=float)
        out = np.zeros((len(self.indices), self.n, self.n), dtype=complex)
        if len(self.coef):
            vals = self.coef * np.prod(x ** self.monos, axis=1) * np.exp(-(self.rates @ (x * x)))
            for k, at in self.atoms:
                for axis, lam, side in at:
                    vals[k] *= erf_value(float(lam), side, x[axis])
            np.add.at(out, (self.comp, self.rows, self.cols), vals)
        return {I: out[k] for k, I in enumerate(self.indices)}


class NumericExp:
    """exp(X) at points, with optional partial derivatives via the Frechet derivative of expm."""

    def __init__(self, X: EndValuedForm, axes: int | None = None):
        # derivatives are taken along the first ``axes`` coordinates only
        self.frame = ExteriorFrame(X.dim, X.space)
        self.X = CompiledEnd(X)
        self.dX = [CompiledEnd(X.partial(j)) for j in range(X.dim if axes is None else axes)]

    def __call__(self, point: Sequence[float], derivatives: bool = False):
        L = self.frame.matrix(self.X.evaluate(point))
        if not derivatives:
            return self.frame.read(expm(L))
        derivs, E = [], None
        for dj in self.dX:
            E, dE = expm_frechet(L, self.frame.matrix(dj.evaluate(point)))
            derivs.append(self.frame.read(dE))
        if E is None:
            E = expm(L)
        return self.frame.read(E), derivs


def gauss_legendre_adaptive(fn, dims: int, tol: float = 1e-10, start: int = 10, max_nodes: int = 80):
    """Integrate a vector-valued fn over [0,1]^dims with tensor Gauss-Legendre rules of doubling order.

    Stops when two successive orders agree to ``tol`` relative to max(1, |result|).
    """
    prev = None
    n = start
    while True:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        nodes, weights = (nodes + 1) / 2, weights / 2
        total = None
        for idx in np.ndindex(*([n] * dims)):
            pt = nodes[list(idx)]
            w = float(np.prod(weights[list(idx)]))
            val = fn(pt) * w
            total = val if total is None else total + val
        scale = max(1.0, float(np.max(np.abs(total), initial=0.0)))
        if prev is not None and np.max(np.abs(total - prev), initial=0.0) < tol * scale:
            return total
        if n >= max_nodes:
            return total
        prev, n = total, 2 * n
