"""Super vector spaces and parity-aware sparse matrices of Scalars.

Basis order is always the even block followed by the odd block.  For a tensor
product the even block holds the pairs (a, b) with |a| + |b| even, in
lexicographic order of (a, b); the odd block likewise.  For a direct sum the
even block is the even part of the first summand followed by the even part of
the second, then the odd parts in the same order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import MixedParity, ShapeMismatch, SingularGram
from .scalars import ONE, ZERO, Scalar, to_scalar


@dataclass(frozen=True)
class SuperVectorSpace:
    dim_even: int
    dim_odd: int
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.dim_even + self.dim_odd

    def parity(self, index: int) -> int:
        return 0 if index < self.dim_even else 1

    def parities(self) -> list[int]:
        return [0] * self.dim_even + [1] * self.dim_odd

    def __str__(self):
        return f"R^{{{self.dim_even}|{self.dim_odd}}}"


def tensor_index(V: SuperVectorSpace, W: SuperVectorSpace) -> dict[tuple[int, int], int]:
    """Position of the basis vector a (x) b in the tensor block basis."""
    blocks: dict[int, list] = {0: [], 1: []}
    for a in range(V.dim):
        for b in range(W.dim):
            blocks[(V.parity(a) + W.parity(b)) % 2].append((a, b))
    order = blocks[0] + blocks[1]
    return {pair: k for k, pair in enumerate(order)}


def tensor_space(V: SuperVectorSpace, W: SuperVectorSpace) -> SuperVectorSpace:
    even = V.dim_even * W.dim_even + V.dim_odd * W.dim_odd
    odd = V.dim_even * W.dim_odd + V.dim_odd * W.dim_even
    return SuperVectorSpace(even, odd)


def sum_index(spaces: Sequence[SuperVectorSpace]) -> list[list[int]]:
    """For each summand, the positions of its basis vectors in the direct sum."""
    out = [[0] * V.dim for V in spaces]
    pos = 0
    for k, V in enumerate(spaces):
        for a in range(V.dim_even):
            out[k][a] = pos
            pos += 1
    for k, V in enumerate(spaces):
        for a in range(V.dim_even, V.dim):
            out[k][a] = pos
            pos += 1
    return out


def sum_space(spaces: Sequence[SuperVectorSpace]) -> SuperVectorSpace:
    return SuperVectorSpace(sum(V.dim_even for V in spaces), sum(V.dim_odd for V in spaces))


class SuperMap:
    """A linear map between super vector spaces, stored as a sparse dict of Scalars.

    ``parity`` is 0 or 1 for homogeneous maps and None for mixed ones.  The
    zero map takes whichever parity it is declared with (default even).
    """

    __slots__ = ("source", "target", "entries", "parity")

    def __init__(self, source: SuperVectorSpace, target: SuperVectorSpace,
                 entries: dict[tuple[int, int], Scalar] | None = None, parity: int | None | str = "auto"):
        self.source = source
        self.target = target
        self.entries = {k: v for k, v in (entries or {}).items() if v}
        found = {(target.parity(r) + source.parity(c)) % 2 for (r, c) in self.entries}
        if parity == "auto":
            parity = found.pop() if len(found) == 1 else (0 if not found else None)
        elif parity is not None and found - {parity}:
            raise MixedParity(f"entries are not all of parity {parity}")
        self.parity = parity

    # constructors

    @classmethod
    def from_dense(cls, rows, source: SuperVectorSpace, target: SuperVectorSpace | None = None,
                   parity="auto") -> "SuperMap":
        target = target or source
        if len(rows) != target.dim or any(len(r) != source.dim for r in rows):
            raise ShapeMismatch("dense matrix does not match the spaces")
        entries = {}
        for r, row in enumerate(rows):
            for c, x in enumerate(row):
                s = to_scalar(x)
                if s:
                    entries[(r, c)] = s
        return cls(source, target, entries, parity)

    @classmethod
    def identity(cls, V: SuperVectorSpace) -> "SuperMap":
        return cls(V, V, {(a, a): ONE for a in range(V.dim)}, 0)

    @classmethod
    def zero(cls, source: SuperVectorSpace, target: SuperVectorSpace | None = None, parity: int = 0) -> "SuperMap":
        return cls(source, target or source, {}, parity)

    @classmethod
    def grading(cls, V: SuperVectorSpace) -> "SuperMap":
        return cls(V, V, {(a, a): (ONE if V.parity(a) == 0 else -ONE) for a in range(V.dim)}, 0)

    # basic queries

    @property
    def shape(self) -> tuple[int, int]:
        return (self.target.dim, self.source.dim)

    def is_endo(self) -> bool:
        return self.source == self.target

    def __getitem__(self, rc) -> Scalar:
        return self.entries.get(rc, ZERO)

    def to_dense(self) -> list[list[Scalar]]:
        out = [[ZERO] * self.source.dim for _ in range(self.target.dim)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def to_numpy(self, v: complex = 1.0) -> np.ndarray:
        a = np.zeros(self.shape, dtype=complex)
        for (r, c), x in self.entries.items():
            a[r, c] = x.evaluate(v)
        return a

    def is_rational(self) -> bool:
        return all(x.is_rational() for x in self.entries.values())

    def is_zero(self) -> bool:
        return not self.entries

    def require_homogeneous(self) -> int:
        if self.parity is None:
            raise MixedParity("operation needs a homogeneous map")
        return self.parity

    # arithmetic

    def _check_same_shape(self, other: "SuperMap"):
        if self.source != other.source or self.target != other.target:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "SuperMap") -> "SuperMap":
        self._check_same_shape(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        if not other.entries:
            par = self.parity
        elif not self.entries:
            par = other.parity
        else:
            par = self.parity if self.parity == other.parity else "auto"
        return SuperMap(self.source, self.target, out, par if par is not None else "auto")

    def __neg__(self) -> "SuperMap":
        return SuperMap(self.source, self.target, {k: -v for k, v in self.entries.items()}, self.parity)

    def __sub__(self, other: "SuperMap") -> "SuperMap":
        return self + (-other)

    def scale(self, s) -> "SuperMap":
        s = to_scalar(s)
        return SuperMap(self.source, self.target, {k: s * v for k, v in self.entries.items()}, self.parity)

    def __rmul__(self, s) -> "SuperMap":
        return self.scale(s)

    def __matmul__(self, other: "SuperMap") -> "SuperMap":
        if self.source != other.target:
            raise ShapeMismatch(f"cannot compose {self.shape} after {other.shape}")
        rows: dict[int, list] = {}
        for (k, c), b in other.entries.items():
            rows.setdefault(k, []).append((c, b))
        out: dict[tuple[int, int], Scalar] = {}
        for (r, k), a in self.entries.items():
            for c, b in rows.get(k, ()):
                prod = a * b
                key = (r, c)
                t = out.get(key)
                out[key] = prod if t is None else t + prod
        if self.parity is None or other.parity is None:
            par = "auto"
        else:
            par = (self.parity + other.parity) % 2
        return SuperMap(other.source, self.target, out, par)

    def __pow__(self, k: int) -> "SuperMap":
        out = SuperMap.identity(self.source)
        for _ in range(k):
            out = out @ self
        return out

    def __eq__(self, other):
        if not isinstance(other, SuperMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.entries.items())))

    def transpose_conj(self) -> "SuperMap":
        return SuperMap(self.target, self.source,
                        {(c, r): v.conj() for (r, c), v in self.entries.items()}, self.parity)

    def restrict_blocks(self, parity: int) -> "SuperMap":
        """The homogeneous component of the given parity."""
        ents = {(r, c): v for (r, c), v in self.entries.items()
                if (self.target.parity(r) + self.source.parity(c)) % 2 == parity}
        return SuperMap(self.source, self.target, ents, parity)

    def __repr__(self):
        par = {0: "even", 1: "odd", None: "mixed"}[self.parity]
        return f"SuperMap({self.source} -> {self.target}, {par}, nnz={len(self.entries)})"

    def pretty(self) -> str:
        return "\n".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.to_dense())


def supertrace(T: SuperMap) -> Scalar:
    """Trace of the even block minus trace of the odd block."""
    if not T.is_endo():
        raise ShapeMismatch("supertrace needs an endomorphism")
    V = T.source
    total = ZERO
    for (r, c), v in T.entries.items():
        if r == c:
            total = total + (v if V.parity(r) == 0 else -v)
    return total


def super_commutator(a: SuperMap, b: SuperMap) -> SuperMap:
    pa, pb = a.require_homogeneous(), b.require_homogeneous()
    ab = a @ b
    ba = b @ a
    return ab - ba if (pa * pb) % 2 == 0 else ab + ba


def koszul_tensor(S: SuperMap, T: SuperMap) -> SuperMap:
    """(S (x) T)(v (x) w) = (-1)^{|T||v|} Sv (x) Tw in the tensor block basis."""
    S.require_homogeneous()
    pt = T.require_homogeneous()
    return _koszul_tensor_entrywise(S, T, pt)


def _koszul_tensor_entrywise(S: SuperMap, T: SuperMap, pt: int | None = None) -> SuperMap:
    src_idx = tensor_index(S.source, T.source)
    tgt_idx = tensor_index(S.target, T.target)
    src = tensor_space(S.source, T.source)
    tgt = tensor_space(S.target, T.target)
    out = {}
    for (a, c), s in S.entries.items():
        for (b, d), t in T.entries.items():
            par_t = (T.target.parity(b) + T.source.parity(d)) % 2
            val = s * t
            if par_t and S.source.parity(c):
                val = -val
            out[(tgt_idx[(a, b)], src_idx[(c, d)])] = val
    par = "auto"
    if S.parity is not None and T.parity is not None:
        par = (S.parity + T.parity) % 2
    return SuperMap(src, tgt, out, par)


def direct_sum(maps: Sequence[SuperMap]) -> SuperMap:
    src_idx = sum_index([m.source for m in maps])
    tgt_idx = sum_index([m.target for m in maps])
    out = {}
    for k, m in enumerate(maps):
        for (r, c), v in m.entries.items():
            out[(tgt_idx[k][r], src_idx[k][c])] = v
    pars = {m.parity for m in maps if m.entries} or {m.parity for m in maps} or {0}
    par = pars.pop() if len(pars) == 1 else "auto"
    return SuperMap(sum_space([m.source for m in maps]), sum_space([m.target for m in maps]), out, par)


@dataclass(frozen=True)
class InnerProduct:
    """Gram matrix on a super vector space; ``gram=None`` is the standard product."""
    space: SuperVectorSpace
    gram: SuperMap | None = None

    def is_standard(self) -> bool:
        return self.gram is None

    def matrix(self) -> SuperMap:
        return self.gram if self.gram is not None else SuperMap.identity(self.space)

    def inverse(self) -> SuperMap:
        if self.gram is None:
            return SuperMap.identity(self.space)
        dense = self.gram.to_dense()
        try:
            inv = linalg.inverse(dense, ZERO, ONE)
        except ZeroDivisionError as exc:
            raise SingularGram("Gram matrix is singular") from exc
        return SuperMap.from_dense(inv, self.space)


def adjoint(T: SuperMap, g: InnerProduct | None = None, h: InnerProduct | None = None) -> SuperMap:
    """T-dagger with <Tv, w>_h = <v, T-dagger w>_g, conjugate-linear in the first slot.

    ``g`` is the inner product on the source, ``h`` on the target (defaults to
    ``g`` for endomorphisms).
    """
    g = g or InnerProduct(T.source)
    h = h or (g if T.is_endo() else InnerProduct(T.target))
    star = T.transpose_conj()
    if g.is_standard() and h.is_standard():
        return star
    return g.inverse() @ star @ h.matrix()


def random_supermap(rng, V: SuperVectorSpace, parity: int, density: float = 0.7,
                    num_range: int = 3, with_irrational: bool = False) -> SuperMap:
    """Random homogeneous map with small rational (optionally sqrt2 / i) entries."""
    entries = {}
    for r in range(V.dim):
        for c in range(V.dim):
            if (V.parity(r) + V.parity(c)) % 2 != parity or rng.random() > density:
                continue
            q = Fraction(int(rng.integers(-num_range, num_range + 1)), int(rng.integers(1, 4)))
            s = Scalar.const(q)
            if with_irrational:
                s = s + Scalar.monomial(Fraction(int(rng.integers(-2, 3)), 1),
                                        i=int(rng.integers(0, 2)), sqrt2=int(rng.integers(0, 2)))
            if s:
                entries[(r, c)] = s
    return SuperMap(V, V, entries, parity)


def iter_parities(V: SuperVectorSpace) -> Iterable[int]:
    return (V.parity(a) for a in range(V.dim))
