"""The Clifford superalgebras Cl_{n,m} with exact structure constants.

Generators are f_1..f_n (square -1) and e_1..e_m (square +1); a basis word is a
bitmask whose bit k < n is f_{k+1} and bit n + j is e_{j+1}.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import MixedSignConvention, SignatureMismatch
from .scalars import ONE, ZERO, Scalar, to_scalar
from .superlinear import SuperMap, SuperVectorSpace

MAX_GENERATORS = 12


@contextmanager
def generator_bound(limit: int) -> Iterator[None]:
    """Temporarily allow signatures with up to ``limit`` generators."""
    global MAX_GENERATORS
    old, MAX_GENERATORS = MAX_GENERATORS, limit
    try:
        yield
    finally:
        MAX_GENERATORS = old


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class CliffordSignature:
    n: int = 0  # generators squaring to -1
    m: int = 0  # generators squaring to +1

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("signature entries must be nonnegative")
        if self.n + self.m > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators supported")

    @property
    def rank(self) -> int:
        return self.n + self.m

    @property
    def weight(self) -> int:
        """m - n: the power of u^(1/2) in the Clifford supertrace."""
        return self.m - self.n

    def square(self, gen: int) -> int:
        return -1 if gen < self.n else 1

    def gen_name(self, gen: int) -> str:
        return f"f{gen + 1}" if gen < self.n else f"e{gen - self.n + 1}"

    @classmethod
    def from_int(cls, k: int) -> "CliffordSignature":
        """Cl_k for k >= 0 and Cl_{0,-k} for k < 0."""
        return cls(k, 0) if k >= 0 else cls(0, -k)

    def __str__(self):
        return f"Cl_{{{self.n},{self.m}}}"


def word_product_sign(sig: CliffordSignature, a: int, b: int) -> int:
    """Sign s with (word a)(word b) = s * word (a xor b)."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += _popcount(x & b)
        x >>= 1
    sign = -1 if swaps & 1 else 1
    common = a & b
    if common & ((1 << sig.n) - 1):
        if _popcount(common & ((1 << sig.n) - 1)) & 1:
            sign = -sign
    return sign


class CliffordElement:
    __slots__ = ("signature", "terms")

    def __init__(self, signature: CliffordSignature, terms: Mapping[int, Scalar] | None = None):
        self.signature = signature
        self.terms = {w: to_scalar(c) for w, c in (terms or {}).items() if to_scalar(c)}

    @classmethod
    def scalar(cls, sig: CliffordSignature, c=1) -> "CliffordElement":
        return cls(sig, {0: to_scalar(c)})

    @classmethod
    def generator(cls, sig: CliffordSignature, gen: int) -> "CliffordElement":
        return cls(sig, {1 << gen: ONE})

    @staticmethod
    def f(sig: CliffordSignature, i: int) -> "CliffordElement":
        return CliffordElement.generator(sig, i - 1)

    @staticmethod
    def e(sig: CliffordSignature, j: int) -> "CliffordElement":
        return CliffordElement.generator(sig, sig.n + j - 1)

    def _check(self, other: "CliffordElement"):
        if self.signature != other.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO) + c
        return CliffordElement(self.signature, out)

    def __neg__(self):
        return CliffordElement(self.signature, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "CliffordElement":
        s = to_scalar(s)
        return CliffordElement(self.signature, {w: s * c for w, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, CliffordElement):
            return self.scale(other)
        return clifford_mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.signature == other.signature and self.terms == other.terms

    def __hash__(self):
        return hash((self.signature, frozenset(self.terms.items())))

    def parity(self) -> int | None:
        pars = {_popcount(w) & 1 for w in self.terms}
        if len(pars) > 1:
            return None
        return pars.pop() if pars else 0

    def word_name(self, w: int) -> str:
        names = [self.signature.gen_name(k) for k in range(self.signature.rank) if w >> k & 1]
        return " ".join(names) if names else "1"

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c}) {self.word_name(w)}" for w, c in sorted(self.terms.items()))

    __repr__ = __str__


def clifford_mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    a._check(b)
    sig = a.signature
    out: dict[int, Scalar] = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            s = word_product_sign(sig, wa, wb)
            c = ca * cb
            w = wa ^ wb
            out[w] = out.get(w, ZERO) + (c if s > 0 else -c)
    return CliffordElement(sig, out)


def gamma(sig: CliffordSignature, orientation: int = 1) -> CliffordElement:
    """2^{-(n+m)/2} f_1...f_n e_1...e_m, times the orientation sign."""
    coeff = Scalar.sqrt2_power(-sig.rank, orientation)
    return CliffordElement(sig, {(1 << sig.rank) - 1: coeff})


def star(a: CliffordElement) -> CliffordElement:
    """Anti-involution with f* = -f, e* = e, conjugating i."""
    sig = a.signature
    fmask = (1 << sig.n) - 1
    out = {}
    for w, c in a.terms.items():
        k = _popcount(w)
        sign = -1 if (k * (k - 1) // 2) & 1 else 1
        if _popcount(w & fmask) & 1:
            sign = -sign
        c = c.conj()
        out[w] = c if sign > 0 else -c
    return CliffordElement(sig, out)


def _pure_kind(sig: CliffordSignature) -> int:
    if sig.n and not sig.m:
        return 1
    if sig.m and not sig.n:
        return -1
    return 0


def tensor_signature(s1: CliffordSignature, s2: CliffordSignature) -> CliffordSignature:
    return CliffordSignature(s1.n + s2.n, s1.m + s2.m)


def generator_embedding(s1: CliffordSignature, s2: CliffordSignature) -> tuple[list[int], list[int]]:
    """Where the generators of each factor land in the tensor signature."""
    first = [k if k < s1.n else s2.n + k for k in range(s1.rank)]
    second = [s1.n + k if k < s2.n else s1.rank + k for k in range(s2.rank)]
    return first, second


def _embed_word(w: int, positions: list[int]) -> int:
    out = 0
    for k, pos in enumerate(positions):
        if w >> k & 1:
            out |= 1 << pos
    return out


def embed(x: CliffordElement, positions: list[int], target: CliffordSignature) -> CliffordElement:
    """Image of x under the algebra map sending generator k to generator positions[k]."""
    out = CliffordElement(target)
    for w, c in x.terms.items():
        word = CliffordElement.scalar(target, c)
        for k in range(x.signature.rank):
            if w >> k & 1:
                word = word * CliffordElement.generator(target, positions[k])
        out = out + word
    return out


def tensor_iso(x: CliffordElement, y: CliffordElement) -> CliffordElement:
    """Image of x (x) y under the graded-tensor isomorphism onto the combined signature.

    The first factor's f's come first, then the second's f's, then the first's
    e's, then the second's e's.
    """
    k1, k2 = _pure_kind(x.signature), _pure_kind(y.signature)
    if k1 * k2 < 0:
        raise MixedSignConvention(f"{x.signature} and {y.signature} have opposite sign conventions")
    target = tensor_signature(x.signature, y.signature)
    p1, p2 = generator_embedding(x.signature, y.signature)
    return embed(x, p1, target) * embed(y, p2, target)


def basis_words(sig: CliffordSignature) -> list[int]:
    """All 2^(n+m) words, even words first, each block in increasing bitmask order."""
    words = range(1 << sig.rank)
    return [w for w in words if not _popcount(w) & 1] + [w for w in words if _popcount(w) & 1]


def regular_representation(sig: CliffordSignature) -> tuple[SuperVectorSpace, list[SuperMap]]:
    """Left multiplication by each generator on Cl_{n,m} itself."""
    words = basis_words(sig)
    index = {w: k for k, w in enumerate(words)}
    half = len(words) // 2 if sig.rank else 1
    V = SuperVectorSpace(half, len(words) - half)
    mats = []
    for g in range(sig.rank):
        gw = 1 << g
        entries = {}
        for w in words:
            s = word_product_sign(sig, gw, w)
            entries[(index[gw ^ w], index[w])] = ONE if s > 0 else -ONE
        mats.append(SuperMap(V, V, entries, 1))
    return V, mats


def left_matrix(x: CliffordElement) -> SuperMap:
    """Left multiplication by an arbitrary element on the regular representation."""
    sig = x.signature
    words = basis_words(sig)
    index = {w: k for k, w in enumerate(words)}
    half = len(words) // 2 if sig.rank else 1
    V = SuperVectorSpace(half, len(words) - half)
    entries: dict[tuple[int, int], Scalar] = {}
    for wx, c in x.terms.items():
        for w in words:
            s = word_product_sign(sig, wx, w)
            key = (index[wx ^ w], index[w])
            entries[key] = entries.get(key, ZERO) + (c if s > 0 else -c)
    return SuperMap(V, V, entries, "auto")
