"""Finite-rank Clifford modules: examples, checks, tensor products and traces.

A module records an ``orientation`` sign used in its volume element; builtin
modules have orientation +1 and tensor products/reductions track the sign
so that the volume element of a tensor product is the tensor product of the
factors' volume elements.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .clifford import (CliffordElement, CliffordSignature, basis_words, generator_embedding,
                       tensor_signature)
from .errors import NotEquivariant, NotReducible, UnknownName
from .scalars import I, ONE, ZERO, Scalar, render, to_scalar
from .superlinear import (InnerProduct, SuperMap, SuperVectorSpace, adjoint, direct_sum,
                          koszul_tensor, sum_index, sum_space, tensor_index,
                          tensor_space)


@dataclass(eq=False)
class CliffordModule:
    signature: CliffordSignature
    space: SuperVectorSpace
    rho: tuple[SuperMap, ...]
    inner: InnerProduct | None = None
    orientation: int = 1
    name: str = ""
    complex_linear: bool = False
    self_adjoint_checked: bool = False

    def __post_init__(self):
        self.rho = tuple(self.rho)
        if self.inner is None:
            self.inner = InnerProduct(self.space)
        if len(self.rho) != self.signature.rank:
            raise ValueError(f"{self.signature} needs {self.signature.rank} generator matrices")

    @property
    def dim(self) -> int:
        return self.space.dim

    def identity(self) -> SuperMap:
        return SuperMap.identity(self.space)

    def word_matrix(self, word: int) -> SuperMap:
        out = self.identity()
        for k in range(self.signature.rank):
            if word >> k & 1:
                out = out @ self.rho[k]
        return out

    def action(self, x: CliffordElement) -> SuperMap:
        if x.signature != self.signature:
            raise ValueError(f"element of {x.signature} acting on a {self.signature}-module")
        out = SuperMap.zero(self.space)
        for w, c in x.terms.items():
            out = out + self.word_matrix(w).scale(c)
        return out

    @cached_property
    def gamma_matrix(self) -> SuperMap:
        """orientation * 2^{-(n+m)/2} * rho(f_1)...rho(e_m)."""
        prod = self.word_matrix((1 << self.signature.rank) - 1)
        return prod.scale(Scalar.sqrt2_power(-self.signature.rank, self.orientation))

    def adjoint(self, T: SuperMap) -> SuperMap:
        return adjoint(T, self.inner)

    def __repr__(self):
        return f"CliffordModule({self.name or '?'}, {self.signature}, {self.space})"


# --- builtin examples ----------------------------------------------------------


def _from_rows(rows, V: SuperVectorSpace) -> SuperMap:
    return SuperMap.from_dense(rows, V, V, parity=1)


def _qmul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0)


def _qconj(a):
    return (a[0], -a[1], -a[2], -a[3])


def _omul(x, y):
    # Cayley-Dickson doubling: (a, b)(c, d) = (ac - d*b, da + bc*)
    a, b, c, d = x[:4], x[4:], y[:4], y[4:]
    left = tuple(s - t for s, t in zip(_qmul(a, c), _qmul(_qconj(d), b)))
    right = tuple(s + t for s, t in zip(_qmul(d, a), _qmul(b, _qconj(c))))
    return left + right


def _oconj(x):
    return _qconj(x[:4]) + tuple(-t for t in x[4:])


def _left_mult_rows(mul, q, n) -> list[list[int]]:
    cols = [mul(q, tuple(int(i == k) for i in range(n))) for k in range(n)]
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def _division_algebra_module(mul, conj, n: int, name: str) -> CliffordModule:
    """q acts by [[0, L_q], [-L_{conj q}, 0]] on R^{n|n}.

    Generators f_1..f_{n-1} are the imaginary units and f_n is the unit 1;
    this ordering fixes the orientation of the volume element.
    """
    V = SuperVectorSpace(n, n)
    units = list(range(1, n)) + [0]
    rho = []
    for u in units:
        q = tuple(int(i == u) for i in range(n))
        A = _left_mult_rows(mul, q, n)
        B = _left_mult_rows(mul, conj(q), n)
        rows = [[0] * (2 * n) for _ in range(2 * n)]
        for r in range(n):
            for c in range(n):
                rows[r][n + c] = A[r][c]
                rows[n + r][c] = -B[r][c]
        rho.append(_from_rows(rows, V))
    return CliffordModule(CliffordSignature(n, 0), V, rho, name=name)


def zero_module(sig: CliffordSignature = CliffordSignature()) -> CliffordModule:
    V = SuperVectorSpace(0, 0)
    return CliffordModule(sig, V, [SuperMap.zero(V, parity=1) for _ in range(sig.rank)], name="zero")


def trivial_module() -> CliffordModule:
    """R^{1|0} over Cl_{0,0}."""
    return CliffordModule(CliffordSignature(), SuperVectorSpace(1, 0), [], name="R")


def builtin_module(name: str, signature: CliffordSignature | None = None) -> CliffordModule:
    if name == "cl11_r11":
        V = SuperVectorSpace(1, 1)
        f = _from_rows([[0, 1], [-1, 0]], V)
        e = _from_rows([[0, 1], [1, 0]], V)
        return CliffordModule(CliffordSignature(1, 1), V, [f, e], name=name)
    if name == "cl4_quat":
        return _division_algebra_module(_qmul, _qconj, 4, name)
    if name == "cl8_oct":
        return _division_algebra_module(_omul, _oconj, 8, name)
    if name == "cl2_complex":
        V = SuperVectorSpace(1, 1)
        f1 = _from_rows([[0, 1], [-1, 0]], V)
        f2 = SuperMap(V, V, {(0, 1): I, (1, 0): I}, 1)
        return CliffordModule(CliffordSignature(2, 0), V, [f1, f2], name=name, complex_linear=True)
    if name == "cl1_regular":
        # basis (1, f); f.1 = f and f.f = -1
        V = SuperVectorSpace(1, 1)
        f = _from_rows([[0, -1], [1, 0]], V)
        return CliffordModule(CliffordSignature(1, 0), V, [f], name=name)
    if name == "zero":
        return zero_module(signature or CliffordSignature())
    raise UnknownName(name)


BUILTIN_NAMES = ("cl11_r11", "cl4_quat", "cl8_oct", "cl2_complex", "cl1_regular", "zero")


def restrict(M: CliffordModule, keep: Sequence[int], name: str = "") -> CliffordModule:
    """Keep only the listed generators (indices into M.rho); f's must precede e's."""
    n = sum(1 for k in keep if k < M.signature.n)
    if any(k >= M.signature.n for k in keep[:n]) or any(k < M.signature.n for k in keep[n:]):
        raise ValueError("kept generators must list f's before e's")
    sig = CliffordSignature(n, len(keep) - n)
    return CliffordModule(sig, M.space, [M.rho[k] for k in keep], M.inner,
                          name=name or f"{M.name}|{list(keep)}", complex_linear=M.complex_linear)


def forget_f(M: CliffordModule) -> CliffordModule:
    """The Cl_{0,m}-module obtained by dropping every f generator."""
    return restrict(M, list(range(M.signature.n, M.signature.rank)), name=f"{M.name}-e")


def forget_e(M: CliffordModule) -> CliffordModule:
    return restrict(M, list(range(M.signature.n)), name=f"{M.name}-f")


# --- checks ------------------------------------------------------------------------


@dataclass
class ModuleReport:
    failures: list[tuple] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed


def check_module(M: CliffordModule, check_adjoint: bool = True) -> ModuleReport:
    """Verify parity, the Clifford relations and (optionally) the *-compatibility."""
    rep = ModuleReport()
    sig = M.signature
    ident = M.identity()
    for i, r in enumerate(M.rho):
        if r.source != M.space or r.target != M.space:
            rep.failures.append(("shape", i))
            continue
        if r.parity != 1 and not r.is_zero():
            rep.failures.append(("parity", i))
    if rep.failures:
        return rep
    for i in range(sig.rank):
        for j in range(i, sig.rank):
            a, b = M.rho[i], M.rho[j]
            comm = a @ b + b @ a
            expected = ident.scale(2 * sig.square(i)) if i == j else SuperMap.zero(M.space)
            if comm.entries != expected.entries:
                rep.failures.append(("relation", i, j))
    if check_adjoint:
        for i, r in enumerate(M.rho):
            adj = M.adjoint(r)
            want = r if sig.square(i) > 0 else -r
            if adj.entries != want.entries:
                rep.failures.append(("adjoint", i))
        if not rep.failures:
            M.self_adjoint_checked = True
    return rep


def action_is_bijective(M: CliffordModule) -> bool:
    """Whether Cl_{n,m} -> End(V) is an isomorphism (dimension count plus independence)."""
    sig = M.signature
    if (1 << sig.rank) != M.dim ** 2:
        return False
    ech = linalg.Echelon()
    for w in basis_words(sig):
        mat = M.word_matrix(w)
        row = {r * M.dim + c: v for (r, c), v in mat.entries.items()}
        if not ech.add(row):
            return False
    return True


def is_equivariant(M: CliffordModule, T: SuperMap, N: CliffordModule | None = None) -> bool:
    N = N or M
    p = T.require_homogeneous()
    for a, b in zip(M.rho, N.rho):
        lhs = T @ a
        rhs = b @ T
        if (lhs - rhs if p == 0 else lhs + rhs).entries:
            return False
    return True


# --- constructions -----------------------------------------------------------------


def module_sum(*modules: CliffordModule) -> CliffordModule:
    sig = modules[0].signature
    if any(M.signature != sig for M in modules):
        raise ValueError("direct sum needs equal signatures")
    V = sum_space([M.space for M in modules])
    rho = [direct_sum([M.rho[k] for M in modules]) for k in range(sig.rank)]
    rho = [SuperMap(V, V, r.entries, 1) for r in rho]
    if all(M.inner.is_standard() for M in modules):
        inner = InnerProduct(V)
    else:
        inner = InnerProduct(V, direct_sum([M.inner.matrix() for M in modules]))
    orient = {M.orientation for M in modules if M.dim}
    return CliffordModule(sig, V, rho, inner, orientation=orient.pop() if len(orient) == 1 else 1,
                          name="+".join(M.name for M in modules),
                          complex_linear=any(M.complex_linear for M in modules))


def module_power(M: CliffordModule, k: int) -> CliffordModule:
    return module_sum(*([M] * k))


def module_tensor(M: CliffordModule, N: CliffordModule) -> CliffordModule:
    """Graded tensor product; M's f's, then N's f's, then M's e's, then N's e's."""
    s1, s2 = M.signature, N.signature
    sig = tensor_signature(s1, s2)
    p1, p2 = generator_embedding(s1, s2)
    V = tensor_space(M.space, N.space)
    rho: list[SuperMap | None] = [None] * sig.rank
    idN = N.identity()
    idM = M.identity()
    for k, g in enumerate(M.rho):
        rho[p1[k]] = koszul_tensor(g, idN)
    for k, g in enumerate(N.rho):
        rho[p2[k]] = koszul_tensor(idM, g)
    if M.inner.is_standard() and N.inner.is_standard():
        inner = InnerProduct(V)
    else:
        inner = InnerProduct(V, koszul_tensor(M.inner.matrix(), N.inner.matrix()))
    sign = -1 if (s1.m * s2.n) % 2 else 1
    return CliffordModule(sig, V, rho, inner, orientation=M.orientation * N.orientation * sign,
                          name=f"({M.name})x({N.name})",
                          complex_linear=M.complex_linear or N.complex_linear)


def parity_reverse(M: CliffordModule) -> tuple[CliffordModule, SuperMap]:
    """Pi M with generators acting by -rho, plus the odd identity map M -> Pi M."""
    V = M.space
    W = SuperVectorSpace(V.dim_odd, V.dim_even)
    # old index a (odd block) -> new even block, old even block -> new odd block
    new = [V.dim_odd + a if a < V.dim_even else a - V.dim_even for a in range(V.dim)]
    rho = [SuperMap(W, W, {(new[r], new[c]): -v for (r, c), v in g.entries.items()}, 1) for g in M.rho]
    if M.inner.is_standard():
        inner = InnerProduct(W)
    else:
        G = M.inner.matrix()
        inner = InnerProduct(W, SuperMap(W, W, {(new[r], new[c]): v for (r, c), v in G.entries.items()}, 0))
    P = SuperMap(V, W, {(new[a], a): ONE for a in range(V.dim)}, 1)
    return (CliffordModule(M.signature, W, rho, inner, orientation=M.orientation,
                           name=f"Pi({M.name})", complex_linear=M.complex_linear), P)


# --- traces ------------------------------------------------------------------------


def clifford_supertrace(M: CliffordModule, T: SuperMap | None = None, strict: bool = False) -> Scalar:
    """sTr(u^{(m-n)/2} Gamma o T) with Gamma acting through rho."""
    if T is None:
        T = M.identity()
    if strict and not is_equivariant(M, T):
        raise NotEquivariant("T does not graded-commute with the Clifford action")
    G = M.gamma_matrix
    rows: dict[int, list] = {}
    for (k, c), v in T.entries.items():
        rows.setdefault(k, []).append((c, v))
    total = ZERO
    V = M.space
    for (a, k), g in G.entries.items():
        for c, t in rows.get(k, ()):
            if c == a:
                prod = g * t
                total = total + (prod if V.parity(a) == 0 else -prod)
    return total * Scalar.u_power(M.signature.weight)


# --- equivariant maps ---------------------------------------------------------------


def _to_field(x: Scalar, rational: bool):
    return x.as_fraction() if rational else x


def equivariant_hom(M: CliffordModule, N: CliffordModule, parity: int | None = None) -> list[SuperMap]:
    """Basis of {phi : phi rho_M(g) = (-1)^{|phi||g|} rho_N(g) phi} of the given parity."""
    if M.signature != N.signature:
        raise ValueError("equivariant maps need equal signatures")
    if parity is None:
        return equivariant_hom(M, N, 0) + equivariant_hom(M, N, 1)
    V, W = M.space, N.space
    rational = all(g.is_rational() for g in M.rho + N.rho)
    one = Fraction(1) if rational else ONE
    zero = Fraction(0) if rational else ZERO
    var = {}
    for r in range(W.dim):
        for c in range(V.dim):
            if (W.parity(r) + V.parity(c)) % 2 == parity:
                var[(r, c)] = len(var)
    if not var:
        return []
    sign = -1 if parity else 1
    ech = linalg.Echelon()
    for gM, gN in zip(M.rho, N.rho):
        col_of_M: dict[int, list] = {}
        for (k, c), v in gM.entries.items():
            col_of_M.setdefault(c, []).append((k, _to_field(v, rational)))
        row_of_N: dict[int, list] = {}
        for (r, k), v in gN.entries.items():
            row_of_N.setdefault(r, []).append((k, _to_field(v, rational)))
        for r in range(W.dim):
            for c in range(V.dim):
                row: dict[int, object] = {}
                for k, v in col_of_M.get(c, ()):
                    x = var.get((r, k))
                    if x is not None:
                        row[x] = row.get(x, zero) + v
                for k, v in row_of_N.get(r, ()):
                    x = var.get((k, c))
                    if x is not None:
                        row[x] = row.get(x, zero) - sign * v
                if row:
                    ech.add(row)
    inverse_var = {x: rc for rc, x in var.items()}
    out = []
    for vec in ech.nullspace(len(var), zero, one):
        ents = {inverse_var[x]: (Scalar.const(v) if rational else v) for x, v in vec.items()}
        out.append(SuperMap(V, W, ents, parity))
    return out


def combine(basis: Sequence[SuperMap], coeffs: Sequence) -> SuperMap:
    out = SuperMap.zero(basis[0].source, basis[0].target, basis[0].parity)
    for b, c in zip(basis, coeffs):
        if c:
            out = out + b.scale(to_scalar(Fraction(c)))
    return out


def exact_det(T: SuperMap) -> Scalar:
    dense = T.to_dense()
    if T.is_rational():
        ints = [[x.as_fraction() for x in row] for row in dense]
        if all(x.denominator == 1 for row in ints for x in row):
            return Scalar.const(linalg.det_integer([[int(x) for x in row] for row in ints]))
        return Scalar.const(linalg.det(ints))
    return linalg.det(dense)


def find_invertible(basis: Sequence[SuperMap], seed: int = 0, trials: int = 200,
                    rational_trials: int = 50) -> tuple[SuperMap, Scalar, list] | None:
    """Search combinations of ``basis`` for an invertible map.

    Single basis elements first, then coefficients in {-2..2}, then random
    rationals; a float determinant screens candidates before the exact one.
    """
    if not basis or basis[0].source.dim != basis[0].target.dim:
        return None
    rng = np.random.default_rng(seed)
    k = len(basis)
    candidates: list[list] = [[int(i == j) for j in range(k)] for i in range(k)]
    candidates += [list(rng.integers(-2, 3, size=k)) for _ in range(trials)]
    candidates += [[Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10))) for _ in range(k)]
                   for _ in range(rational_trials)]
    for coeffs in candidates:
        T = combine(basis, coeffs)
        num = T.to_numpy()
        if num.size and abs(np.linalg.det(num)) < 1e-9 * max(1.0, np.abs(num).max()) ** num.shape[0]:
            continue
        d = exact_det(T)
        if d:
            return T, d, [Fraction(c) for c in coeffs]
    return None


# --- extension witnesses -------------------------------------------------------------


@dataclass(eq=False)
class ExtensionWitness:
    base: CliffordModule
    extra: SuperMap
    square_sign: int = 1


def extension_check(W: ExtensionWitness) -> bool:
    M, J = W.base, W.extra
    if J.source != M.space or J.target != M.space:
        return False
    if J.parity != 1:
        return False
    if (J @ J).entries != M.identity().scale(W.square_sign).entries:
        return False
    for g in M.rho:
        if (J @ g + g @ J).entries:
            return False
    adj = M.adjoint(J)
    want = J if W.square_sign > 0 else -J
    return adj.entries == want.entries


def extended_module(W: ExtensionWitness) -> CliffordModule:
    """The module with the witness appended as a new generator."""
    M = W.base
    sig = M.signature
    if W.square_sign > 0:
        new_sig = CliffordSignature(sig.n, sig.m + 1)
        rho = list(M.rho) + [W.extra]
    else:
        new_sig = CliffordSignature(sig.n + 1, sig.m)
        rho = list(M.rho[:sig.n]) + [W.extra] + list(M.rho[sig.n:])
    return CliffordModule(new_sig, M.space, rho, M.inner, name=f"{M.name}+ext",
                          complex_linear=M.complex_linear)


def _sqrt_in_ring(q: Fraction) -> Scalar | None:
    """sqrt(q) when it lies in Q(sqrt2), else None."""
    from math import isqrt

    if q <= 0:
        return None
    for mult, r2 in ((1, 0), (2, 1)):
        x = q / mult
        n, d = x.numerator, x.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Scalar.monomial(Fraction(rn, rd), sqrt2=r2)
    return None


def search_extension(M: CliffordModule, square_sign: int = 1, max_coeff: int = 2,
                     max_support: int = 4) -> ExtensionWitness | None:
    """Search for an odd J graded-commuting with M, J^2 = square_sign, (skew-)self-adjoint."""
    odd = equivariant_hom(M, M, 1)
    sym = []
    for b in odd:
        adj = M.adjoint(b)
        c = b + adj if square_sign > 0 else b - adj
        if c.entries:
            sym.append(SuperMap(c.source, c.target, c.entries, 1))
    # independent subset
    ech = linalg.Echelon()
    basis = []
    for b in sym:
        row = {r * M.dim + c: v for (r, c), v in b.entries.items()}
        if ech.add(row):
            basis.append(b)
    ident = M.identity()
    values = [v for v in range(-max_coeff, max_coeff + 1) if v]
    for support in range(1, min(max_support, len(basis)) + 1):
        for idx in itertools.combinations(range(len(basis)), support):
            for coeffs in itertools.product(values, repeat=support):
                if coeffs[0] < 0:
                    continue
                J = SuperMap.zero(M.space, parity=1)
                for i, c in zip(idx, coeffs):
                    J = J + basis[i].scale(c)
                sq = J @ J
                diag = sq[(0, 0)] if M.dim else ZERO
                if not diag.is_rational() or sq.entries != ident.scale(diag).entries:
                    continue
                kappa = diag.as_fraction() * square_sign
                root = _sqrt_in_ring(kappa)
                if root is None:
                    continue
                W = ExtensionWitness(M, SuperMap(M.space, M.space, J.scale(root.inv()).entries, 1), square_sign)
                if extension_check(W):
                    return W
    return None


def swap_witness(W: CliffordModule, A: SuperMap) -> ExtensionWitness:
    """Witness on W + W exchanging the copies by [[0, A], [A^{-1}, 0]].

    ``A`` must be odd, anticommute with W's generators and satisfy A^2 = -1,
    so that the exchange squares to the identity.
    """
    S = module_sum(W, W)
    idx = sum_index([W.space, W.space])
    ents = {}
    for (r, c), v in A.entries.items():
        ents[(idx[0][r], idx[1][c])] = v
        ents[(idx[1][r], idx[0][c])] = -v
    return ExtensionWitness(S, SuperMap(S.space, S.space, ents, 1), 1)


def pi_swap_witness(W: CliffordModule) -> tuple[ExtensionWitness, SuperMap]:
    """Witness on W + Pi W given by [[0, P^{-1}], [P, 0]], P the odd identity W -> Pi W.

    Also returns the inclusion of W + Pi W as a module (the identity here).
    """
    PW, P = parity_reverse(W)
    S = module_sum(W, PW)
    ia, ib = sum_index([W.space, PW.space])
    ents = {}
    for (r, c), v in P.entries.items():
        ents[(ib[r], ia[c])] = v
        ents[(ia[c], ib[r])] = v
    return ExtensionWitness(S, SuperMap(S.space, S.space, ents, 1), 1), S.identity()


# --- Morita reduction ------------------------------------------------------------------


def _left_inverse(B: list[list[Fraction]]) -> list[list[Fraction]]:
    """(B^T B)^{-1} B^T for a full-column-rank rational matrix."""
    rows, cols = len(B), len(B[0]) if B else 0
    BtB = [[sum(B[r][i] * B[r][j] for r in range(rows)) for j in range(cols)] for i in range(cols)]
    inv = linalg.inverse(BtB)
    return [[sum(inv[i][k] * B[r][k] for k in range(cols)) for r in range(rows)] for i in range(cols)]


def morita_reduce(M: CliffordModule) -> tuple[CliffordModule, SuperMap]:
    """Split M = R^{1|1} (x) X along the last f and last e generators.

    Returns X (over Cl_{a-1,b-1}) and the isomorphism R^{1|1} (x) X -> M.
    """
    sig = M.signature
    if sig.n < 1 or sig.m < 1:
        raise NotReducible("need at least one f and one e generator")
    if not all(g.is_rational() for g in M.rho):
        raise NotReducible("reduction implemented for rational modules")
    fa, eb = sig.n - 1, sig.rank - 1
    F, E = M.rho[fa], M.rho[eb]
    FE = F @ E
    proj = (M.identity() + FE).scale(Fraction(1, 2))
    dense = [[x.as_fraction() for x in row] for row in proj.to_dense()]
    cols = linalg.column_space_basis(dense)
    V = M.space
    even_cols = [c for c in cols if V.parity(c) == 0]
    odd_cols = [c for c in cols if V.parity(c) == 1]
    if 2 * len(cols) != M.dim:
        raise NotReducible(f"projector rank {len(cols)} is not half of {M.dim}")
    X_space = SuperVectorSpace(len(even_cols), len(odd_cols))
    chosen = even_cols + odd_cols
    B = [[dense[r][c] for c in chosen] for r in range(M.dim)]
    Bplus = _left_inverse(B)
    Bmap = SuperMap(X_space, V, {(r, j): Scalar.const(B[r][j]) for r in range(M.dim)
                                 for j in range(len(chosen)) if B[r][j]}, 0)
    Bplus_map = SuperMap(V, X_space, {(j, r): Scalar.const(Bplus[j][r]) for j in range(len(chosen))
                                      for r in range(M.dim) if Bplus[j][r]}, 0)
    keep = [k for k in range(sig.rank) if k not in (fa, eb)]
    rho_X = [SuperMap(X_space, X_space, (Bplus_map @ M.rho[k] @ Bmap).entries, 1) for k in keep]
    gram = Bmap.transpose_conj() @ M.inner.matrix() @ Bmap
    inner = InnerProduct(X_space) if gram.entries == SuperMap.identity(X_space).entries \
        else InnerProduct(X_space, SuperMap(X_space, X_space, gram.entries, 0))
    sign = -1 if (sig.m - 1) % 2 else 1
    X = CliffordModule(CliffordSignature(sig.n - 1, sig.m - 1), X_space, rho_X, inner,
                       orientation=M.orientation * sign, name=f"red({M.name})",
                       complex_linear=M.complex_linear)
    # Phi(v0 (x) x) = B x, Phi(v1 (x) x) = E B x, with R^{1|1} the first factor
    R11 = builtin_module("cl11_r11")
    T = tensor_space(R11.space, X_space)
    tidx = tensor_index(R11.space, X_space)
    EB = E @ Bmap
    ents = {}
    for j in range(X_space.dim):
        for (r, c), v in Bmap.entries.items():
            if c == j:
                ents[(r, tidx[(0, j)])] = v
        for (r, c), v in EB.entries.items():
            if c == j:
                ents[(r, tidx[(1, j)])] = v
    Phi = SuperMap(T, V, ents, 0)
    if linalg.rank([{c: v for (r, c), v in Phi.entries.items() if r == row} for row in range(V.dim)]) != V.dim:
        raise NotReducible("factorization map is not invertible")
    checks = [(fa, koszul_tensor(R11.rho[0], SuperMap.identity(X_space))),
              (eb, koszul_tensor(R11.rho[1], SuperMap.identity(X_space)))]
    checks += [(k, koszul_tensor(R11.identity(), g)) for k, g in zip(keep, rho_X)]
    for k, g in checks:
        if (M.rho[k] @ Phi - Phi @ g).entries:
            raise NotReducible(f"generator {sig.gen_name(k)} is not intertwined")
    return X, Phi


# --- JSON ------------------------------------------------------------------------------


def map_to_json(T: SuperMap) -> list[list[str]]:
    return [[render(x) for x in row] for row in T.to_dense()]


def module_to_json(M: CliffordModule) -> dict:
    return {
        "signature": [M.signature.n, M.signature.m],
        "dims": [M.space.dim_even, M.space.dim_odd],
        "generators": [map_to_json(g) for g in M.rho],
        "gram": None if M.inner.is_standard() else map_to_json(M.inner.gram),
        "orientation": M.orientation,
        "name": M.name,
        "complex_linear": M.complex_linear,
    }


def module_from_json(data: dict | str) -> CliffordModule:
    if isinstance(data, str):
        return builtin_module(data)
    if "builtin" in data:
        M = builtin_module(data["builtin"])
        if "keep" in data:
            M = restrict(M, data["keep"], name=data.get("name", ""))
        return M
    sig = CliffordSignature(*data["signature"])
    V = SuperVectorSpace(*data["dims"])
    rho = [SuperMap.from_dense(g, V, V, parity=1) for g in data["generators"]]
    inner = InnerProduct(V) if data.get("gram") is None else InnerProduct(V, SuperMap.from_dense(data["gram"], V))
    return CliffordModule(sig, V, rho, inner, orientation=data.get("orientation", 1),
                          name=data.get("name", ""), complex_linear=data.get("complex_linear", False))


def dumps(M: CliffordModule) -> str:
    return json.dumps(module_to_json(M), indent=1)


def random_equivariant(M: CliffordModule, rng, parity: int | None = None, coeff: int = 3) -> SuperMap:
    """Random integer combination of an equivariant basis (of one parity)."""
    if parity is None:
        parity = int(rng.integers(0, 2))
    basis = equivariant_hom(M, M, parity)
    if not basis:
        return SuperMap.zero(M.space, parity=parity)
    coeffs = [int(rng.integers(-coeff, coeff + 1)) for _ in basis]
    return combine(basis, coeffs)


def iter_generators(M: CliffordModule) -> Iterable[tuple[str, SuperMap]]:
    for k, g in enumerate(M.rho):
        yield M.signature.gen_name(k), g
