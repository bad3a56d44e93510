"""Superconnections on trivial bundles over R^d and their Chern and Chern-Simons forms.

A superconnection is stored as d + X with X = sum_j X_(j), X_(j) an
endomorphism-valued j-form (X_(1) is the connection 1-form).  Curvatures are
formed at u = 1; the degree-K part of exp(-u A(u)^2) equals u^{K/2} times the
degree-K part at u = 1, which is how u-powers are restored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .cmodules import CliffordModule, ExtensionWitness, builtin_module, extension_check, forget_e, module_sum, \
    module_tensor
from .errors import FiberMismatch, FlagMissing, NonCentralBody, NotIsometric, WitnessInvalid
from .forms import (CoeffFn, DifferentialForm, EndValuedForm, NumericExp, d_end, d_exterior,
                    dirichlet_integral, exp_central, gauss_legendre_adaptive, merge_sign)
from .scalars import Scalar
from .superlinear import InnerProduct, SuperMap, SuperVectorSpace, sum_index, tensor_index, tensor_space

Index = tuple[int, ...]


# --- endomorphism-valued helpers ----------------------------------------------------------


def end_adjoint(X: EndValuedForm, inner: InnerProduct) -> EndValuedForm:
    """Componentwise matrix adjoint (conjugating coefficients), no form-degree sign."""
    G = None if inner.is_standard() else inner.matrix()
    Ginv = None if inner.is_standard() else inner.inverse()
    out = {}
    for I, m in X.comps.items():
        t = {(c, r): f.map_scalars(lambda s: s.conj()) for (r, c), f in m.items()}
        if G is not None:
            t = _conj_by(Ginv, t, G)
        out[I] = t
    return EndValuedForm(X.dim, X.space, out)


def _conj_by(left: SuperMap, mat: dict, right: SuperMap) -> dict:
    """left @ mat @ right for a CoeffFn-valued matrix and scalar matrices."""
    tmp: dict = {}
    for (r, k), f in mat.items():
        for (k2, c), s in right.entries.items():
            if k2 == k:
                tmp[(r, c)] = tmp[(r, c)] + f.scale(s) if (r, c) in tmp else f.scale(s)
    out: dict = {}
    for (a, r), s in left.entries.items():
        for (r2, c), f in tmp.items():
            if r2 == r:
                out[(a, c)] = out[(a, c)] + f.scale(s) if (a, c) in out else f.scale(s)
    return {k: v for k, v in out.items() if v}


def conjugate_map(X: EndValuedForm, left: SuperMap, right: SuperMap) -> EndValuedForm:
    """left o X o right, for constant even maps right: W -> V and left: V -> W'."""
    return EndValuedForm(X.dim, left.target, {I: _conj_by(left, m, right) for I, m in X.comps.items()})


def _tensor_left(X: EndValuedForm, other: SuperVectorSpace) -> EndValuedForm:
    """X (x) 1 on V (x) W."""
    idx = tensor_index(X.space, other)
    T = tensor_space(X.space, other)
    return EndValuedForm(X.dim, T, {I: {(idx[(r, w)], idx[(c, w)]): f for (r, c), f in m.items()
                                         for w in range(other.dim)} for I, m in X.comps.items()})


def _tensor_right(other: SuperVectorSpace, X: EndValuedForm) -> EndValuedForm:
    """1 (x) X on W (x) V with the Koszul sign of the matrix parity passing W."""
    idx = tensor_index(other, X.space)
    T = tensor_space(other, X.space)
    out = {}
    for I, m in X.comps.items():
        ents = {}
        for (r, c), f in m.items():
            p = (X.space.parity(r) + X.space.parity(c)) % 2
            for w in range(other.dim):
                ents[(idx[(w, r)], idx[(w, c)])] = -f if p and other.parity(w) else f
        out[I] = ents
    return EndValuedForm(X.dim, T, out)


def _clifford_as_forms(M: CliffordModule, dim: int) -> list[EndValuedForm]:
    return [EndValuedForm.from_map(dim, g) for g in M.rho]


# --- superconnections -------------------------------------------------------------------------


@dataclass(eq=False)
class Superconnection:
    dim: int
    fiber: CliffordModule
    parts: dict[int, EndValuedForm] = field(default_factory=dict)
    name: str = ""
    self_adjoint: bool = False
    clifford_linear: bool = False

    def __post_init__(self):
        clean = {}
        for j, X in self.parts.items():
            if X.dim != self.dim or X.space != self.fiber.space:
                raise FiberMismatch(f"component {j} does not live on the fiber")
            if X.degree_part(j) != X:
                raise ValueError(f"component {j} is not purely of form degree {j}")
            if X:
                clean[j] = X
        self.parts = clean

    @property
    def space(self) -> SuperVectorSpace:
        return self.fiber.space

    @property
    def weight(self) -> int:
        return self.fiber.signature.weight

    def X(self) -> EndValuedForm:
        out = EndValuedForm.zero(self.dim, self.space)
        for X in self.parts.values():
            out = out + X
        return out

    def part(self, j: int) -> EndValuedForm:
        return self.parts.get(j, EndValuedForm.zero(self.dim, self.space))

    def parity_ok(self) -> bool:
        return all(X.total_parity() == 1 for X in self.parts.values())

    def is_clifford_linear(self) -> bool:
        gens = _clifford_as_forms(self.fiber, self.dim)
        for X in self.parts.values():
            for g in gens:
                if X @ g + g @ X:
                    return False
        return True

    def adjoint(self) -> "Superconnection":
        parts = {}
        for j, X in self.parts.items():
            adj = end_adjoint(X, self.fiber.inner)
            parts[j] = adj if (j * (j + 1) // 2) % 2 == 0 else -adj
        return Superconnection(self.dim, self.fiber, parts, name=f"{self.name}*")

    def is_self_adjoint(self) -> bool:
        adj = self.adjoint()
        return set(adj.parts) == set(self.parts) and all(adj.parts[j] == X for j, X in self.parts.items())

    def verify(self) -> "Superconnection":
        """Check parity, Clifford-linearity and self-adjointness and record the flags."""
        self.clifford_linear = self.parity_ok() and self.is_clifford_linear()
        self.self_adjoint = self.is_self_adjoint()
        return self

    def require_flags(self):
        if not (self.self_adjoint and self.clifford_linear):
            self.verify()
        if not self.self_adjoint:
            raise FlagMissing(f"{self.name or 'superconnection'} is not self-adjoint")
        if not self.clifford_linear:
            raise FlagMissing(f"{self.name or 'superconnection'} is not Clifford-linear")

    def curvature(self) -> EndValuedForm:
        """(d + X)^2 = dX + X^2 at u = 1."""
        X = self.X()
        return d_end(X) + X @ X

    def __eq__(self, other):
        if not isinstance(other, Superconnection):
            return NotImplemented
        return (self.dim == other.dim and self.fiber is other.fiber
                and set(self.parts) == set(other.parts)
                and all(other.parts[j] == X for j, X in self.parts.items()))

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Superconnection({self.name or '?'}, R^{self.dim}, {self.fiber!r}, degrees={sorted(self.parts)})"


def flat(dim: int, fiber: CliffordModule) -> Superconnection:
    return Superconnection(dim, fiber, {}, name="flat", self_adjoint=True, clifford_linear=True)


def from_pieces(dim: int, fiber: CliffordModule, pieces: Sequence[tuple[SuperMap, CoeffFn | None, Sequence[int]]],
                name: str = "") -> Superconnection:
    """Build d + sum f * dx_idx (x) T from (T, f, idx) triples."""
    parts: dict[int, EndValuedForm] = {}
    for T, f, idx in pieces:
        X = EndValuedForm.from_map(dim, T, f, idx)
        j = len(idx)
        parts[j] = parts[j] + X if j in parts else X
    return Superconnection(dim, fiber, parts, name=name)


def suspension_module() -> CliffordModule:
    """R^{1|1} as a Cl_1-module through its f generator."""
    M = forget_e(builtin_module("cl11_r11"))
    M.name = "R11_f"
    return M


def suspension(dim: int = 1, axis: int = 0) -> Superconnection:
    """d + x e on R^{1|1} with Cl_1 acting by f."""
    M = suspension_module()
    e = builtin_module("cl11_r11").rho[1]
    return from_pieces(dim, M, [(e, CoeffFn.coordinate(dim, axis), ())], name="suspension").verify()


def direct_sum(A: Superconnection, B: Superconnection) -> Superconnection:
    if A.dim != B.dim:
        raise FiberMismatch("different base dimensions")
    M = module_sum(A.fiber, B.fiber)
    ia, ib = sum_index([A.space, B.space])
    parts = {}
    for j in set(A.parts) | set(B.parts):
        parts[j] = A.part(j).map_space(M.space, ia) + B.part(j).map_space(M.space, ib)
    return Superconnection(A.dim, M, parts, name=f"{A.name}+{B.name}")


def external_product(A: Superconnection, B: Superconnection) -> Superconnection:
    """A (x) 1 + 1 (x) B over R^{dA + dB}, fiber the graded tensor product."""
    d = A.dim + B.dim
    M = module_tensor(A.fiber, B.fiber)
    left = list(range(A.dim))
    right = list(range(A.dim, d))
    parts: dict[int, EndValuedForm] = {}
    for j, X in A.parts.items():
        Y = _tensor_left(X.embed(d, left), B.space)
        parts[j] = parts[j] + Y if j in parts else Y
    for j, X in B.parts.items():
        Y = _tensor_right(A.space, X.embed(d, right))
        parts[j] = parts[j] + Y if j in parts else Y
    return Superconnection(d, M, parts, name=f"({A.name})x({B.name})")


def tensor_same_base(A: Superconnection, B: Superconnection) -> Superconnection:
    """A (x) 1 + 1 (x) B over a common base."""
    if A.dim != B.dim:
        raise FiberMismatch("different base dimensions")
    M = module_tensor(A.fiber, B.fiber)
    parts: dict[int, EndValuedForm] = {}
    for j, X in A.parts.items():
        Y = _tensor_left(X, B.space)
        parts[j] = parts[j] + Y if j in parts else Y
    for j, X in B.parts.items():
        Y = _tensor_right(A.space, X)
        parts[j] = parts[j] + Y if j in parts else Y
    return Superconnection(A.dim, M, parts, name=f"({A.name})(x)({B.name})")


# --- Chern forms ---------------------------------------------------------------------------------


def _gamma_trace_exact(M: CliffordModule, E: EndValuedForm) -> DifferentialForm:
    """sum_I dx_I * (-1)^{rank |I|} sTr(Gamma E_I) (orientation included, no u-weights)."""
    G = M.gamma_matrix
    rank = M.signature.rank
    rows: dict[int, list] = {}
    for (a, k), g in G.entries.items():
        rows.setdefault(k, []).append((a, g))
    out = {}
    for I, m in E.comps.items():
        acc = CoeffFn(E.dim)
        for (k, a), f in m.items():
            for a2, g in rows.get(k, ()):
                # Gamma[a2, k] * E[k, a] contributes to the diagonal when a2 == a
                if a2 == a:
                    term = f.scale(g)
                    acc = acc - term if M.space.parity(a) else acc + term
        if rank * len(I) % 2:
            acc = -acc
        if acc:
            out[I] = acc
    return DifferentialForm(E.dim, out)


def _with_u_weights(w: DifferentialForm, weight: int) -> DifferentialForm:
    return DifferentialForm(w.dim, {I: f.scale(Scalar.u_power(len(I) + weight)) for I, f in w.comps.items()})


class NumericChern:
    """Pointwise Chern form at u = 1 via the numeric exponential."""

    def __init__(self, fiber: CliffordModule, curvature: EndValuedForm, axes: int | None = None):
        self.dim = curvature.dim
        self.fiber = fiber
        self.exp = NumericExp(-curvature, axes)
        self.gamma = fiber.gamma_matrix.to_numpy()
        self.grading = np.array([1.0 if fiber.space.parity(a) == 0 else -1.0 for a in range(fiber.dim)])
        self.rank = fiber.signature.rank

    def _trace(self, comps) -> dict[Index, complex]:
        out = {}
        for I, E in comps.items():
            val = np.sum(self.grading * np.einsum("ij,ji->i", self.gamma, E))
            out[I] = -val if self.rank * len(I) % 2 else val
        return out

    def __call__(self, point, derivatives: bool = False):
        if not derivatives:
            return self._trace(self.exp(point))
        E, dE = self.exp(point, derivatives=True)
        return self._trace(E), [self._trace(d) for d in dE]


@dataclass(eq=False)
class ChernForm:
    """Chern form with an exact representative when available, otherwise numeric."""
    dim: int
    weight: int
    path: str
    exact: DifferentialForm | None = None
    numeric: NumericChern | None = None

    def evaluate(self, point) -> dict[Index, complex]:
        """Components at a point with u = 1."""
        if self.exact is not None:
            return {I: c for I, c in self.exact.evaluate(point).items()}
        return self.numeric(point)

    def d_evaluate(self, point) -> dict[Index, complex]:
        """Components of dCh at a point (u = 1)."""
        if self.exact is not None:
            return d_exterior(self.exact).evaluate(point)
        vals, derivs = self.numeric(point, derivatives=True)
        return _assemble_d(derivs)


def _assemble_d(derivs: list[dict[Index, complex]]) -> dict[Index, complex]:
    out: dict[Index, complex] = {}
    for j, comps in enumerate(derivs):
        for I, val in comps.items():
            s, K = merge_sign((j,), I)
            if K is not None:
                out[K] = out.get(K, 0) + s * val
    return out


def _chern_of(fiber: CliffordModule, curvature: EndValuedForm, weight: int) -> ChernForm:
    try:
        E = exp_central(-curvature)
    except NonCentralBody:
        return ChernForm(curvature.dim, weight, "numeric", numeric=NumericChern(fiber, curvature))
    return ChernForm(curvature.dim, weight, "central", exact=_with_u_weights(_gamma_trace_exact(fiber, E), weight))


def chern(A: Superconnection, check_flags: bool = True) -> ChernForm:
    if check_flags:
        A.require_flags()
    return _chern_of(A.fiber, A.curvature(), A.weight)


def chern_form(A: Superconnection) -> DifferentialForm:
    """Exact Chern form; NonCentralBody when only the numeric path applies."""
    ch = chern(A)
    if ch.exact is None:
        raise NonCentralBody("body of the curvature is not central; use chern(A).evaluate for numeric values")
    return ch.exact


def alpha_powers_ok(w: DifferentialForm) -> bool:
    """Every coefficient involves only u-powers divisible by 2 (so it is a polynomial in alpha = 2u^2)."""
    for f in w.comps.values():
        for c in f.terms.values():
            if any(v % 4 for v in c.v_powers()):
                return False
    return True


# --- Chern-Simons forms ---------------------------------------------------------------------------


def barycentric(As: Sequence[Superconnection]) -> Superconnection:
    """sum_j t_j A_j over R^d x (simplex coordinates s_1..s_k appended), t_0 = 1 - sum s."""
    k = len(As) - 1
    A0 = As[0]
    for A in As[1:]:
        if A.dim != A0.dim or A.fiber.space != A0.fiber.space or A.fiber.signature != A0.fiber.signature:
            raise FiberMismatch("superconnections live on different fibers")
    d = A0.dim
    ext = d + k
    ts = [CoeffFn.const(ext) - sum((CoeffFn.coordinate(ext, d + i) for i in range(k)), CoeffFn(ext))]
    ts += [CoeffFn.coordinate(ext, d + i) for i in range(k)]
    parts: dict[int, EndValuedForm] = {}
    for t, A in zip(ts, As):
        for j, X in A.parts.items():
            Y = X.extend(ext).scale(t)
            parts[j] = parts[j] + Y if j in parts else Y
    return Superconnection(ext, A0.fiber, parts, name="barycentric")


@dataclass(eq=False)
class CSForm:
    """Chern-Simons form of a simplex of superconnections; exact or numeric."""
    dim: int
    k: int
    weight: int
    path: str
    exact: DifferentialForm | None = None
    numeric: NumericChern | None = None
    tol: float = 1e-10

    def _integrand(self, x, derivatives: bool):
        d, k = self.dim, self.k
        fiber_idx = tuple(range(d, d + k))

        def pick(comps):
            out = {}
            for I, val in comps.items():
                if I[len(I) - k:] == fiber_idx and all(i < d for i in I[:len(I) - k]):
                    J = I[:len(I) - k]
                    out[J] = _orientation_sign(len(J), k) * val
            return out

        keys = None

        def fn(s):
            nonlocal keys
            sx = self._simplex_point(s)
            pt = list(x) + list(sx[0])
            if derivatives:
                vals, dv = self.numeric(pt, derivatives=True)
                comps = [pick(vals)] + [pick(dv[j]) for j in range(d)]
            else:
                comps = [pick(self.numeric(pt))]
            if keys is None:
                keys = sorted({J for c in comps for J in c} | set(_all_indices(d)))
            return np.array([[c.get(J, 0) for J in keys] for c in comps]) * sx[1]

        return fn, lambda: keys

    def _simplex_point(self, s):
        """Duffy map [0,1]^k -> standard k-simplex, with its Jacobian."""
        out = np.empty(self.k)
        rest, jac = 1.0, 1.0
        for i, a in enumerate(s):
            out[i] = rest * a
            jac *= rest
            rest *= 1 - a
        return out, jac

    def _numeric(self, x, derivatives: bool):
        fn, keys = self._integrand(x, derivatives)
        total = gauss_legendre_adaptive(fn, self.k, self.tol)
        return keys(), total

    def evaluate(self, point) -> dict[Index, complex]:
        if self.exact is not None:
            return self.exact.evaluate(point)
        keys, total = self._numeric(point, False)
        return {J: total[0][i] for i, J in enumerate(keys) if total[0][i] != 0}

    def d_evaluate(self, point) -> dict[Index, complex]:
        if self.exact is not None:
            return d_exterior(self.exact).evaluate(point)
        keys, total = self._numeric(point, True)
        derivs = [{J: total[1 + j][i] for i, J in enumerate(keys)} for j in range(self.dim)]
        return _assemble_d(derivs)


def _orientation_sign(base_degree: int, k: int) -> int:
    """Sign turning a trailing-coordinate integral over the k-simplex into CS_k.

    (-1)^{base_degree k} moves the simplex coordinates to the front; the extra
    (-1)^{k(k-1)/2} orients the simplex so that both dCS_1 = Ch_1 - Ch_0 and
    dCS_k = sum_j (-1)^j CS_{k-1}(face_j) hold.
    """
    return -1 if (base_degree * k + k * (k - 1) // 2) % 2 else 1


def _all_indices(d: int) -> list[Index]:
    from itertools import combinations

    return [c for r in range(d + 1) for c in combinations(range(d), r)]


def _fiber_integrate_exact(w: DifferentialForm, d: int, k: int) -> DifferentialForm | None:
    """Integrate over the standard k-simplex in the trailing coordinates (fiber-first orientation)."""
    fiber_idx = tuple(range(d, d + k))
    out: dict = {}
    for I, f in w.comps.items():
        if I[len(I) - k:] != fiber_idx or any(i >= d for i in I[:len(I) - k]):
            continue
        J = I[:len(I) - k]
        sign = _orientation_sign(len(J), k)
        acc = CoeffFn(d)
        for (mono, rates, atoms), c in f.terms.items():
            if any(rates[d:]) or any(a >= d for a, _, _ in atoms):
                return None
            val = dirichlet_integral(mono[d:]) * sign
            acc = acc + CoeffFn(d, {(mono[:d], rates[:d], atoms): c * val})
        out[J] = out[J] + acc if J in out else acc
    return DifferentialForm(d, out)


def cs_simplicial(As: Sequence[Superconnection], tol: float = 1e-10, check_flags: bool = True) -> CSForm:
    if check_flags:
        for A in As:
            A.require_flags()
    k = len(As) - 1
    d = As[0].dim
    At = barycentric(As)
    if not At.fiber.complex_linear and not any((K + At.weight) % 4 == 0 for K in range(k, d + k + 1)):
        # self-adjoint Clifford-linear: only degrees with K + weight = 0 mod 4 survive
        return CSForm(d, k, At.weight, "central", exact=DifferentialForm(d))
    F = At.curvature()
    try:
        E = exp_central(-F)
    except NonCentralBody:
        E = None
    if E is not None:
        ch = _gamma_trace_exact(At.fiber, E)
        exact = _fiber_integrate_exact(ch, d, k)
        if exact is not None:
            # a fiber-integrated degree-K component came from total degree K + k
            exact = DifferentialForm(d, {I: f.scale(Scalar.u_power(len(I) + k + At.weight))
                                         for I, f in exact.comps.items()})
            return CSForm(d, k, At.weight, "central", exact=exact)
    return CSForm(d, k, At.weight, "numeric", numeric=NumericChern(At.fiber, F, axes=d), tol=tol)


def cs_form(A0: Superconnection, A1: Superconnection, tol: float = 1e-10) -> CSForm:
    return cs_simplicial([A0, A1], tol)


# --- stable transfer -----------------------------------------------------------------------------


def orthogonal_complement(M: CliffordModule, g: SuperMap) -> tuple[CliffordModule, SuperMap]:
    """The complement of im g in M as a module with the induced inner product, and its inclusion."""
    G = M.inner.matrix()
    gtG = g.transpose_conj() @ G
    V = M.space
    if not gtG.is_rational():
        raise NotIsometric("complements implemented for rational data")
    rows = [{c: v.as_fraction() for (r, c), v in gtG.entries.items() if r == i} for i in range(g.source.dim)]
    basis = linalg.nullspace(rows, V.dim)
    even = [b for b in basis if all(V.parity(c) == 0 for c in b)]
    odd = [b for b in basis if all(V.parity(c) == 1 for c in b)]
    if len(even) + len(odd) != len(basis):
        # the pivot-based basis respects the grading because gtG is even
        raise NotIsometric("complement basis is not homogeneous")
    W = SuperVectorSpace(len(even), len(odd))
    cols = even + odd
    h = SuperMap(W, V, {(r, j): Scalar.const(v) for j, b in enumerate(cols) for r, v in b.items()}, 0)
    gram = h.transpose_conj() @ G @ h
    inner = InnerProduct(W, SuperMap(W, W, gram.entries, 0))
    hplus = inner.inverse() @ h.transpose_conj() @ G
    rho = [SuperMap(W, W, (hplus @ r @ h).entries, 1) for r in M.rho]
    Wm = CliffordModule(M.signature, W, rho, inner, orientation=M.orientation, name=f"{M.name}-perp",
                        complex_linear=M.complex_linear)
    for r, rw in zip(M.rho, rho):
        if (r @ h - h @ rw).entries:
            raise NotIsometric("complement is not a submodule")
    return Wm, h


def _is_isometric(g: SuperMap, G0: InnerProduct, G1: InnerProduct) -> bool:
    return (g.transpose_conj() @ G1.matrix() @ g).entries == G0.matrix().entries


def stable_transfer(A0: Superconnection, g: SuperMap, witness: ExtensionWitness | None, A1: Superconnection,
                    h: SuperMap | None = None) -> Superconnection:
    """The superconnection A0 + (e-averaged compressed connection of A1) on V1.

    ``witness.base`` is the complement module W with inclusion ``h`` (computed
    when omitted).  The complement carries d + (Q w Q + e Q w Q e)/2, where w
    is the connection 1-form of A1 and Q the compression to W.
    """
    M0, M1 = A0.fiber, A1.fiber
    if A0.dim != A1.dim:
        raise FiberMismatch("different base dimensions")
    if not _is_isometric(g, M0.inner, M1.inner):
        raise NotIsometric("g is not an isometric inclusion")
    for r0, r1 in zip(M0.rho, M1.rho):
        if (r1 @ g - g @ r0).entries:
            raise NotIsometric("g is not equivariant")
    if witness is None:
        if g.source.dim != g.target.dim:
            raise WitnessInvalid("a proper inclusion needs a witness on its complement")
        parts = {j: conjugate_map(X, g, M0.inner.inverse() @ g.transpose_conj() @ M1.inner.matrix())
                 for j, X in A0.parts.items()}
        return Superconnection(A0.dim, M1, parts, name=f"transfer({A0.name})")
    if not extension_check(witness):
        raise WitnessInvalid("witness fails extension_check")
    W = witness.base
    if h is None:
        Wc, h = orthogonal_complement(M1, g)
        if Wc.space != W.space or any(a.entries != b.entries for a, b in zip(Wc.rho, W.rho)):
            raise WitnessInvalid("witness is not defined on the computed complement")
    if not _is_isometric(h, W.inner, M1.inner) or (h.transpose_conj() @ M1.inner.matrix() @ g).entries:
        raise NotIsometric("complement inclusion is not isometric and orthogonal to g")
    d = A0.dim
    gdag = M0.inner.inverse() @ g.transpose_conj() @ M1.inner.matrix()
    hdag = W.inner.inverse() @ h.transpose_conj() @ M1.inner.matrix()
    parts: dict[int, EndValuedForm] = {}
    for j, X in A0.parts.items():
        parts[j] = conjugate_map(X, g, gdag)
    omega = A1.part(1)
    if omega:
        comp = conjugate_map(omega, hdag, h)
        e = witness.extra
        avg = (comp + conjugate_map(comp, e, e)).scale(Fraction(1, 2))
        lifted = conjugate_map(avg, h, hdag)
        parts[1] = parts[1] + lifted if 1 in parts else lifted
    out = Superconnection(d, M1, {j: EndValuedForm(d, M1.space, X.comps) for j, X in parts.items()},
                          name=f"transfer({A0.name})")
    return out


# --- products of cocycle data ---------------------------------------------------------------------


def product_data(A: Superconnection, phi: DifferentialForm, B: Superconnection, psi: DifferentialForm):
    """(A x B, phi Ch(B) + (-1)^n Ch(A) psi + phi dpsi) over R^{dA + dB}, n the Clifford degree of A."""
    A.require_flags()
    B.require_flags()
    d = A.dim + B.dim
    AB = external_product(A, B)
    chA = chern_form(A).embed(d, list(range(A.dim)))
    chB = chern_form(B).embed(d, list(range(A.dim, d)))
    phi_e = phi.embed(d, list(range(A.dim)))
    psi_e = psi.embed(d, list(range(A.dim, d)))
    n = -A.weight
    sign = -1 if n % 2 else 1
    form = phi_e.wedge(chB) + chA.wedge(psi_e).scale(sign) + phi_e.wedge(d_exterior(psi_e))
    return AB.verify(), form


def random_superconnection(rng, dim: int, fiber: CliffordModule, max_deg: int = 1, degrees=(0, 1),
                           scale: int = 2) -> Superconnection:
    """Random self-adjoint Clifford-linear superconnection with polynomial coefficients."""
    from .cmodules import equivariant_hom

    parts: dict[int, EndValuedForm] = {}
    by_parity = {p: equivariant_hom(fiber, fiber, p) for p in (0, 1)}
    from itertools import combinations

    for j in degrees:
        p = (j + 1) % 2
        sign = 1 if (j * (j + 1) // 2) % 2 == 0 else -1
        basis = []
        for b in by_parity[p]:
            adj = fiber.adjoint(b)
            c = b + adj if sign > 0 else b - adj
            if c.entries:
                basis.append(SuperMap(c.source, c.target, c.entries, p))
        if not basis:
            continue
        for idx in combinations(range(dim), j):
            for b in basis:
                if rng.random() < 0.5:
                    continue
                f = CoeffFn(dim)
                for _ in range(2):
                    mono = [int(rng.integers(0, max_deg + 1)) for _ in range(dim)]
                    f = f + CoeffFn.monomial(dim, mono, None, int(rng.integers(-scale, scale + 1)))
                if not f:
                    continue
                X = EndValuedForm.from_map(dim, b, f, idx)
                parts[j] = parts[j] + X if j in parts else X
    return Superconnection(dim, fiber, parts, name="random").verify()
