"""Finite-dimensional families of odd self-adjoint operators and their cutoff eigenbundles.

A family D(b) over a parameter interval (a, b) yields, for each cutoff lam,
the open set where lam is not an eigenvalue of D^2 and on it the bundle of
D^2-eigenspaces below lam.  Nested cutoffs are glued by the inclusion
H^{<lam} in H^{<mu} together with e = D / sqrt(nu) on the eigenvalues nu in
between, which produces Clifford-module bundle data over the interval.

Exact arithmetic is used at rational sample points: eigenspaces come from
kernels of the rational irreducible factors of the characteristic polynomial.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg
import sympy

from . import linalg
from .cech import ClnBundleData, Cover, Gluing, validate_bundle, assemble_cocycle
from .cmodules import (CliffordModule, ExtensionWitness, clifford_supertrace, extension_check,
                       module_from_json, module_tensor)
from .clifford import CliffordSignature
from .errors import (DegenerateAtEndpoint, EmptyOverlap, IrrationalSpectrum, NonConstantBundle, NotACover,
                     NotEquivariant, ParseError, RankJumpInsideRegion)
from .forms import CoeffFn, EndValuedForm, sqrt_rational
from .scalars import Scalar
from .superconn import Superconnection
from .superlinear import InnerProduct, SuperMap, SuperVectorSpace

_B = sympy.Symbol("b")
_T = sympy.Symbol("t")


def _q(x) -> Fraction:
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def _rat(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


# --- families ----------------------------------------------------------------------------------


@dataclass
class OperatorFamily:
    """D(b) = sum_k b^k C_k on a Clifford module, for b in an open rational interval."""
    interval: tuple[Fraction, Fraction]
    fiber: CliffordModule
    coeffs: list[list[list[Fraction]]]  # coeffs[r][c] = polynomial coefficients, constant term first
    grid: int = 16
    name: str = ""

    def __post_init__(self):
        self.interval = (Fraction(self.interval[0]), Fraction(self.interval[1]))
        n = self.fiber.dim
        if len(self.coeffs) != n or any(len(row) != n for row in self.coeffs):
            raise ParseError(f"operator matrix must be {n}x{n}")
        self.coeffs = [[[Fraction(c) for c in (p if isinstance(p, (list, tuple)) else [p])] for p in row]
                       for row in self.coeffs]

    @property
    def dim(self) -> int:
        return self.fiber.dim

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for row in self.coeffs for p in row), default=0)

    def coefficient(self, k: int) -> SuperMap:
        V = self.fiber.space
        ents = {}
        for r, row in enumerate(self.coeffs):
            for c, p in enumerate(row):
                if k < len(p) and p[k]:
                    ents[(r, c)] = Scalar.const(p[k])
        return SuperMap(V, V, ents, "auto")

    def at(self, b) -> SuperMap:
        b = Fraction(b)
        V = self.fiber.space
        ents = {}
        for r, row in enumerate(self.coeffs):
            for c, p in enumerate(row):
                val = sum((coef * b ** k for k, coef in enumerate(p)), Fraction(0))
                if val:
                    ents[(r, c)] = Scalar.const(val)
        return SuperMap(V, V, ents, 1)

    def at_float(self, b: float) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for r, row in enumerate(self.coeffs):
            for c, p in enumerate(row):
                out[r, c] = sum(float(coef) * b ** k for k, coef in enumerate(p))
        return out

    def symbolic(self) -> sympy.Matrix:
        return sympy.Matrix(self.dim, self.dim, lambda r, c: sum(
            (_rat(coef) * _B ** k for k, coef in enumerate(self.coeffs[r][c])), sympy.Integer(0)))

    def check(self) -> list[str]:
        """Oddness, equivariance and self-adjointness, coefficient by coefficient."""
        problems = []
        M = self.fiber
        for k in range(self.degree + 1):
            C = self.coefficient(k)
            if C.entries and C.parity != 1:
                problems.append(f"coefficient {k} is not odd")
            if any((C @ g + g @ C).entries for g in M.rho):
                problems.append(f"coefficient {k} does not anticommute with the generators")
            if (M.adjoint(C) - C).entries:
                problems.append(f"coefficient {k} is not self-adjoint")
        return problems

    def grid_points(self) -> list[Fraction]:
        a, b = self.interval
        return [a + (b - a) * Fraction(k, self.grid + 1) for k in range(1, self.grid + 1)]

    def to_json(self) -> dict:
        from .cmodules import module_to_json

        return {"interval": [str(x) for x in self.interval], "module": module_to_json(self.fiber),
                "matrix": [[[str(c) for c in p] for p in row] for row in self.coeffs],
                "grid": self.grid, "name": self.name}


def family_from_json(data: dict | str) -> OperatorFamily:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        fiber = module_from_json(data["module"])
        coeffs = [[[Fraction(c) for c in (p if isinstance(p, list) else [p])] for p in row]
                  for row in data["matrix"]]
        F = OperatorFamily(tuple(Fraction(x) for x in data["interval"]), fiber, coeffs,
                           int(data.get("grid", 16)), data.get("name", ""))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad family description: {exc!r}") from exc
    problems = F.check()
    if problems:
        raise NotEquivariant("; ".join(problems))
    return F


def crossing_family(a=-2, b=2, grid: int = 16) -> OperatorFamily:
    """D(b) = b e on R^{1|1}, with Cl_1 acting through f."""
    from .superconn import suspension_module

    M = suspension_module()
    coeffs = [[[0], [0, 1]], [[0, 1], [0]]]
    return OperatorFamily((Fraction(a), Fraction(b)), M, coeffs, grid, name="b*e")


_ROTATION = [[Fraction(1, 3), Fraction(2, 3), Fraction(2, 3)],
             [Fraction(2, 3), Fraction(1, 3), Fraction(-2, 3)],
             [Fraction(2, 3), Fraction(-2, 3), Fraction(1, 3)]]


def six_dim_family(grid: int = 24) -> OperatorFamily:
    """e (x) S(b) on R^{1|1} (x) R^3, S(b) = R diag(b - 1, b + 1, 2) R^T with R rational orthogonal.

    The eigenvalues of D^2 are (b-1)^2, (b+1)^2 and 4, each twice; the first two cross at b = 0.
    """
    from .superconn import suspension_module

    S = suspension_module()
    triv = CliffordModule(CliffordSignature(), SuperVectorSpace(3, 0), [], name="R3")
    M = module_tensor(S, triv)
    diag = [[Fraction(-1), Fraction(1)], [Fraction(1), Fraction(1)], [Fraction(2)]]
    Smat = [[[Fraction(0)] * 2 for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            for k in range(3):
                w = _ROTATION[i][k] * _ROTATION[j][k]
                for deg, c in enumerate(diag[k]):
                    Smat[i][j][deg] += w * c
    e = [[0, 1], [1, 0]]
    # tensor basis: even part (e0 x R^3) first, then odd part (e1 x R^3)
    n = 6
    coeffs = [[[Fraction(0)] for _ in range(n)] for _ in range(n)]
    for a in range(2):
        for b_ in range(2):
            if not e[a][b_]:
                continue
            for i in range(3):
                for j in range(3):
                    coeffs[3 * a + i][3 * b_ + j] = list(Smat[i][j])
    F = OperatorFamily((Fraction(-3), Fraction(3)), M, coeffs, grid, name="e(x)S(b)")
    problems = F.check()
    if problems:
        raise NotEquivariant("; ".join(problems))
    return F


# --- spectral regions --------------------------------------------------------------------------


@dataclass
class SpectralRegion:
    lam: Fraction
    intervals: list[tuple[Fraction, Fraction]]
    roots: list[tuple[Fraction, Fraction]] = field(default_factory=list)

    def contains(self, b) -> bool:
        return any(lo < b < hi for lo, hi in self.intervals)


def _isolate(poly: sympy.Poly, width: Fraction) -> list[tuple[Fraction, Fraction]]:
    out = []
    for (lo, hi), _ in poly.intervals(eps=_rat(width)):
        out.append((_q(lo), _q(hi)))
    return out


def spectral_cover(F: OperatorFamily, lams: Sequence, width: Fraction = Fraction(1, 10 ** 9)) -> list[SpectralRegion]:
    """For each cutoff, the subintervals of the parameter interval where it is not an eigenvalue of D^2."""
    a, b = F.interval
    D = F.symbolic()
    D2 = D * D
    out = []
    for lam in lams:
        lam = Fraction(lam)
        if lam <= 0:
            raise ValueError("cutoffs must be positive")
        p = sympy.Poly((D2 - _rat(lam) * sympy.eye(F.dim)).det(method="berkowitz").expand(), _B)
        if p.is_zero:
            out.append(SpectralRegion(lam, []))
            continue
        for end in (a, b):
            if p.eval(_rat(end)) == 0:
                raise DegenerateAtEndpoint(f"{lam} is an eigenvalue of D^2 at b = {end}")
        roots = [(lo, hi) for lo, hi in _isolate(p, width) if hi > a and lo < b]
        roots.sort()
        cuts = [a]
        for lo, hi in roots:
            cuts.extend([lo, hi])
        cuts.append(b)
        intervals = [(cuts[k], cuts[k + 1]) for k in range(0, len(cuts), 2) if cuts[k] < cuts[k + 1]]
        out.append(SpectralRegion(lam, intervals, roots))
    return out


# --- exact spectral blocks ---------------------------------------------------------------------


@dataclass
class SpectralBlock:
    """Kernel of one irreducible factor of the characteristic polynomial of D^2."""
    factor: sympy.Poly
    below: int  # number of roots of the factor below the cutoff being examined
    basis: list[dict[int, Fraction]]

    @property
    def root(self) -> Fraction | None:
        if self.factor.degree() == 1:
            c1, c0 = self.factor.all_coeffs()
            return -_q(c0) / _q(c1)
        return None


def _dense_fraction(T: SuperMap) -> list[list[Fraction]]:
    return [[x.as_fraction() for x in row] for row in T.to_dense()]


def spectral_blocks(F: OperatorFamily, b0) -> list[SpectralBlock]:
    D = F.at(b0)
    D2 = sympy.Matrix(_dense_fraction(D @ D)).applyfunc(lambda x: _rat(Fraction(x)))
    chi = D2.charpoly(_T)
    _, factors = sympy.factor_list(chi.as_expr(), _T)
    V = F.fiber.space
    blocks = []
    for f, _mult in factors:
        fp = sympy.Poly(f, _T)
        mat = sympy.zeros(F.dim, F.dim)
        for c in fp.all_coeffs():
            mat = mat * D2 + c * sympy.eye(F.dim)
        rows = [[_q(mat[r, c]) for c in range(F.dim)] for r in range(F.dim)]
        basis = []
        for par in (0, 1):
            idx = [k for k in range(F.dim) if V.parity(k) == par]
            sub = [[rows[r][c] for c in idx] for r in idx]
            for vec in linalg.nullspace([{j: x for j, x in enumerate(row) if x} for row in sub], len(idx)):
                basis.append({idx[j]: x for j, x in vec.items()})
        blocks.append(SpectralBlock(fp, 0, basis))
    return blocks


def _count_below(f: sympy.Poly, lam: Fraction) -> int:
    return int(f.count_roots(-sympy.oo, _rat(lam)))


def cutoff_basis(F: OperatorFamily, lam: Fraction, b0) -> list[dict[int, Fraction]]:
    """A homogeneous rational basis of the D^2-eigenspaces below lam at b0, ordered by block."""
    out = []
    for blk in spectral_blocks(F, b0):
        below = _count_below(blk.factor, lam)
        if below == 0:
            continue
        if below != blk.factor.degree():
            raise IrrationalSpectrum(f"an irreducible eigenvalue factor straddles {lam} at b = {b0}")
        out.extend(blk.basis)
    even = [v for v in out if all(F.fiber.space.parity(k) == 0 for k in v)]
    odd = [v for v in out if all(F.fiber.space.parity(k) == 1 for k in v)]
    return even + odd


def _span_equal(A: list[dict[int, Fraction]], B: list[dict[int, Fraction]], n: int) -> bool:
    if len(A) != len(B):
        return False
    if not A:
        return True
    return linalg.rank(list(A) + list(B)) == len(A) == linalg.rank(list(A))


# --- cutoff bundles ----------------------------------------------------------------------------


@dataclass
class CutoffBundle:
    """Numeric projector family on the grid points of one region component, plus its rank."""
    lam: Fraction
    interval: tuple[Fraction, Fraction]
    points: list[float]
    projectors: list[np.ndarray]
    rank: int


def _gram(F: OperatorFamily) -> np.ndarray:
    return F.fiber.inner.matrix().to_numpy().real


def numeric_projector(F: OperatorFamily, lam: float, b: float) -> np.ndarray:
    """G-orthogonal spectral projector of D(b)^2 below lam."""
    G = _gram(F)
    D = F.at_float(b)
    # D self-adjoint for G means G D is symmetric; D^2 likewise
    D2 = D @ D
    vals, vecs = scipy.linalg.eigh(G @ D2, G)
    sel = vecs[:, vals < lam]
    return sel @ sel.T @ G


def _component_points(F: OperatorFamily, interval) -> list[Fraction]:
    lo, hi = interval
    pts = [p for p in F.grid_points() if lo < p < hi]
    mid = (lo + hi) / 2
    return [mid] + [p for p in pts if p != mid]


def cutoff_bundle(F: OperatorFamily, lam, region: SpectralRegion | tuple) -> list[CutoffBundle]:
    """Projectors below lam on each component of the region; the rank must be constant on each."""
    intervals = region.intervals if isinstance(region, SpectralRegion) else [tuple(region)]
    out = []
    for iv in intervals:
        pts = [float(p) for p in _component_points(F, iv)]
        projs = [numeric_projector(F, float(lam), p) for p in pts]
        ranks = {int(round(np.trace(P).real)) for P in projs}
        if len(ranks) != 1:
            raise RankJumpInsideRegion(f"rank changes inside ({iv[0]}, {iv[1]}) for cutoff {lam}")
        for P in projs:
            for g in F.fiber.rho:
                R = g.to_numpy().real
                if np.max(np.abs(R @ P - P @ R), initial=0) > 1e-10:
                    raise RankJumpInsideRegion("projector is not equivariant; root isolation is unreliable")
        out.append(CutoffBundle(Fraction(lam), iv, pts, projs, ranks.pop()))
    return out


@dataclass
class ProjectedConnection:
    lam: Fraction
    interval: tuple[Fraction, Fraction]
    points: list[float]
    connection: list[np.ndarray]  # p (dp/db) p in the ambient frame
    superdimension: Scalar


def projected_connection(F: OperatorFamily, lam, region, step: float = 1e-5) -> list[ProjectedConnection]:
    """Connection p d p of the cutoff bundle (central differences) and its Clifford superdimension."""
    out = []
    for bun in cutoff_bundle(F, lam, region):
        conns = []
        for b in bun.points:
            P = numeric_projector(F, float(lam), b)
            dP = (numeric_projector(F, float(lam), b + step) - numeric_projector(F, float(lam), b - step)) / (2 * step)
            conns.append(P @ dP @ P)
        sdim = clifford_supertrace(cutoff_module(F, lam, bun.interval)[0]) if bun.rank else Scalar.const(0)
        out.append(ProjectedConnection(bun.lam, bun.interval, bun.points, conns, sdim))
    return out


def _basis_module(F: OperatorFamily, basis: list[dict[int, Fraction]], name: str) -> tuple[CliffordModule, SuperMap]:
    """The subspace spanned by ``basis`` as a module with the induced metric, and its inclusion."""
    V = F.fiber.space
    n_even = sum(1 for v in basis if all(V.parity(k) == 0 for k in v))
    W = SuperVectorSpace(n_even, len(basis) - n_even)
    B = SuperMap(W, V, {(r, j): Scalar.const(x) for j, v in enumerate(basis) for r, x in v.items()}, 0)
    G = F.fiber.inner.matrix()
    gram = B.transpose_conj() @ G @ B
    inner = InnerProduct(W, SuperMap(W, W, gram.entries, 0))
    Bplus = inner.inverse() @ B.transpose_conj() @ G
    rho = [SuperMap(W, W, (Bplus @ g @ B).entries, 1) for g in F.fiber.rho]
    M = CliffordModule(F.fiber.signature, W, rho, inner, orientation=F.fiber.orientation, name=name,
                       complex_linear=F.fiber.complex_linear)
    return M, B


def cutoff_module(F: OperatorFamily, lam, interval) -> tuple[CliffordModule, SuperMap, list]:
    """Exact H^{<lam} on a component (checked constant on the grid), with its inclusion into the fiber."""
    lam = Fraction(lam)
    pts = _component_points(F, interval)
    ref = cutoff_basis(F, lam, pts[0])
    for p in pts[1:]:
        if not _span_equal(ref, cutoff_basis(F, lam, p), F.dim):
            raise NonConstantBundle(f"H^<{lam} moves inside ({interval[0]}, {interval[1]})")
    M, B = _basis_module(F, ref, f"H<{lam}")
    return M, B, ref


def _block_projector(F: OperatorFamily, basis: list[dict[int, Fraction]]) -> SuperMap:
    """G-orthogonal projector onto the span of ``basis``."""
    V = F.fiber.space
    K = SuperMap(SuperVectorSpace(len(basis), 0), V,
                 {(r, j): Scalar.const(x) for j, v in enumerate(basis) for r, x in v.items()}, "auto")
    G = F.fiber.inner.matrix()
    gram = _dense_fraction(K.transpose_conj() @ G @ K)
    inv = SuperMap.from_dense(linalg.inverse(gram), K.source)
    return K @ inv @ K.transpose_conj() @ G


def _witness_on(F: OperatorFamily, lo: Fraction, hi: Fraction, b0, B: SuperMap, inner: InnerProduct) -> SuperMap:
    """e = D / sqrt(nu) on eigenvalues nu in [lo, hi) at b0, compressed to the subspace B."""
    D = F.at(b0)
    V = F.fiber.space
    e = SuperMap.zero(V, parity=1)
    for blk in spectral_blocks(F, b0):
        inside = _count_below(blk.factor, hi) - _count_below(blk.factor, lo)
        if inside == 0:
            continue
        nu = blk.root
        if nu is None:
            raise IrrationalSpectrum(f"irrational eigenvalues between {lo} and {hi} at b = {b0}")
        e = e + (D @ _block_projector(F, blk.basis)).scale(sqrt_rational(nu).reciprocal())
    Bplus = inner.inverse() @ B.transpose_conj() @ F.fiber.inner.matrix()
    return SuperMap(B.source, B.source, (Bplus @ e @ B).entries, "auto")


# --- gluing and the index cocycle --------------------------------------------------------------


def gluing_data(F: OperatorFamily, lam, mu, interval) -> tuple[SuperMap, SuperMap | None, CliffordModule, CliffordModule]:
    """Inclusion H^{<lam} -> H^{<mu} on an overlap component and e = D/sqrt(nu) on the complement.

    Returns (g, e, H^{<lam}, H^{<mu}); e is None when the complement is zero.
    """
    lam, mu = Fraction(lam), Fraction(mu)
    if lam > mu:
        raise ValueError("need lam <= mu")
    if interval is None or interval[0] >= interval[1]:
        raise EmptyOverlap("overlap component is empty")
    small, Bs, _ = cutoff_module(F, lam, interval)
    big, Bb, _ = cutoff_module(F, mu, interval)
    G = F.fiber.inner.matrix()
    Bplus = big.inner.inverse() @ Bb.transpose_conj() @ G
    g = SuperMap(small.space, big.space, (Bplus @ Bs).entries, 0)
    if small.dim == big.dim:
        return g, None, small, big
    e = _witness_on(F, lam, mu, _component_points(F, interval)[0], Bb, big.inner)
    for p in _component_points(F, interval)[1:4]:
        if _witness_on(F, lam, mu, p, Bb, big.inner) != e:
            raise NonConstantBundle(f"witness moves inside ({interval[0]}, {interval[1]})")
    return g, SuperMap(e.source, e.target, e.entries, 1), small, big


@dataclass
class IndexCocycle:
    family: OperatorFamily
    lams: list[Fraction]
    regions: list[SpectralRegion]
    bundle: ClnBundleData
    superconns: dict


def _check_cover(F: OperatorFamily, regions: list[SpectralRegion]):
    a, b = F.interval
    ivs = sorted(iv for r in regions for iv in r.intervals)
    reach = a
    while reach < b:
        best = None
        for lo, hi in ivs:
            if (lo < reach or (reach == a and lo == a)) and hi > reach:
                best = hi if best is None else max(best, hi)
        if best is None:
            raise NotACover(f"the cutoffs leave b = {reach} uncovered")
        reach = best


def index_cocycle(F: OperatorFamily, lams: Sequence) -> IndexCocycle:
    """Bundle data {H^{<lam}, g, e} over the cover by spectral regions (patches ordered by cutoff)."""
    lams = sorted(Fraction(x) for x in lams)
    regions = spectral_cover(F, lams)
    _check_cover(F, regions)
    patches = [[((lo, hi),) for lo, hi in r.intervals] for r in regions]
    if any(not p for p in patches):
        raise NotACover("a cutoff has an empty region")
    cover = Cover(1, patches)
    modules, incl, gluings, superconns = {}, {}, {}, {}
    for sigma, c in cover.keys():
        lam = max(lams[i] for i in sigma)
        box = cover.components(sigma)[c][0]
        iv = (box[0][0], box[0][1])
        M, Bmap, _ = cutoff_module(F, lam, iv)
        modules[(sigma, c)] = M
        incl[(sigma, c)] = Bmap
        superconns[(sigma, c)] = _compressed_superconnection(F, M, Bmap)
    B = ClnBundleData(cover, modules, gluings)
    for sigma, tau, c in B.pairs():
        lam_s = max(lams[i] for i in sigma)
        lam_t = max(lams[i] for i in tau)
        cs = cover.parent(sigma, tau, c)
        box = cover.components(tau)[c][0]
        Ms, Mt = modules[(sigma, cs)], modules[(tau, c)]
        Bs, Bt = incl[(sigma, cs)], incl[(tau, c)]
        G = F.fiber.inner.matrix()
        Btplus = Mt.inner.inverse() @ Bt.transpose_conj() @ G
        g = SuperMap(Ms.space, Mt.space, (Btplus @ Bs).entries, 0)
        e = None
        if Ms.dim != Mt.dim:
            e = _witness_on(F, lam_s, lam_t, (box[0][0] + box[0][1]) / 2, Bt, Mt.inner)
            e = SuperMap(e.source, e.target, e.entries, 1)
        gluings[(sigma, tau, c)] = Gluing(g, e)
    return IndexCocycle(F, lams, regions, B, superconns)


def _compressed_superconnection(F: OperatorFamily, M: CliffordModule, Bmap: SuperMap) -> Superconnection:
    """d + B^+ D(b) B on the constant cutoff space."""
    G = F.fiber.inner.matrix()
    Bplus = M.inner.inverse() @ Bmap.transpose_conj() @ G
    comps: dict = {}
    for k in range(F.degree + 1):
        C = Bplus @ F.coefficient(k) @ Bmap
        for rc, v in C.entries.items():
            f = CoeffFn.monomial(1, [k], c=1).scale(v)
            comps[rc] = comps[rc] + f if rc in comps else f
    X = EndValuedForm(1, M.space, {(): comps})
    return Superconnection(1, M, {0: X} if X else {}, name="compressed D").verify()


def compare_cutoffs(F: OperatorFamily, lams: Sequence, lams2: Sequence) -> list[tuple[str, bool]]:
    """On the mutual refinement, H for the smaller cutoff sits in H for the larger with an e-witness."""
    r1 = spectral_cover(F, lams)
    r2 = spectral_cover(F, lams2)
    out = []
    for x in r1:
        for y in r2:
            for lo1, hi1 in x.intervals:
                for lo2, hi2 in y.intervals:
                    lo, hi = max(lo1, lo2), min(hi1, hi2)
                    if lo >= hi:
                        continue
                    lam, mu = sorted((x.lam, y.lam))
                    g, e, small, big = gluing_data(F, lam, mu, (lo, hi))
                    label = f"{x.lam}|{y.lam} on ({lo}, {hi})"
                    if e is None:
                        out.append((label, g.source.dim == g.target.dim))
                        continue
                    from .superconn import orthogonal_complement

                    W, h = orthogonal_complement(big, g)
                    hplus = W.inner.inverse() @ h.transpose_conj() @ big.inner.matrix()
                    eW = SuperMap(W.space, W.space, (hplus @ e @ h).entries, 1)
                    out.append((label, extension_check(ExtensionWitness(W, eW, 1))))
    return out


def validate_index_cocycle(ic: IndexCocycle, tol: float = 1e-8, samples: int = 4):
    """Bundle axioms, then (d + delta)-closedness of the assembled cochain."""
    rep = validate_bundle(ic.bundle)
    if rep.passed:
        rep.extend(assemble_cocycle(ic.bundle, ic.superconns).closedness(samples, tol))
    return rep


def numeric_gluing_residuals(F: OperatorFamily, lam, mu, interval) -> dict[str, float]:
    """Float residuals of the gluing identities at every grid point of the component."""
    g, e, small, big = gluing_data(F, lam, mu, interval)
    _, Bb, _ = cutoff_module(F, mu, interval)
    _, Bs, _ = cutoff_module(F, lam, interval)
    Bbn = Bb.to_numpy().real
    Gb = big.inner.matrix().to_numpy().real
    Gs = small.inner.matrix().to_numpy().real
    gn = g.to_numpy().real
    en = e.to_numpy().real if e is not None else np.zeros((big.dim, big.dim))
    out = {"isometry": float(np.max(np.abs(gn.T @ Gb @ gn - Gs), initial=0))}
    P = gn @ np.linalg.solve(Gs, gn.T @ Gb) if small.dim else np.zeros((big.dim, big.dim))
    out["involution"] = float(np.max(np.abs(en @ en - (np.eye(big.dim) - P)), initial=0))
    out["self_adjoint"] = float(np.max(np.abs(Gb @ en - (Gb @ en).T), initial=0))
    out["anticommute"] = max((float(np.max(np.abs(en @ r.to_numpy().real + r.to_numpy().real @ en), initial=0))
                              for r in big.rho), default=0.0)
    # e agrees with D/|D| on the complement at every grid point of the component
    worst = 0.0
    Bplus = np.linalg.solve(Gb, Bbn.T @ _gram(F)) if big.dim else np.zeros((0, F.dim))
    for p in _component_points(F, interval):
        D = F.at_float(float(p))
        G = _gram(F)
        vals, vecs = scipy.linalg.eigh(G @ D @ D, G)
        sel = vecs[:, (vals >= float(lam)) & (vals < float(mu))]
        absinv = sel @ np.diag(1 / np.sqrt(vals[(vals >= float(lam)) & (vals < float(mu))])) @ sel.T @ G
        want = Bplus @ D @ absinv @ Bbn if big.dim else np.zeros((0, 0))
        worst = max(worst, float(np.max(np.abs(want - en), initial=0)))
    out["spectral_formula"] = worst
    return out
