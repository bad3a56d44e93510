"""Box covers, Clifford-module bundle data over them, and differential cocycles.

A cover is an ordered list of patches, each a finite union of open boxes in
R^d (endpoints rational or None for infinity).  Bundle data are constant on
each connected component of each nonempty intersection U_sigma, so every
per-sigma object is keyed by ``(sigma, component)``.

Sign conventions of the Cech-de Rham double complex: (delta c)_{i0..ip} =
sum_k (-1)^k c_{i0..^ik..ip}, total differential delta + (-1)^p d on p-cochains.
The p-th row holds eps_p CS_p(A'_{i0}, ..., A'_{ip}) with eps_p =
(-1)^{p(p-1)/2}; with these signs the assembled cochain is (d + delta)-closed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cmodules import (CliffordModule, ExtensionWitness, builtin_module, check_module, map_to_json,
                       module_from_json, module_tensor, module_to_json, zero_module)
from .errors import InvalidConcordance, NotACover, ParseError, WitnessInvalid
from .forms import (CoeffFn, DifferentialForm, EndValuedForm, coeff_from_json, coeff_to_json, d_exterior,
                    form_from_json, form_to_json, mathai_quillen)
from .scalars import Scalar
from .superconn import (Superconnection, _fiber_integrate_exact, chern, cs_simplicial, external_product, flat,
                        orthogonal_complement, product_data, stable_transfer, suspension, suspension_module)
from .superlinear import SuperMap, SuperVectorSpace, koszul_tensor

SCHEMA = "cliffko/1"

Endpoint = Fraction | None
Box = tuple[tuple[Endpoint, Endpoint], ...]
Sigma = tuple[int, ...]
Key = tuple[Sigma, int]
Index = tuple[int, ...]


# --- boxes -----------------------------------------------------------------------------------


def _frac(x) -> Endpoint:
    if x is None:
        return None
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return Fraction(x)


def make_box(*intervals) -> Box:
    box = tuple((_frac(lo), _frac(hi)) for lo, hi in intervals)
    for lo, hi in box:
        if lo is not None and hi is not None and lo >= hi:
            raise NotACover(f"empty interval ({lo}, {hi})")
    return box


def _meet(a: Box, b: Box) -> Box | None:
    out = []
    for (l1, h1), (l2, h2) in zip(a, b):
        lo = l2 if l1 is None else l1 if l2 is None else max(l1, l2)
        hi = h2 if h1 is None else h1 if h2 is None else min(h1, h2)
        if lo is not None and hi is not None and lo >= hi:
            return None
        out.append((lo, hi))
    return tuple(out)


def _contains(box: Box, point: Sequence[float]) -> bool:
    return all((lo is None or x > lo) and (hi is None or x < hi) for (lo, hi), x in zip(box, point))


def _interval_point(lo: Endpoint, hi: Endpoint, t: float) -> float:
    """A point of (lo, hi) parametrized by t in (0, 1); unbounded sides reach 3 units out."""
    if lo is not None and hi is not None:
        return float(lo) + (float(hi) - float(lo)) * t
    if lo is not None:
        return float(lo) + 3.0 * t
    if hi is not None:
        return float(hi) - 3.0 * t
    return 6.0 * t - 3.0


def _box_key(box: Box):
    return tuple((lo is not None, lo or 0, hi is None, hi or 0) for lo, hi in box)


def box_to_json(box: Box) -> list:
    return [[None if lo is None else str(lo), None if hi is None else str(hi)] for lo, hi in box]


# --- covers -----------------------------------------------------------------------------------


class Cover:
    """Ordered cover by finite unions of open boxes, with its nerve and components."""

    def __init__(self, dim: int, patches: Sequence[Sequence[Box]], max_order: int | None = None):
        self.dim = dim
        self.patches = tuple(tuple(make_box(*b) for b in p) for p in patches)
        for p in self.patches:
            if not p or any(len(b) != dim for b in p):
                raise NotACover("every patch needs at least one box of the base dimension")
        self.max_order = max_order or len(self.patches)
        self._components: dict[Sigma, list[tuple[Box, ...]]] = {}
        self._build()

    def _region(self, sigma: Sigma) -> list[Box]:
        out: list = list(self.patches[sigma[0]])
        for i in sigma[1:]:
            nxt = []
            for a in out:
                for b in self.patches[i]:
                    m = _meet(a, b)
                    if m is not None:
                        nxt.append(m)
            out = nxt
        return out

    def _build(self):
        frontier = [(i,) for i in range(len(self.patches))]
        while frontier:
            nxt = []
            for sigma in frontier:
                boxes = self._region(sigma)
                if not boxes:
                    continue
                self._components[sigma] = _components(boxes)
                if len(sigma) < self.max_order:
                    nxt.extend(sigma + (j,) for j in range(sigma[-1] + 1, len(self.patches)))
            frontier = nxt

    @property
    def nerve(self) -> list[Sigma]:
        return sorted(self._components, key=lambda s: (len(s), s))

    def components(self, sigma: Sigma) -> list[tuple[Box, ...]]:
        return self._components[tuple(sigma)]

    def keys(self) -> list[Key]:
        return [(s, c) for s in self.nerve for c in range(len(self._components[s]))]

    def component_of(self, sigma: Sigma, point: Sequence[float]) -> int | None:
        for c, comp in enumerate(self._components.get(tuple(sigma), [])):
            if any(_contains(b, point) for b in comp):
                return c
        return None

    def interior_point(self, sigma: Sigma, c: int) -> list[float]:
        box = self._components[sigma][c][0]
        return [_interval_point(lo, hi, 0.5) for lo, hi in box]

    def parent(self, sigma: Sigma, tau: Sigma, c: int) -> int:
        """Component of U_sigma containing component c of U_tau (sigma a face of tau)."""
        out = self.component_of(sigma, self.interior_point(tau, c))
        if out is None:
            raise NotACover(f"U_{tau} is not inside U_{sigma}")
        return out

    def anchor(self, sigma: Sigma, c: int) -> list[float]:
        """Leftmost finite endpoint per axis (0 for axes unbounded on both sides)."""
        comp = self._components[sigma][c]
        out = []
        for axis in range(self.dim):
            lows = [b[axis][0] for b in comp]
            highs = [b[axis][1] for b in comp]
            if all(lo is not None for lo in lows):
                out.append(float(min(lows)))
            elif any(hi is not None for hi in highs) and all(lo is None for lo in lows) and all(
                    hi is not None for hi in highs):
                out.append(float(max(highs)))
            else:
                out.append(0.0)
        return out

    def sample_points(self, sigma: Sigma, c: int, n: int = 6, seed: int = 0) -> list[list[float]]:
        rng = np.random.default_rng([seed, c, *sigma])
        comp = self._components[sigma][c]
        pts = []
        for k in range(n):
            box = comp[k % len(comp)]
            t = rng.uniform(0.05, 0.95, size=self.dim)
            pts.append([_interval_point(lo, hi, ti) for (lo, hi), ti in zip(box, t)])
        return pts

    def to_json(self) -> dict:
        return {"dim": self.dim, "patches": [[box_to_json(b) for b in p] for p in self.patches]}

    @classmethod
    def from_json(cls, data: dict) -> "Cover":
        try:
            return cls(data["dim"], [[tuple(tuple(iv) for iv in b) for b in p] for p in data["patches"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad cover description: {exc}") from exc


def _components(boxes: list[Box]) -> list[tuple[Box, ...]]:
    parent = list(range(len(boxes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in itertools.combinations(range(len(boxes)), 2):
        if _meet(boxes[a], boxes[b]) is not None:
            parent[find(a)] = find(b)
    groups: dict[int, list[Box]] = {}
    for k, b in enumerate(boxes):
        groups.setdefault(find(k), []).append(b)
    comps = [tuple(sorted(set(g), key=_box_key)) for g in groups.values()]
    return sorted(comps, key=lambda g: _box_key(g[0]))


# --- check records ----------------------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    location: str
    residual: float
    tolerance: float
    path: str
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "location": self.location, "residual": self.residual,
                "tolerance": self.tolerance, "path": self.path, "passed": self.passed}


@dataclass
class ValidationReport:
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def add(self, name, location, residual, tolerance, path):
        self.records.append(CheckRecord(name, location, float(residual), tolerance, path,
                                        bool(residual <= tolerance)))

    def extend(self, other: "ValidationReport"):
        self.records.extend(other.records)

    def failed_names(self) -> set[str]:
        return {r.name for r in self.failures()}

    def to_json(self) -> dict:
        return {"passed": self.passed, "records": [r.to_json() for r in self.records]}


def _loc(sigma: Sigma, c: int) -> str:
    return f"sigma={list(sigma)} component={c}"


# --- bundle data ------------------------------------------------------------------------------


@dataclass
class Gluing:
    """Inclusion g: V_sigma -> V_tau and the odd involution ``e`` of V_tau on the complement of im g.

    ``e`` is stored on all of V_tau (zero on im g); None means a zero complement.
    """
    g: SuperMap
    e: SuperMap | None = None


@dataclass
class ClnBundleData:
    cover: Cover
    modules: dict[Key, CliffordModule]
    gluings: dict[tuple[Sigma, Sigma, int], Gluing]

    def module(self, sigma: Sigma, c: int) -> CliffordModule:
        return self.modules[(tuple(sigma), c)]

    def gluing(self, sigma: Sigma, tau: Sigma, c: int) -> Gluing:
        """Gluing into component c of U_tau; the identity when sigma == tau."""
        if tuple(sigma) == tuple(tau):
            return Gluing(self.module(tau, c).identity())
        return self.gluings[(tuple(sigma), tuple(tau), c)]

    def pairs(self) -> Iterable[tuple[Sigma, Sigma, int]]:
        for tau in self.cover.nerve:
            for c in range(len(self.cover.components(tau))):
                for r in range(1, len(tau)):
                    for sigma in itertools.combinations(tau, r):
                        yield sigma, tau, c

    def witness(self, sigma: Sigma, tau: Sigma, c: int) -> tuple[ExtensionWitness | None, SuperMap | None]:
        """The complement of g_{sigma tau} as a module with its witness, and the complement inclusion."""
        gl = self.gluing(sigma, tau, c)
        V = self.module(tau, c)
        if gl.g.source.dim == V.dim:
            return None, None
        W, h = orthogonal_complement(V, gl.g)
        hplus = W.inner.inverse() @ h.transpose_conj() @ V.inner.matrix()
        e = gl.e if gl.e is not None else SuperMap.zero(V.space, parity=1)
        eW = SuperMap(W.space, W.space, (hplus @ e @ h).entries, 1)
        return ExtensionWitness(W, eW, 1), h


def _pseudo_adjoint(g: SuperMap, M: CliffordModule, N: CliffordModule) -> SuperMap:
    return M.inner.inverse() @ g.transpose_conj() @ N.inner.matrix()


def validate_bundle(B: ClnBundleData) -> ValidationReport:
    """Module axioms, gluing axioms, composition law and witness compatibility, all exact."""
    rep = ValidationReport()
    cover = B.cover
    for key in cover.keys():
        if key not in B.modules:
            rep.add("module_present", _loc(*key), 1.0, 0.0, "exact")
            continue
        fails = check_module(B.modules[key]).failures
        rep.add("module_axioms", _loc(*key), float(len(fails)), 0.0, "exact")
    if not rep.passed:
        return rep
    for sigma, tau, c in B.pairs():
        loc = f"{list(sigma)}->{list(tau)} component={c}"
        try:
            gl = B.gluing(sigma, tau, c)
        except KeyError:
            rep.add("gluing_present", loc, 1.0, 0.0, "exact")
            continue
        M = B.module(sigma, cover.parent(sigma, tau, c))
        N = B.module(tau, c)
        bad = 0
        g = gl.g
        if g.source != M.space or g.target != N.space:
            rep.add("gluing_shape", loc, 1.0, 0.0, "exact")
            continue
        if (g.transpose_conj() @ N.inner.matrix() @ g).entries != M.inner.matrix().entries:
            bad += 1
        if g.entries and g.parity != 0:
            bad += 1
        bad += sum(1 for a, b in zip(M.rho, N.rho) if (b @ g - g @ a).entries)
        rep.add("inclusion_isometric_equivariant", loc, float(bad), 0.0, "exact")
        P = g @ _pseudo_adjoint(g, M, N)
        e = gl.e if gl.e is not None else SuperMap.zero(N.space, parity=1)
        bad = 0
        if e.entries and e.parity != 1:
            bad += 1
        if (e @ e).entries != (N.identity() - P).entries:
            bad += 1
        if (e @ g).entries:
            bad += 1
        if (N.adjoint(e) - e).entries:
            bad += 1
        bad += sum(1 for r in N.rho if (e @ r + r @ e).entries)
        rep.add("witness_involution", loc, float(bad), 0.0, "exact")
    for rho in cover.nerve:
        for c in range(len(cover.components(rho))):
            for r1 in range(1, len(rho)):
                for tau in itertools.combinations(rho, r1):
                    ct = cover.parent(tau, rho, c)
                    for r0 in range(1, len(tau)):
                        for sigma in itertools.combinations(tau, r0):
                            loc = f"{list(sigma)}<{list(tau)}<{list(rho)} component={c}"
                            try:
                                g_st = B.gluing(sigma, tau, ct)
                                g_tr = B.gluing(tau, rho, c)
                                g_sr = B.gluing(sigma, rho, c)
                            except KeyError:
                                continue
                            comp = g_tr.g @ g_st.g
                            rep.add("composition_law", loc, 0.0 if comp == g_sr.g else 1.0, 0.0, "exact")
                            # g_tau,rho carries the witness on V_sigma-perp in V_tau to the one in V_rho
                            e_st = g_st.e if g_st.e is not None else SuperMap.zero(B.module(tau, ct).space, parity=1)
                            e_sr = g_sr.e if g_sr.e is not None else SuperMap.zero(B.module(rho, c).space, parity=1)
                            ok = (e_sr @ g_tr.g).entries == (g_tr.g @ e_st).entries
                            rep.add("witness_compatibility", loc, 0.0 if ok else 1.0, 0.0, "exact")
    return rep


# --- form entries -----------------------------------------------------------------------------


class FormEntry:
    """Uniform pointwise access to exact forms, Chern forms, CS forms and linear combinations."""

    def __init__(self, terms: Sequence[tuple[complex, object]], dim: int):
        self.terms = [(c, t) for c, t in terms]
        self.dim = dim

    @classmethod
    def of(cls, obj, dim: int | None = None) -> "FormEntry":
        if isinstance(obj, FormEntry):
            return obj
        return cls([(1, obj)], dim if dim is not None else obj.dim)

    @classmethod
    def zero(cls, dim: int) -> "FormEntry":
        return cls([], dim)

    def __add__(self, other: "FormEntry") -> "FormEntry":
        return FormEntry(self.terms + FormEntry.of(other).terms, self.dim)

    def __neg__(self) -> "FormEntry":
        return FormEntry([(-c, t) for c, t in self.terms], self.dim)

    def __sub__(self, other) -> "FormEntry":
        return self + (-FormEntry.of(other))

    def scale(self, s) -> "FormEntry":
        return FormEntry([(s * c, t) for c, t in self.terms], self.dim)

    @property
    def exact(self) -> DifferentialForm | None:
        out = DifferentialForm(self.dim)
        for c, t in self.terms:
            w = t if isinstance(t, DifferentialForm) else getattr(t, "exact", None)
            if w is None:
                return None
            out = out + w.scale(c)
        return out

    @property
    def path(self) -> str:
        return "exact" if self.exact is not None else "numeric"

    def evaluate(self, point) -> dict[Index, complex]:
        out: dict[Index, complex] = {}
        for c, t in self.terms:
            for I, v in t.evaluate(point).items():
                out[I] = out.get(I, 0) + c * v
        return out

    def d_evaluate(self, point) -> dict[Index, complex]:
        out: dict[Index, complex] = {}
        for c, t in self.terms:
            vals = d_exterior(t).evaluate(point) if isinstance(t, DifferentialForm) else t.d_evaluate(point)
            for I, v in vals.items():
                out[I] = out.get(I, 0) + c * v
        return out


def _max_abs(d: dict) -> float:
    return max((abs(v) for v in d.values()), default=0.0)


# --- differential cocycles --------------------------------------------------------------------


@dataclass
class DifferentialCocycle:
    bundle: ClnBundleData
    superconns: dict[Key, Superconnection]
    phis: dict[tuple[int, int], DifferentialForm]
    global_form: DifferentialForm
    name: str = ""

    @property
    def cover(self) -> Cover:
        return self.bundle.cover

    @property
    def dim(self) -> int:
        return self.cover.dim

    def superconn(self, sigma: Sigma, c: int) -> Superconnection:
        key = (tuple(sigma), c)
        if key not in self.superconns:
            self.superconns[key] = flat(self.dim, self.bundle.module(*key))
        return self.superconns[key]

    def phi(self, i: int, c: int) -> DifferentialForm:
        return self.phis.get((i, c), DifferentialForm(self.dim))


def transferred(D: DifferentialCocycle, sigma: Sigma, c: int) -> list[Superconnection]:
    """The superconnections A_i (i in sigma) moved onto V_sigma by stable transfer."""
    B = D.bundle
    A_sigma = D.superconn(sigma, c)
    out = []
    for i in sigma:
        ci = D.cover.parent((i,), sigma, c) if len(sigma) > 1 else c
        Ai = D.superconn((i,), ci)
        if len(sigma) == 1:
            out.append(Ai)
            continue
        gl = B.gluing((i,), sigma, c)
        witness, h = B.witness((i,), sigma, c)
        out.append(stable_transfer(Ai, gl.g, witness, A_sigma, h))
    return out


@dataclass
class Cochain:
    """Cech-de Rham cochain: one form entry per (sigma, component)."""
    cover: Cover
    entries: dict[Key, FormEntry]

    def entry(self, sigma: Sigma, c: int) -> FormEntry:
        return self.entries.get((tuple(sigma), c), FormEntry.zero(self.cover.dim))

    def closedness(self, samples: int = 4, tol: float = 1e-8, seed: int = 0) -> ValidationReport:
        """(d + delta) c = 0: per sigma, sum_k (-1)^k c_{sigma - k} + (-1)^p d c_sigma vanishes."""
        rep = ValidationReport()
        cov = self.cover
        for sigma in cov.nerve:
            p = len(sigma) - 1
            for c in range(len(cov.components(sigma))):
                own = self.entry(sigma, c)
                faces = []
                if p > 0:
                    for k in range(p + 1):
                        face = sigma[:k] + sigma[k + 1:]
                        faces.append(((-1) ** k, self.entry(face, cov.parent(face, sigma, c))))
                sign = (-1) ** p
                exact_own = own.exact
                exact_faces = [f.exact for _, f in faces]
                if exact_own is not None and all(w is not None for w in exact_faces):
                    total = d_exterior(exact_own).scale(sign)
                    for (s, _), w in zip(faces, exact_faces):
                        total = total + w.scale(s)
                    if total.is_zero():
                        rep.add("d_plus_delta_closed", _loc(sigma, c), 0.0, 0.0, "exact")
                        continue
                worst = 0.0
                for pt in cov.sample_points(sigma, c, samples, seed):
                    acc = {I: sign * v for I, v in own.d_evaluate(pt).items()}
                    for s, f in faces:
                        for I, v in f.evaluate(pt).items():
                            acc[I] = acc.get(I, 0) + s * v
                    worst = max(worst, _max_abs(acc))
                rep.add("d_plus_delta_closed", _loc(sigma, c), worst, tol, "numeric")
        return rep


def total_differential(c: Cochain) -> Cochain:
    """(d + delta) c with the sign convention of ``Cochain.closedness``; entries must be exact."""
    cov = c.cover
    out: dict[Key, FormEntry] = {}
    for sigma in cov.nerve:
        p = len(sigma) - 1
        for k in range(len(cov.components(sigma))):
            own = c.entry(sigma, k).exact
            if own is None:
                raise ValueError("total_differential needs exact entries")
            total = d_exterior(own).scale((-1) ** p)
            for j in range(p + 1 if p else 0):
                face = sigma[:j] + sigma[j + 1:]
                w = c.entry(face, cov.parent(face, sigma, k)).exact
                if w is None:
                    raise ValueError("total_differential needs exact entries")
                total = total + w.scale((-1) ** j)
            out[(sigma, k)] = FormEntry.of(total)
    return Cochain(cov, out)


def _eps(p: int) -> int:
    return -1 if (p * (p - 1) // 2) % 2 else 1


def assemble_cocycle(B: ClnBundleData, superconns: dict[Key, Superconnection] | None = None,
                     tol: float = 1e-10) -> Cochain:
    """Row 0: Ch(A_i); row p: eps_p CS_p of the transferred family on V_sigma."""
    D = superconns if isinstance(superconns, DifferentialCocycle) else DifferentialCocycle(
        B, dict(superconns or {}), {}, DifferentialForm(B.cover.dim))
    entries: dict[Key, FormEntry] = {}
    for sigma, c in B.cover.keys():
        if len(sigma) == 1:
            entries[(sigma, c)] = FormEntry.of(chern(D.superconn(sigma, c)))
            continue
        As = transferred(D, sigma, c)
        cs = cs_simplicial(As, tol)
        entries[(sigma, c)] = FormEntry.of(cs).scale(_eps(len(sigma) - 1))
    return Cochain(B.cover, entries)


def _restricted_exact_zero(w: DifferentialForm, pts) -> float:
    return max((_max_abs(w.evaluate(p)) for p in pts), default=0.0)


def validate_differential_cocycle(D: DifferentialCocycle, samples: int = 6, tol: float = 1e-8,
                                  seed: int = 0, bundle_checks: bool = True) -> ValidationReport:
    """Bundle axioms plus the three cocycle identities.

    (i) global - Ch(A_i) = d phi_i on each component of U_i.
    (ii) CS(A'_i, A'_j) - (phi_i - phi_j) is exact on each component of U_ij
         (degree-0 part constant: compared with its value at the anchor;
         higher parts closed).
    (iii) the global form is closed.
    """
    rep = validate_bundle(D.bundle) if bundle_checks else ValidationReport()
    if not rep.passed:
        return rep
    cov = D.cover
    G = D.global_form
    for i in range(len(cov.patches)):
        for c in range(len(cov.components((i,)))):
            A = D.superconn((i,), c)
            try:
                A.require_flags()
            except Exception:
                rep.add("superconnection_flags", _loc((i,), c), 1.0, 0.0, "exact")
                continue
            ch = FormEntry.of(chern(A))
            resid = FormEntry.of(G) - ch - FormEntry.of(d_exterior(D.phi(i, c)))
            w = resid.exact
            if w is not None and w.is_zero():
                rep.add("determines_chern", _loc((i,), c), 0.0, 0.0, "exact")
                continue
            pts = cov.sample_points((i,), c, samples, seed)
            worst = max(_max_abs(resid.evaluate(p)) for p in pts)
            rep.add("determines_chern", _loc((i,), c), worst, tol, "numeric")
    for sigma in cov.nerve:
        if len(sigma) != 2:
            continue
        i, j = sigma
        for c in range(len(cov.components(sigma))):
            ci, cj = cov.parent((i,), sigma, c), cov.parent((j,), sigma, c)
            try:
                cs = cs_simplicial(transferred(D, sigma, c))
            except WitnessInvalid:
                rep.add("compatible_chern", _loc(sigma, c), 1.0, 0.0, "exact")
                continue
            r = FormEntry.of(cs) - FormEntry.of(D.phi(i, ci)) + FormEntry.of(D.phi(j, cj))
            w = r.exact
            if w is not None and d_exterior(w).is_zero():
                rep.add("compatible_chern", _loc(sigma, c), 0.0, 0.0, "exact")
                continue
            anchor = cov.anchor(sigma, c)
            base = r.evaluate(anchor).get((), 0)
            worst = 0.0
            for p in cov.sample_points(sigma, c, samples, seed):
                worst = max(worst, abs(r.evaluate(p).get((), 0) - base))
                dvals = {I: v for I, v in r.d_evaluate(p).items() if len(I) >= 2}
                worst = max(worst, _max_abs(dvals))
            rep.add("compatible_chern", _loc(sigma, c), worst, tol, "numeric")
    rep.add("global_closed", "base", 0.0 if d_exterior(G).is_zero() else 1.0, 0.0, "exact")
    return rep


def validate_all(D: DifferentialCocycle, samples: int = 6, tol: float = 1e-8, seed: int = 0,
                 closedness_samples: int = 4) -> ValidationReport:
    """Cocycle identities plus (d + delta)-closedness of the assembled cochain."""
    rep = validate_differential_cocycle(D, samples, tol, seed)
    if rep.passed:
        rep.extend(assemble_cocycle(D.bundle, D).closedness(closedness_samples, tol, seed))
    return rep


# --- standard cocycles ------------------------------------------------------------------------


def _witness_e() -> SuperMap:
    """The e generator of Cl_{1,1} on R^{1|1}; it pairs the suspension fiber with nothing."""
    return builtin_module("cl11_r11").rho[1]


def _uniform_bundle(cover: Cover, carries: Sequence[bool], fiber: CliffordModule) -> ClnBundleData:
    """V_sigma = fiber when some patch of sigma carries it, else zero; zero pieces paired off by e."""
    zero = zero_module(fiber.signature)
    e = _witness_e()
    modules, gluings = {}, {}
    for sigma, c in cover.keys():
        modules[(sigma, c)] = fiber if any(carries[i] for i in sigma) else zero
    B = ClnBundleData(cover, modules, gluings)
    for sigma, tau, c in B.pairs():
        src = B.module(sigma, cover.parent(sigma, tau, c))
        dst = B.module(tau, c)
        if src.dim == dst.dim:
            gluings[(sigma, tau, c)] = Gluing(SuperMap.identity(dst.space) if dst.dim else
                                              SuperMap.zero(dst.space))
        else:
            gluings[(sigma, tau, c)] = Gluing(SuperMap.zero(src.space, dst.space), e)
    return B


def _erf_phi(dim: int, side: int, axis: int = 0) -> DifferentialForm:
    """sqrt2 * integral of e^{-x^2} from -inf (side -1) or +inf (side +1)."""
    return DifferentialForm.function(CoeffFn.erf_atom(dim, axis, 1, side, Scalar.sqrt2_power(1)))


def suspension_cover() -> Cover:
    return Cover(1, [[((-1, 1),)], [((None, 0),), ((0, None),)]])


def _suspension_1() -> DifferentialCocycle:
    cover = suspension_cover()
    M = suspension_module()
    B = _uniform_bundle(cover, [True, False], M)
    A = suspension(1)
    superconns = {}
    for sigma, c in cover.keys():
        mod = B.module(sigma, c)
        superconns[(sigma, c)] = A if mod.dim else flat(1, mod)
    # U_1 components are ordered (-inf, 0) then (0, inf)
    phis = {(0, 0): DifferentialForm(1), (1, 0): _erf_phi(1, -1), (1, 1): _erf_phi(1, 1)}
    return DifferentialCocycle(B, superconns, phis, mathai_quillen(1), name="suspension(1)")


def product_cover(C1: Cover, C2: Cover) -> Cover:
    patches = [[b1 + b2 for b1 in p1 for b2 in p2] for p1 in C1.patches for p2 in C2.patches]
    return Cover(C1.dim + C2.dim, patches)


def product_cocycle(D1: DifferentialCocycle, D2: DifferentialCocycle) -> DifferentialCocycle:
    """External product over the product cover; patch (i, j) has index i * N2 + j."""
    C1, C2 = D1.cover, D2.cover
    n2 = len(C2.patches)
    cover = product_cover(C1, C2)
    d1 = C1.dim

    def split(sigma, c):
        s1 = tuple(sorted({k // n2 for k in sigma}))
        s2 = tuple(sorted({k % n2 for k in sigma}))
        pt = cover.interior_point(sigma, c)
        return s1, C1.component_of(s1, pt[:d1]), s2, C2.component_of(s2, pt[d1:])

    modules, gluings, superconns = {}, {}, {}
    parts = {}
    for sigma, c in cover.keys():
        s1, c1, s2, c2 = parts[(sigma, c)] = split(sigma, c)
        modules[(sigma, c)] = module_tensor(D1.bundle.module(s1, c1), D2.bundle.module(s2, c2))
        superconns[(sigma, c)] = external_product(D1.superconn(s1, c1), D2.superconn(s2, c2)).verify()
    B = ClnBundleData(cover, modules, gluings)
    for sigma, tau, c in B.pairs():
        s1, c1, s2, c2 = parts[(sigma, cover.parent(sigma, tau, c))]
        t1, k1, t2, k2 = parts[(tau, c)]
        g1 = D1.bundle.gluing(s1, t1, k1)
        g2 = D2.bundle.gluing(s2, t2, k2)
        V1 = D1.bundle.module(t1, k1)
        V2 = D2.bundle.module(t2, k2)
        g = koszul_tensor(g1.g, g2.g)
        P1 = g1.g @ _pseudo_adjoint(g1.g, D1.bundle.module(s1, c1), V1)
        e1 = g1.e if g1.e is not None else SuperMap.zero(V1.space, parity=1)
        e2 = g2.e if g2.e is not None else SuperMap.zero(V2.space, parity=1)
        e = koszul_tensor(e1, SuperMap.identity(V2.space)) + koszul_tensor(P1, e2)
        gluings[(sigma, tau, c)] = Gluing(g, SuperMap(e.source, e.target, e.entries, 1) if e.entries else None)
    phis = {}
    m2 = len(C2.patches)
    for k in range(len(cover.patches)):
        i, j = divmod(k, m2)
        for c in range(len(cover.components((k,)))):
            _, c1, _, c2 = parts[((k,), c)]
            _, form = product_data(D1.superconn((i,), c1), D1.phi(i, c1), D2.superconn((j,), c2), D2.phi(j, c2))
            phis[(k, c)] = form
    G = D1.global_form.embed(cover.dim, list(range(d1))).wedge(
        D2.global_form.embed(cover.dim, list(range(d1, cover.dim))))
    return DifferentialCocycle(B, superconns, phis, G, name=f"{D1.name}x{D2.name}")


def suspension_cocycle(n: int = 1) -> DifferentialCocycle:
    if n < 1:
        raise ValueError("n must be at least 1")
    D = _suspension_1()
    for _ in range(n - 1):
        D = product_cocycle(D, _suspension_1())
    D.name = f"suspension({n})"
    return D


def global_cocycle(A: Superconnection, box: Box | None = None) -> DifferentialCocycle:
    """One patch carrying A, phi = 0 and global form Ch(A) (exact path required)."""
    box = box or tuple((None, None) for _ in range(A.dim))
    cover = Cover(A.dim, [[box]])
    B = ClnBundleData(cover, {((0,), 0): A.fiber}, {})
    ch = chern(A)
    if ch.exact is None:
        raise InvalidConcordance("global cocycle needs an exact Chern form")
    return DifferentialCocycle(B, {((0,), 0): A}, {}, ch.exact, name=f"global({A.name})")


def closed_form_cocycle(phi: DifferentialForm) -> DifferentialCocycle:
    """Zero bundle on one patch with a closed phi; global form d phi = 0."""
    dim = phi.dim
    cover = Cover(dim, [[tuple((None, None) for _ in range(dim))]])
    B = ClnBundleData(cover, {((0,), 0): zero_module()}, {})
    return DifferentialCocycle(B, {}, {(0, 0): phi}, d_exterior(phi), name="closed-form")


def suspension_concordance() -> DifferentialCocycle:
    """Cylinder over R_x x R_t from the suspension cocycle (t = 0) to the global one (t = 1).

    Patches: (-1,1) x R carrying d + x e; (R - 0) x (-inf, 2/3) with the zero
    bundle and the Erf phi; R x (1/3, inf) carrying d + x e.
    """
    cover = Cover(2, [
        [((-1, 1), (None, None))],
        [((None, 0), (None, Fraction(2, 3))), ((0, None), (None, Fraction(2, 3)))],
        [((None, None), (Fraction(1, 3), None))],
    ])
    M = suspension_module()
    B = _uniform_bundle(cover, [True, False, True], M)
    A = suspension(2, axis=0)
    superconns = {k: (A if B.module(*k).dim else flat(2, B.module(*k))) for k in cover.keys()}
    phis = {}
    for c in range(len(cover.components((1,)))):
        x = cover.interior_point((1,), c)[0]
        phis[(1, c)] = _erf_phi(2, -1 if x < 0 else 1)
    G = mathai_quillen(1).embed(2, [0])
    return DifferentialCocycle(B, superconns, phis, G, name="suspension-concordance")


# --- concordances -----------------------------------------------------------------------------


def _slice_coeff(f: CoeffFn, axis: int, value: Fraction) -> CoeffFn:
    """Restrict a coefficient to the hyperplane x_axis = value (polynomial dependence on x_axis only)."""
    dim = f.dim - 1
    out = CoeffFn(dim)
    for (mono, rates, atoms), c in f.terms.items():
        if rates[axis] or any(a == axis for a, _, _ in atoms):
            if value != 0 or any(a == axis for a, _, _ in atoms):
                raise InvalidConcordance("slice needs polynomial dependence on the cylinder coordinate")
        factor = Fraction(value) ** mono[axis]
        if factor == 0:
            continue
        drop = lambda t: t[:axis] + t[axis + 1:]
        new_atoms = tuple((a - (a > axis), r, s) for a, r, s in atoms)
        out = out + CoeffFn(dim, {(drop(mono), drop(rates), new_atoms): c * Scalar.const(factor)})
    return out


def slice_form(w: DifferentialForm, axis: int, value) -> DifferentialForm:
    comps = {}
    for I, f in w.comps.items():
        if axis in I:
            continue
        J = tuple(i - (i > axis) for i in I)
        comps[J] = _slice_coeff(f, axis, Fraction(value))
    return DifferentialForm(w.dim - 1, comps)


def _slice_end(X: EndValuedForm, axis: int, value: Fraction) -> EndValuedForm:
    comps = {}
    for I, m in X.comps.items():
        if axis in I:
            continue
        J = tuple(i - (i > axis) for i in I)
        comps[J] = {rc: _slice_coeff(f, axis, value) for rc, f in m.items()}
    return EndValuedForm(X.dim - 1, X.space, comps)


def slice_cocycle(D: DifferentialCocycle, value, axis: int | None = None) -> DifferentialCocycle:
    """Restriction of a cocycle over B x R to B x {value}."""
    axis = D.dim - 1 if axis is None else axis
    value = Fraction(value)
    cov = D.cover

    def cut(box):
        lo, hi = box[axis]
        if (lo is not None and value <= lo) or (hi is not None and value >= hi):
            return None
        return box[:axis] + box[axis + 1:]

    keep = [i for i, p in enumerate(cov.patches) if any(cut(b) is not None for b in p)]
    new = Cover(D.dim - 1, [[cut(b) for b in cov.patches[i] if cut(b) is not None] for i in keep])

    def old_key(sigma, c):
        old_sigma = tuple(keep[k] for k in sigma)
        pt = new.interior_point(sigma, c)
        full = pt[:axis] + [float(value)] + pt[axis:]
        oc = cov.component_of(old_sigma, full)
        return old_sigma, oc

    modules, gluings, superconns, phis = {}, {}, {}, {}
    okeys = {}
    for sigma, c in new.keys():
        okeys[(sigma, c)] = ok = old_key(sigma, c)
        modules[(sigma, c)] = D.bundle.module(*ok)
        A = D.superconn(*ok)
        parts = {j: _slice_end(X, axis, value) for j, X in A.parts.items()}
        parts = {j: X for j, X in parts.items() if X}
        superconns[(sigma, c)] = Superconnection(D.dim - 1, A.fiber, parts, name=A.name).verify()
        if len(sigma) == 1:
            phis[(sigma[0], c)] = slice_form(D.phi(*(ok[0][0], ok[1])), axis, value)
    B = ClnBundleData(new, modules, gluings)
    for sigma, tau, c in B.pairs():
        os_, _ = okeys[(sigma, new.parent(sigma, tau, c))]
        ot, oc = okeys[(tau, c)]
        gluings[(sigma, tau, c)] = D.bundle.gluing(os_, ot, oc)
    return DifferentialCocycle(B, superconns, phis, slice_form(D.global_form, axis, value),
                               name=f"{D.name}|t={value}")


def total_cs(D: DifferentialCocycle, axis: int | None = None, check: bool = True,
             tol: float = 1e-8, samples: int = 6) -> DifferentialForm:
    """Integral of the global Chern form over t in [0, 1] (t the last coordinate).

    With the same orientation as the CS forms, d(total) = G|_{t=1} - G|_{t=0};
    that Stokes identity is checked at sample points.
    """
    axis = D.dim - 1 if axis is None else axis
    if axis != D.dim - 1:
        raise InvalidConcordance("the cylinder coordinate must be the last one")
    if check and not validate_differential_cocycle(D).passed:
        raise InvalidConcordance("concordance data do not form a differential cocycle")
    d = D.dim - 1
    out = _fiber_integrate_exact(D.global_form, d, 1)
    if out is None:
        raise InvalidConcordance("global form depends on t through Gaussian factors; no exact integral")
    G1, G0 = slice_form(D.global_form, axis, 1), slice_form(D.global_form, axis, 0)
    rng = np.random.default_rng(0)
    dout = d_exterior(out)
    for _ in range(samples):
        pt = list(rng.uniform(-2, 2, size=d))
        a, b, c = dout.evaluate(pt), G1.evaluate(pt), G0.evaluate(pt)
        keys = set(a) | set(b) | set(c)
        if max((abs(a.get(I, 0) - b.get(I, 0) + c.get(I, 0)) for I in keys), default=0.0) > tol:
            raise InvalidConcordance("Stokes identity for the total CS form fails")
    return out


# --- JSON -------------------------------------------------------------------------------------


def _end_to_json(X: EndValuedForm) -> list:
    return [{"index": list(I), "entries": [[r, c, coeff_to_json(f)] for (r, c), f in sorted(m.items())]}
            for I, m in sorted(X.comps.items())]


def _end_from_json(dim: int, space: SuperVectorSpace, data: list) -> EndValuedForm:
    comps = {}
    for item in data:
        comps[tuple(item["index"])] = {(r, c): coeff_from_json(dim, f) for r, c, f in item["entries"]}
    return EndValuedForm(dim, space, comps)


def cocycle_to_json(D: DifferentialCocycle) -> dict:
    B = D.bundle
    return {
        "schema": SCHEMA,
        "kind": "differential_cocycle",
        "name": D.name,
        "cover": D.cover.to_json(),
        "modules": [{"sigma": list(s), "component": c, "module": module_to_json(B.module(s, c))}
                    for s, c in D.cover.keys()],
        "gluings": [{"sigma": list(s), "tau": list(t), "component": c, "g": map_to_json(B.gluing(s, t, c).g),
                     "e": None if B.gluing(s, t, c).e is None else map_to_json(B.gluing(s, t, c).e)}
                    for s, t, c in B.pairs()],
        "superconnections": [{"sigma": list(s), "component": c,
                              "parts": {str(j): _end_to_json(X) for j, X in sorted(D.superconn(s, c).parts.items())}}
                             for s, c in D.cover.keys()],
        "phis": [{"patch": i, "component": c, "form": form_to_json(w)} for (i, c), w in sorted(D.phis.items())],
        "global": form_to_json(D.global_form),
    }


def cocycle_from_json(data: dict | str) -> DifferentialCocycle:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        cover = Cover.from_json(data["cover"])
        d = cover.dim
        modules = {(tuple(m["sigma"]), m["component"]): module_from_json(m["module"]) for m in data["modules"]}
        gluings = {}
        for gl in data.get("gluings", []):
            key = (tuple(gl["sigma"]), tuple(gl["tau"]), gl["component"])
            src = modules[(key[0], cover.parent(key[0], key[1], key[2]))].space
            dst = modules[(key[1], key[2])].space
            g = SuperMap.from_dense(gl["g"], src, dst, parity=0)
            e = None if gl.get("e") is None else SuperMap.from_dense(gl["e"], dst, dst, parity=1)
            gluings[key] = Gluing(g, e)
        B = ClnBundleData(cover, modules, gluings)
        superconns = {}
        for sc in data.get("superconnections", []):
            key = (tuple(sc["sigma"]), sc["component"])
            M = modules[key]
            parts = {int(j): _end_from_json(d, M.space, X) for j, X in sc["parts"].items()}
            superconns[key] = Superconnection(d, M, parts).verify()
        phis = {(p["patch"], p["component"]): form_from_json(p["form"]) for p in data.get("phis", [])}
        G = form_from_json(data["global"]) if data.get("global") is not None else DifferentialForm(d)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad cocycle description: {exc!r}") from exc
    return DifferentialCocycle(B, superconns, phis, G, name=data.get("name", ""))
