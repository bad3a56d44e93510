"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line; the lines are printed in the terminal summary.
"""
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from cliffko.cech import assemble_cocycle, suspension_cocycle, suspension_concordance, total_cs, validate_all
from cliffko.cli import cmd_ko_ring, cmd_trace_table
from cliffko.clifford import generator_bound
from cliffko.cmodules import (builtin_module, clifford_supertrace, equivariant_hom, exact_det, find_invertible,
                              module_power, module_sum, module_tensor, random_equivariant, trivial_module)
from cliffko.forms import DifferentialForm, integrate_full, mathai_quillen
from cliffko.indexsim import (crossing_family, cutoff_bundle, gluing_data, index_cocycle, numeric_gluing_residuals,
                              six_dim_family, spectral_cover, validate_index_cocycle)
from cliffko.scalars import Scalar
from cliffko.superconn import (chern, chern_form, cs_form, cs_simplicial, flat, random_superconnection,
                               stable_transfer, suspension, suspension_module)
from cliffko.superlinear import koszul_tensor

from conftest import ACCEPTANCE
from test_forms import test_d_squared_zero as d_squared_zero
from test_scalars import test_ring_axioms as ring_axioms
from test_superconn import _swap_setup
from test_superlinear import test_graded_jacobi as graded_jacobi
from test_superlinear import test_supertrace_kills_commutators as supertrace_kills_commutators

F = Fraction
u = Scalar.u_power


@contextmanager
def criterion(n: int, title: str, budget: float | None = None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"FAIL {n:2d} {title} ({elapsed:.2f}s): {exc}"
        ACCEPTANCE.append(line)
        print(line)
        raise
    line = f"PASS {n:2d} {title} ({elapsed:.2f}s)"
    ACCEPTANCE.append(line)
    print(line)


def worst_gap(a: dict, b: dict, sign: float = 1.0) -> float:
    return max((abs(complex(a.get(I, 0)) - sign * complex(b.get(I, 0))) for I in set(a) | set(b)), default=0.0)


def test_c01_supertrace_table():
    with criterion(1, "Clifford supertrace table, exact", 1.0):
        rep = cmd_trace_table(0, select=["str_cl11_identity", "str_cl4_identity", "str_cl8_identity",
                                         "str_complex_cl2_identity", "str_cl4_squared", "str_cl8_fourfold_sum"])
        assert len(rep.checks) == 6
        assert rep.passed, [c.name for c in rep.checks if not c.passed]
        cl4 = builtin_module("cl4_quat")
        assert clifford_supertrace(cl4) == u(-4, 2)
        assert clifford_supertrace(builtin_module("cl8_oct")) == u(-8)
        assert clifford_supertrace(builtin_module("cl2_complex")) == Scalar.monomial(1, i=1, v=-2)
        assert clifford_supertrace(cl4) ** 2 == u(-8, 4)


def test_c02_periodicity():
    with criterion(2, "eight-fold periodicity of sTr, n <= 2, k <= 2, exact"):
        cl1 = builtin_module("cl1_regular")
        cl8 = builtin_module("cl8_oct")
        small = [trivial_module(), cl1, module_tensor(cl1, cl1)]
        rng = np.random.default_rng(11)
        for M in small:
            assert M.signature.rank <= 2
            T = random_equivariant(M, rng, parity=0)
            for k in (1, 2):
                big, Tk = M, T
                with generator_bound(M.signature.rank + 8 * k):
                    for _ in range(k):
                        big = module_tensor(big, cl8)
                        Tk = koszul_tensor(Tk, cl8.identity())
                    assert clifford_supertrace(big, Tk) == u(-8 * k) * clifford_supertrace(M, T)


def test_c03_mathai_quillen():
    with criterion(3, "suspension Chern form is Gaussian; normalization for n <= 4", 1.0):
        assert chern_form(suspension(1)) == mathai_quillen(1)
        for n in range(1, 5):
            two_pi_half = Scalar.sqrt2_power(n) * Scalar.monomial(1, p=n)
            assert integrate_full(mathai_quillen(n)) == two_pi_half


def _stokes_residual(A0, A1, points) -> float:
    cs = cs_form(A0, A1)
    c0, c1 = chern(A0), chern(A1)
    worst = 0.0
    for x in points:
        e0, e1 = c0.evaluate([x]), c1.evaluate([x])
        diff = {I: e1.get(I, 0) - e0.get(I, 0) for I in set(e0) | set(e1)}
        worst = max(worst, worst_gap(cs.d_evaluate([x]), diff))
    return worst


def test_c04_chern_simons_stokes():
    with criterion(4, "dCS = Ch(A1) - Ch(A0) at 20 points; simplicial k = 2 at 1e-8", 30.0):
        pts = np.linspace(-2.5, 2.5, 20)
        assert _stokes_residual(flat(1, suspension_module()), suspension(1), pts) <= 1e-8
        susp2 = module_sum(suspension_module(), suspension_module())
        rng = np.random.default_rng(5)
        for _ in range(5):
            A0, A1 = (random_superconnection(rng, 1, susp2) for _ in range(2))
            assert _stokes_residual(A0, A1, pts) <= 1e-8
        from test_superconn import CL02

        As = [random_superconnection(rng, 1, module_sum(CL02, CL02)) for _ in range(3)]
        cs2 = cs_simplicial(As)
        faces = [cs_form(As[1], As[2]), cs_form(As[0], As[2]), cs_form(As[0], As[1])]
        for x in (-0.8, 0.3, 1.4):
            rhs: dict = {}
            for j, f in enumerate(faces):
                for I, v in f.evaluate([x]).items():
                    rhs[I] = rhs.get(I, 0) + (-1) ** j * v
            assert worst_gap(cs2.d_evaluate([x]), rhs) <= 1e-8


def test_c05_stable_transfer():
    with criterion(5, "stable transfer preserves the Chern form, 10 cases, exact", 10.0):
        for seed in range(10):
            A0, g, wit, A1, h = _swap_setup(np.random.default_rng(100 + seed))
            A0p = stable_transfer(A0, g, wit, A1, h).verify()
            assert chern_form(A0p) == chern_form(A0)


def test_c06_cech_de_rham_closedness():
    with criterion(6, "(d + delta) closedness on the suspension cover and index cocycles", 30.0):
        D = suspension_cocycle(1)
        assert assemble_cocycle(D.bundle, D).closedness(tol=1e-8).passed
        for fam, lams in ((crossing_family(), [F(1, 2), 2]), (six_dim_family(), [F(1, 4), 1, F(9, 4)])):
            rep = validate_index_cocycle(index_cocycle(fam, lams), tol=1e-8)
            assert rep.passed, rep.failed_names()


def test_c07_differential_cocycle():
    with criterion(7, "suspension cocycle validates; concordance total CS vanishes"):
        rep = validate_all(suspension_cocycle(1))
        assert rep.passed, rep.failed_names()
        assert total_cs(suspension_concordance()) == DifferentialForm(1)


def test_c08_ko_ring_witnesses():
    with criterion(8, "extension witnesses for 2 eta and eta^3; invertible intertwiner", 60.0):
        rep = cmd_ko_ring(0)
        assert rep.passed, [c.name for c in rep.checks if not c.passed]
        cl4, cl8 = builtin_module("cl4_quat"), builtin_module("cl8_oct")
        T, det, _ = find_invertible(equivariant_hom(module_tensor(cl4, cl4), module_power(cl8, 4), 0))
        assert det != Scalar.const(0) and exact_det(T) == det


def test_c09_index_simulator():
    with criterion(9, "index simulator: crossing family exact, six-dimensional family at 1e-10", 30.0):
        fam = crossing_family()
        (reg,) = spectral_cover(fam, [1])
        assert [b.rank for b in cutoff_bundle(fam, 1, reg)] == [0, 2, 0]
        iv = (F(3, 4), F(9, 10))
        g12, e12, _, mid = gluing_data(fam, F(1, 2), 1, iv)
        g23, e23, _, _ = gluing_data(fam, 1, 2, iv)
        g13, e13, _, _ = gluing_data(fam, F(1, 2), 2, iv)
        assert e12 @ e12 == mid.identity()
        assert g23 @ g12 == g13
        assert e23 is None and g23 @ e12 @ g23.transpose_conj() == e13
        assert validate_index_cocycle(index_cocycle(fam, [F(1, 2), 2])).passed
        six = six_dim_family()
        ic = index_cocycle(six, [F(1, 4), 1, F(9, 4)])
        worst = 0.0
        for sigma, tau, c in ic.bundle.pairs():
            lam_s = max(ic.lams[i] for i in sigma)
            lam_t = max(ic.lams[i] for i in tau)
            lo, hi = ic.bundle.cover.components(tau)[c][0][0]
            worst = max(worst, *numeric_gluing_residuals(six, lam_s, lam_t, (lo, hi)).values())
        assert worst <= 1e-10


def test_c10_property_suites():
    with criterion(10, "property suites, 200 seed-pinned cases each", 30.0):
        d_squared_zero()
        graded_jacobi()
        supertrace_kills_commutators()
        ring_axioms()
