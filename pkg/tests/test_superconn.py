import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffko.cmodules import (ExtensionWitness, builtin_module, forget_f, module_sum, module_tensor, pi_swap_witness,
                              trivial_module, zero_module)
from cliffko.errors import FiberMismatch, FlagMissing, NotIsometric, WitnessInvalid
from cliffko.forms import CoeffFn, DifferentialForm, d_exterior, mathai_quillen
from cliffko.scalars import ONE
from cliffko.superconn import (alpha_powers_ok, chern, chern_form, cs_form, cs_simplicial,
                               direct_sum, external_product, flat, from_pieces, product_data,
                               random_superconnection, stable_transfer, suspension, suspension_module)
from cliffko.superlinear import SuperMap, sum_index

CL11 = builtin_module("cl11_r11")
E = CL11.rho[1]
SUSP2 = module_sum(suspension_module(), suspension_module())
CL02 = forget_f(module_tensor(CL11, CL11))
seeds = st.integers(0, 2 ** 32 - 1)


def components_close(a: dict, b: dict, tol: float) -> float:
    worst = 0.0
    for I in set(a) | set(b):
        worst = max(worst, abs(complex(a.get(I, 0)) - complex(b.get(I, 0))))
    assert worst <= tol, worst
    return worst


def test_suspension_is_self_adjoint_and_linear():
    A = suspension(1)
    assert A.self_adjoint and A.clifford_linear
    assert A.adjoint() == A
    F = flat(1, suspension_module())
    assert F.adjoint() == F


def test_two_form_adjoint_sign():
    # degree 2 picks up (-1)^3: skew-adjoint B is fixed, self-adjoint B flips
    M = CL02
    skew = M.rho[0] @ M.rho[1]
    A = from_pieces(2, M, [(skew, None, (0, 1))])
    assert A.adjoint().parts[2] == A.parts[2]
    B = from_pieces(2, M, [(M.identity(), None, (0, 1))])
    assert B.adjoint().parts[2] == -B.parts[2]


def test_chern_examples():
    assert chern_form(flat(1, builtin_module("zero"))) == DifferentialForm(1)
    assert chern_form(suspension(1)) == mathai_quillen(1)
    A = suspension(1)
    for n in (2, 3):
        A = external_product(A, suspension(1)).verify()
        assert chern_form(A) == mathai_quillen(n)


def test_flat_trivial_module_is_one():
    assert chern_form(flat(1, trivial_module())) == DifferentialForm.const(1)


def test_chern_requires_flags():
    A = from_pieces(1, suspension_module(), [(CL11.rho[0], CoeffFn.coordinate(1, 0), ())])
    with pytest.raises(FlagMissing):
        chern(A)


def test_cs_trivial_cases():
    A = suspension(1)
    assert cs_form(A, A).exact == DifferentialForm(1)
    rng = np.random.default_rng(0)
    As = [random_superconnection(rng, 1, CL02)] * 3
    cs = cs_simplicial(As)
    for x in (-0.5, 0.4):
        components_close(cs.evaluate([x]), {}, 1e-12)


def test_cs_fiber_mismatch():
    with pytest.raises(FiberMismatch):
        cs_form(suspension(1), flat(1, CL11))


def test_cs_flat_to_suspension():
    A0, A1 = flat(1, suspension_module()), suspension(1)
    cs = cs_form(A0, A1)
    for x in np.linspace(-3, 3, 20):
        want = mathai_quillen(1).evaluate([x])
        components_close(cs.d_evaluate([x]), want, 1e-8)


def test_cs_additive_under_sum():
    rng = np.random.default_rng(4)
    A0, A1 = (random_superconnection(rng, 1, suspension_module()) for _ in range(2))
    B0, B1 = (random_superconnection(rng, 1, SUSP2) for _ in range(2))
    S = cs_form(direct_sum(A0, B0).verify(), direct_sum(A1, B1).verify())
    a, b = cs_form(A0, A1), cs_form(B0, B1)
    for x in (-0.7, 0.2, 1.1):
        pa, pb = a.evaluate([x]), b.evaluate([x])
        want = {I: pa.get(I, 0) + pb.get(I, 0) for I in set(pa) | set(pb)}
        components_close(S.evaluate([x]), want, 1e-8)


def test_simplicial_face_identity():
    rng = np.random.default_rng(3)
    As = [random_superconnection(rng, 1, module_sum(CL02, CL02)) for _ in range(3)]
    cs2 = cs_simplicial(As)
    faces = [cs_form(As[1], As[2]), cs_form(As[0], As[2]), cs_form(As[0], As[1])]
    x = [0.3]
    rhs: dict = {}
    for j, f in enumerate(faces):
        for I, v in f.evaluate(x).items():
            rhs[I] = rhs.get(I, 0) + (-1) ** j * v
    components_close(cs2.d_evaluate(x), rhs, 1e-8)


def _swap_setup(rng, base=2):
    M0 = CL02
    V0 = module_sum(M0, M0)
    wit, _ = pi_swap_witness(M0)
    V1 = module_sum(V0, wit.base)
    ia, ib = sum_index([V0.space, wit.base.space])
    g = SuperMap(V0.space, V1.space, {(ia[a], a): ONE for a in range(V0.dim)}, 0)
    h = SuperMap(wit.base.space, V1.space, {(ib[a], a): ONE for a in range(wit.base.dim)}, 0)
    A0 = random_superconnection(rng, base, V0, degrees=(1, 2))
    A1 = random_superconnection(rng, base, V1, degrees=(0, 1, 2))
    return A0, g, wit, A1, h


def test_stable_transfer_examples():
    susp = suspension_module()
    Z = zero_module(susp.signature)
    g = SuperMap(Z.space, susp.space, {}, 0)
    wit = ExtensionWitness(susp, E, 1)
    A0p = stable_transfer(flat(1, Z), g, wit, suspension(1)).verify()
    assert chern_form(A0p) == DifferentialForm(1)
    A = suspension(1)
    same = stable_transfer(A, susp.identity(), None, A)
    assert same.parts == A.parts


def test_stable_transfer_errors():
    rng = np.random.default_rng(0)
    A0, g, wit, A1, h = _swap_setup(rng, 1)
    with pytest.raises(WitnessInvalid):
        stable_transfer(A0, g, None, A1, h)
    bad = ExtensionWitness(wit.base, wit.extra.scale(2), 1)
    with pytest.raises(WitnessInvalid):
        stable_transfer(A0, g, bad, A1, h)
    with pytest.raises(NotIsometric):
        stable_transfer(A0, g.scale(2), wit, A1, h)


@settings(max_examples=10)
@given(seeds)
def test_stable_transfer_preserves_chern(seed):
    A0, g, wit, A1, h = _swap_setup(np.random.default_rng(seed))
    A0p = stable_transfer(A0, g, wit, A1, h).verify()
    assert A0p.self_adjoint and A0p.clifford_linear
    assert chern_form(A0p) == chern_form(A0)


def test_product_data_examples():
    F = flat(1, builtin_module("cl1_regular"))
    zero = DifferentialForm(1)
    AB, form = product_data(F, zero, F, zero)
    assert not AB.parts and form.is_zero()
    AB, form = product_data(suspension(1), zero, suspension(1), zero)
    assert chern_form(AB) == mathai_quillen(2)
    phi = DifferentialForm.basis(1, [0], CoeffFn.gaussian(1, [1]))
    _, form = product_data(suspension(1), phi, flat(1, trivial_module()), zero)
    assert form == phi.embed(2, [0])


@settings(max_examples=20)
@given(seeds)
def test_chern_sum_and_product_rules(seed):
    rng = np.random.default_rng(seed)
    A = random_superconnection(rng, 1, suspension_module(), degrees=(1,))
    B = random_superconnection(rng, 1, SUSP2, degrees=(1,))
    assert chern_form(direct_sum(A, B).verify()) == chern_form(A) + chern_form(B)
    P = external_product(suspension(1), B).verify()
    want = chern_form(suspension(1)).embed(2, [0]).wedge(chern_form(B).embed(2, [1]))
    assert chern_form(P) == want


@settings(max_examples=20)
@given(seeds, st.sampled_from(["susp", "cl02", "cl11"]))
def test_chern_alpha_powers_and_closed(seed, which):
    fiber = {"susp": SUSP2, "cl02": CL02, "cl11": CL11}[which]
    rng = np.random.default_rng(seed)
    A = random_superconnection(rng, 2, fiber, degrees=(1, 2))
    ch = chern_form(A)
    assert alpha_powers_ok(ch)
    assert d_exterior(ch).is_zero()


@settings(max_examples=5)
@given(seeds)
def test_numeric_chern_closed(seed):
    rng = np.random.default_rng(seed)
    A = random_superconnection(rng, 2, CL02)
    ch = chern(A)
    x = rng.uniform(-1, 1, size=2)
    components_close(ch.d_evaluate(x), {}, 1e-6)
