import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffko.clifford import CliffordElement, CliffordSignature, generator_bound, star
from cliffko.cmodules import (BUILTIN_NAMES, CliffordModule, ExtensionWitness, action_is_bijective,
                              builtin_module, check_module, clifford_supertrace, equivariant_hom, exact_det,
                              extension_check, find_invertible, forget_e, forget_f, module_from_json, module_power,
                              module_sum, module_tensor, module_to_json, morita_reduce, random_equivariant,
                              search_extension, swap_witness, trivial_module)
from cliffko.errors import NotEquivariant, NotReducible, UnknownName
from cliffko.scalars import I, Scalar
from cliffko.superlinear import SuperMap, direct_sum, koszul_tensor

from conftest import scalars

u = Scalar.u_power
CL11 = builtin_module("cl11_r11")
CL4 = builtin_module("cl4_quat")
CL8 = builtin_module("cl8_oct")
CL2 = builtin_module("cl2_complex")
CL1 = builtin_module("cl1_regular")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_pass_checks(name):
    assert check_module(builtin_module(name)).passed


def test_unknown_builtin():
    with pytest.raises(UnknownName):
        builtin_module("cl3_nope")


def test_cl11_matrices():
    f, e = CL11.rho
    assert f.to_dense() == [[0, 1], [-1, 0]]
    assert e.to_dense() == [[0, 1], [1, 0]]


def test_cl8_action_is_bijective():
    assert CL8.space.dim_even == 8 and CL8.space.dim_odd == 8
    assert action_is_bijective(CL8)


def test_broken_relation_reported():
    f, _ = CL11.rho
    bad = CliffordModule(CL11.signature, CL11.space, [f, -f])
    rep = check_module(bad)
    assert ("relation", 1, 1) in rep.failures


def test_tensor_examples():
    M = module_tensor(CL11, CL11)
    assert M.signature == CliffordSignature(2, 2)
    assert (M.space.dim_even, M.space.dim_odd) == (2, 2)
    assert check_module(M).passed
    N = module_tensor(CL4, CL4)
    assert N.signature == CliffordSignature(8, 0)
    assert (N.space.dim_even, N.space.dim_odd) == (32, 32)
    assert check_module(N).passed
    Z = module_tensor(CL4, builtin_module("zero"))
    assert Z.dim == 0


@pytest.mark.parametrize("M,want", [(CL11, Scalar.const(1)), (CL4, u(-4, 2)), (CL8, u(-8)), (CL2, I * u(-2))])
def test_supertrace_table(M, want):
    assert clifford_supertrace(M) == want


def test_strict_supertrace_rejects_nonequivariant():
    with pytest.raises(NotEquivariant):
        clifford_supertrace(CL11, SuperMap.from_dense([[1, 0], [0, 0]], CL11.space), strict=True)


def test_schur_for_cl11():
    assert len(equivariant_hom(CL11, CL11, 0)) == 1
    assert equivariant_hom(CL11, builtin_module("zero", CL11.signature)) == []


def test_ko_relation_intertwiner():
    basis = equivariant_hom(module_tensor(CL4, CL4), module_power(CL8, 4), 0)
    T, det, _ = find_invertible(basis)
    assert det != Scalar.const(0)
    assert exact_det(T) == det


def test_extension_examples():
    f, e = CL11.rho
    # e extends the Cl_1-action by f; it cannot extend its own Cl_{0,1}-action
    assert extension_check(ExtensionWitness(forget_e(CL11), e, 1))
    assert not extension_check(ExtensionWitness(forget_f(CL11), e, 1))
    assert extension_check(ExtensionWitness(forget_f(CL11), f, -1))
    assert not extension_check(ExtensionWitness(CL1, SuperMap.zero(CL1.space, parity=1), 1))
    assert extension_check(swap_witness(forget_f(CL11), CL11.rho[0]))


def test_eta_cubed_witness_found():
    eta = forget_f(CL11)
    W = search_extension(module_tensor(module_tensor(eta, eta), eta), 1)
    assert W is not None and extension_check(W)


def test_morita_examples():
    X, iso = morita_reduce(CL11)
    assert X.signature == CliffordSignature(0, 0)
    assert (X.space.dim_even, X.space.dim_odd) == (1, 0)
    Y, _ = morita_reduce(module_tensor(CL11, CL11))
    assert Y.dim == 2
    assert clifford_supertrace(Y) == clifford_supertrace(module_tensor(CL11, CL11))
    with pytest.raises(NotReducible):
        morita_reduce(CL4)


def test_json_roundtrip():
    for M in (CL11, CL4, CL2):
        back = module_from_json(module_to_json(M))
        assert back.rho == M.rho and back.signature == M.signature


SMALL = {"R": trivial_module(), "cl1": CL1, "cl1^2": module_tensor(CL1, CL1), "cl2c": CL2}


@pytest.mark.parametrize("name", list(SMALL))
@pytest.mark.parametrize("k", [1, 2])
def test_eight_periodicity(name, k):
    M = SMALL[name]
    rng = np.random.default_rng(k)
    T = random_equivariant(M, rng, parity=0)
    big, Tk = M, T
    with generator_bound(M.signature.rank + 8 * k):
        for _ in range(k):
            big = module_tensor(big, CL8)
            Tk = koszul_tensor(Tk, CL8.identity())
        assert clifford_supertrace(big, Tk) == u(-8 * k) * clifford_supertrace(M, T)


def test_complex_two_periodicity():
    M = module_tensor(CL2, CL1)
    T = random_equivariant(CL1, np.random.default_rng(3), parity=0)
    lhs = clifford_supertrace(M, koszul_tensor(CL2.identity(), T))
    assert lhs == I * u(-2) * clifford_supertrace(CL1, T)
    lhs2 = clifford_supertrace(module_tensor(CL2, CL2))
    assert lhs2 == (I * u(-2)) ** 2


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["cl11", "cl4", "cl1^2"]), st.sampled_from(["cl11", "cl4", "cl1^2"]))
def test_trace_additive_and_multiplicative(seed, a, b):
    mods = {"cl11": CL11, "cl4": CL4, "cl1^2": SMALL["cl1^2"]}
    M, N = mods[a], mods[b]
    rng = np.random.default_rng(seed)
    S = random_equivariant(M, rng, parity=0)
    T = random_equivariant(N, rng, parity=0)
    assert clifford_supertrace(module_tensor(M, N), koszul_tensor(S, T)) == \
        clifford_supertrace(M, S) * clifford_supertrace(N, T)
    if M.signature == N.signature:
        assert clifford_supertrace(module_sum(M, N), direct_sum([S, T])) == \
            clifford_supertrace(M, S) + clifford_supertrace(N, T)


@given(st.dictionaries(st.integers(0, 15), scalars(2), max_size=4))
def test_star_matches_adjoint(terms):
    M = module_tensor(CL11, CL11)
    assert check_module(M).passed
    x = CliffordElement(M.signature, terms)
    assert M.action(star(x)) == M.adjoint(M.action(x))
