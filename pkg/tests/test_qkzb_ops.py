import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellqg.qkzb_ops import (
    FnSpace,
    OperatorOnFn,
    ZeroWeightFn,
    compatibility_residual,
    h_operator,
    identity,
    kzb_operator,
    mirror_kzb_operator,
    operator_residual,
    random_test_function,
    resonance_condition_residual,
    reverse_operator,
    s_chain_kzb,
    s_operator,
    transformation,
    weyl_reflection,
)
from ellqg.weight_functions import ModelParams, omega

LAMS = [0.13 + 0.05j, -0.21 + 0.11j]


def _fundamental(n, par):
    return FnSpace((1,) * n, par, (True,) * n)


def _sites(n, seed=1):
    rng = np.random.default_rng(seed)
    return list(rng.uniform(-0.4, 0.4, n) + 1j * rng.uniform(-0.2, 0.2, n))


@pytest.mark.parametrize("n", [2, 4])
def test_compatibility_fundamental(qkzb_params, n):
    sp = _fundamental(n, qkzb_params)
    z = _sites(n)
    fns = [random_test_function(sp, s) for s in range(3)]
    for j in range(n):
        for l in range(j + 1, n):
            assert compatibility_residual(j, l, z, sp, fns, LAMS) < 1e-9


def test_compatibility_generic_weights(qkzb_params):
    sp = FnSpace((0.37 + 0.1j, 0.81 - 0.2j, 0.82 + 0.1j), qkzb_params)
    z = [0.05, 0.31 + 0.07j, -0.22 + 0.02j]
    fns = [random_test_function(sp, 0)]
    assert compatibility_residual(0, 2, z, sp, fns, LAMS[:1]) < 1e-8


@pytest.mark.parametrize("n", [2, 4])
def test_weyl_reflection(qkzb_params, n):
    sp = _fundamental(n, qkzb_params)
    z = _sites(n)
    fns = [random_test_function(sp, s) for s in range(2)]
    S = weyl_reflection(sp)
    assert operator_residual(S @ S, identity(sp), fns, LAMS) < 1e-12
    for j in range(n):
        K = kzb_operator(j, z, sp)
        assert operator_residual(S @ K, K @ S, fns, LAMS) < 1e-9


def test_h_operators_commute(qkzb_params):
    sp = _fundamental(4, qkzb_params)
    z = _sites(4)
    fns = [random_test_function(sp, 0)]
    H = [h_operator(j, z, sp) for j in range(4)]
    for j in range(4):
        for l in range(j + 1, 4):
            assert operator_residual(H[j] @ H[l], H[l] @ H[j], fns, LAMS) < 1e-9


@pytest.mark.parametrize("n", [2, 4])
def test_factorisation_through_s_operators(qkzb_params, n):
    sp = _fundamental(n, qkzb_params)
    z = _sites(n)
    fns = [random_test_function(sp, 0)]
    for j in range(n):
        assert operator_residual(s_chain_kzb(j, z, sp), kzb_operator(j, z, sp), fns, LAMS) < 1e-9


def test_s_operator_unitarity(qkzb_params):
    sp = _fundamental(4, qkzb_params)
    fns = [random_test_function(sp, 0)]
    for j in range(3):
        a = s_operator(j, 0.3 - 0.1j, sp)
        b = s_operator(j, -0.3 + 0.1j, a.dst)
        assert operator_residual(b @ a, identity(sp), fns, LAMS) < 1e-10


def test_mirror_operators_are_conjugated_ordinary(qkzb_params):
    lams = (0.37 + 0.1j, 0.81 - 0.2j, 0.82 + 0.1j)
    sp = FnSpace(lams, qkzb_params)
    z = [0.05, 0.31 + 0.07j, -0.22 + 0.02j]
    R = reverse_operator(sp)
    sv = R.dst
    fns = [random_test_function(sp, 1)]
    for i in range(3):
        rhs = reverse_operator(sv) @ kzb_operator(2 - i, z[::-1], sv) @ R
        assert operator_residual(mirror_kzb_operator(i, z, sp), rhs, fns, LAMS[:1]) < 1e-9


def test_single_site_operator_is_trivial_on_constants(qkzb_params):
    sp = _fundamental(2, qkzb_params)
    const = ZeroWeightFn(sp, lambda lam: np.array([1.0, 2.0 + 1j]))
    out = h_operator(0, [0.1, -0.2], FnSpace((2,), qkzb_params, (True,)))
    assert isinstance(out, OperatorOnFn)
    assert np.allclose(identity(sp)(const)(0.3), const(0.3))


def test_reduced_standard_round_trip(qkzb_params):
    sp = FnSpace((2, 1, 1), qkzb_params, (True, True, True))
    f = random_test_function(sp, 3)
    g = f.to_reduced().to_standard()
    assert np.abs(g(0.2 + 0.1j) - f(0.2 + 0.1j)).max() < 1e-13


@pytest.mark.parametrize("rs", [(0, 0), (1, 0), (0, 1), (1, -1)])
def test_weight_functions_satisfy_resonance(qkzb_params, rs):
    lams = (0.37 + 0.1j, 0.81 - 0.2j, 4 - 0.37 - 0.1j - 0.81 + 0.2j)
    sp = FnSpace(lams, qkzb_params)
    z = [0.05, 0.31 + 0.07j, -0.22 + 0.02j]
    model = ModelParams(lams, z, qkzb_params)
    t = np.array([0.11 + 0.02j, -0.17 + 0.05j])
    u = ZeroWeightFn(sp, lambda l: np.array([omega(M, t, l, model) for M in sp.basis]))
    for which in (1, 2):  # the cyclic condition is a property of solutions, not of single weight functions
        assert resonance_condition_residual(u, which, z, *rs, relative=True) < 1e-8


def test_random_function_violates_resonance(qkzb_params):
    lams = (0.37 + 0.1j, 0.81 - 0.2j, 4 - 0.37 - 0.1j - 0.81 + 0.2j)
    sp = FnSpace(lams, qkzb_params)
    z = [0.05, 0.31 + 0.07j, -0.22 + 0.02j]
    assert resonance_condition_residual(random_test_function(sp, 0), 1, z, relative=True) > 1e-3


@settings(max_examples=80, deadline=None)
@given(
    M=st.lists(st.integers(0, 3), min_size=2, max_size=4),
    k=st.integers(-4, 4),
    data=st.data(),
)
def test_transformation_is_an_involution(M, k, data):
    n = len(M)
    lambdas = [m + data.draw(st.integers(0, 2)) for m in M]
    j = data.draw(st.integers(1, n))
    out = transformation(M, k, j, lambdas)
    if out is None:
        return
    L, level = out
    assert sum(L) == sum(M)
    back = transformation(L, level, j, lambdas)
    assert back is not None and back[0] == tuple(M)
