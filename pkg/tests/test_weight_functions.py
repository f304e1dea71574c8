from itertools import permutations

import numpy as np
import pytest

from ellqg.elliptic_core import EllipticParams, PoleError, theta
from ellqg.weight_functions import (
    ModelParams,
    basis_matrices,
    block_assignments,
    compositions,
    diagonal_value,
    is_admissible,
    multinomial_count,
    omega,
    omega_single,
    resonance_check_weights,
    special_point,
)

LAM2 = (0.7 + 0.3j, 1.9 - 0.2j)
Z2 = (0.21 + 0.1j, -0.33 + 0.05j)
LAM3 = (0.37 + 0.1j, 0.81 - 0.2j, 1.45 + 0.15j)
Z3 = (0.05, 0.31 + 0.07j, -0.22 + 0.02j)


def test_compositions_order_and_caps():
    assert compositions(2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert compositions(2, 3, caps=(1, 1, 1)) == [(0, 1, 1), (1, 0, 1), (1, 1, 0)]
    assert is_admissible((1, 0), (1, 1)) and not is_admissible((2, 0), (1, 1))


@pytest.mark.parametrize("M", [(1, 2), (2, 1, 1), (0, 0, 3), (1, 1, 1, 1)])
def test_block_assignments_count(M):
    rows = block_assignments(M)
    assert rows.shape == (multinomial_count(M), sum(M))
    assert {tuple(sorted(r)) for r in map(tuple, rows)} == {tuple(k for k, c in enumerate(M) for _ in range(c))}


def _u(t, par):
    out = 1.0
    for i in range(len(t)):
        for j in range(i + 1, len(t)):
            out *= theta(t[i] - t[j] + 2 * par.eta, par) / theta(t[i] - t[j], par)
    return out


@pytest.mark.parametrize("mirror", [False, True])
def test_u_times_omega_is_symmetric(generic, rng, mirror):
    model = ModelParams(LAM3, Z3, generic)
    t = rng.normal(size=3) * 0.3 + 0.1j * rng.normal(size=3)
    ref = _u(t, generic) * omega((1, 0, 2), t, 0.41 + 0.17j, model, mirror)
    for perm in permutations(range(3)):
        tp = t[list(perm)]
        val = _u(tp, generic) * omega((1, 0, 2), tp, 0.41 + 0.17j, model, mirror)
        assert abs(val - ref) < 1e-11 * abs(ref)


def test_single_factor_closed_form(generic, rng):
    model = ModelParams((1.3,), (0.2,), generic)
    t = rng.normal(size=3) * 0.3 + 0.1j * rng.normal(size=3)
    lam = 0.41 + 0.17j
    direct = omega_single(3, t, lam, 0.2, generic.eta * 1.3, generic)
    assert abs(omega((3,), t, lam, model) - direct) < 1e-12 * abs(direct)
    assert abs(omega((3,), t, lam, model, mirror=True) - direct) < 1e-12 * abs(direct)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_triangular_with_closed_form_diagonal(generic, m):
    model = ModelParams(LAM2, Z2, generic)
    lam = 0.41 + 0.17j
    A, At = basis_matrices(m, lam, model)
    scale = np.abs(A).max()
    assert np.abs(np.triu(A, 1)).max() < 1e-9 * scale
    assert np.abs(np.tril(At, -1)).max() < 1e-9 * np.abs(At).max()
    for k, M in enumerate(compositions(m, 2)):
        assert abs(A[k, k] / diagonal_value(M, lam, model) - 1) < 1e-9
        assert abs(At[k, k] / diagonal_value(M, lam, model, mirror=True) - 1) < 1e-9


def test_mirror_is_reversed_ordinary(rng):
    par = EllipticParams(0.3 + 1.1j, 0.07 + 0.01j)
    z = (0.05, 0.31 + 0.07j, -0.22 + 0.02j, 0.17 - 0.05j)
    lams = (1, 1, 1, 1)
    m, mr = ModelParams(lams, z, par), ModelParams(lams, z[::-1], par)
    t = np.array([0.11 + 0.02j, -0.17 + 0.05j])
    for M in compositions(2, 4, caps=lams):
        a = omega(M, t, 0.23 + 0.1j, m, mirror=True)
        b = omega(M[::-1], t, 0.23 + 0.1j, mr)
        assert abs(a - b) < 1e-12 * max(1.0, abs(a))


def _pairs(n, m):
    for M in compositions(m, n):
        for j in range(n - 1):
            k = M[j] + M[j + 1]
            for b in range(k + 1):
                if b != M[j]:
                    L = list(M)
                    L[j], L[j + 1] = b, k - b
                    yield j, M, tuple(L)


@pytest.mark.parametrize("rs", [(0, 0), (1, 0), (0, 1), (1, -1)])
def test_resonance_relations(generic, rng, rs):
    model = ModelParams(LAM3, Z3, generic)
    for m in (1, 2):
        t = rng.normal(size=m) * 0.3 + 0.1j * rng.normal(size=m)
        for j, M, L in _pairs(3, m):
            ref = max(1.0, abs(omega(M, t, 0.3, model)))
            assert resonance_check_weights(j, M[j], L[j], M, L, *rs, t, model) < 1e-8 * ref


def test_special_point_shape(generic):
    model = ModelParams(LAM2, Z2, generic)
    T = special_point((2, 1), model)
    assert T.shape == (3,)
    assert abs(T[1] - (Z2[0] - generic.eta * LAM2[0])) < 1e-15


def test_pole_is_reported(generic):
    model = ModelParams(LAM2, Z2, generic)
    t = np.array([Z2[0] + generic.eta * LAM2[0]])
    with pytest.raises(PoleError):
        omega((0, 1), t, 0.3, model)


def test_bad_inputs(generic):
    model = ModelParams(LAM2, Z2, generic)
    with pytest.raises(ValueError):
        omega((1, 1), [0.1], 0.3, model)
    with pytest.raises(ValueError):
        ModelParams((1, 1), (0.1,), generic)
    with pytest.raises(ValueError):
        omega((-1, 2), [0.1], 0.3, model)
