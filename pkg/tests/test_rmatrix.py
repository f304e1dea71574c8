import json

import numpy as np
import pytest

from ellqg.elliptic_core import EllipticParams, PoleError
from ellqg.rmatrix import (
    RMatrixBlock,
    RProvider,
    build_rmatrix,
    coeff_relation_residual,
    determinant_check,
    dybe_residual,
    finite_dim_project,
    fundamental_block,
    fundamental_r,
    fundamental_unitarity_residual,
    lambda_pole_residue,
    lambda_periodicity_residual,
    level_basis,
    qr_relation_residual,
    residue_kernel_check,
    shapovalov,
    shapovalov_coefficient,
    shapovalov_single,
    unitarity_residual,
    zero_weight_residual,
)
from ellqg.weight_functions import ModelParams

L1, L2 = 0.7 + 0.3j, 1.3 - 0.2j
Z, LAM = 0.23 + 0.07j, 0.41 + 0.17j


def test_geometric_equals_fundamental(generic):
    R = build_rmatrix(1, 1, Z, LAM, 1, generic)
    assert R.index == ((0, 1), (1, 0))
    assert np.abs(R.entries - fundamental_block(Z, LAM, 1, generic)).max() < 1e-10


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_fundamental_dybe(generic, m):
    assert dybe_residual(1, 1, 1, 0.21 + 0.03j, -0.17 + 0.05j, LAM, generic, m=m, finite=True) < 1e-9


@pytest.mark.parametrize("m", [1, 2])
def test_generic_dybe(generic, m):
    assert dybe_residual(L1, L2, 0.45 + 0.1j, 0.21 + 0.03j, -0.17 + 0.05j, LAM, generic, m=m) < 1e-8


@pytest.mark.parametrize("m", [1, 2, 3])
def test_unitarity_and_determinant(generic, m):
    assert unitarity_residual(L1, L2, Z, LAM, m, generic) < 1e-9
    assert determinant_check(L1, L2, Z, LAM, m, generic) < 1e-9
    assert lambda_periodicity_residual(L1, L2, Z, -0.1, LAM, m, generic) < 1e-9


def test_zero_weight_and_fundamental_unitarity(generic):
    assert zero_weight_residual(L1, L2, Z, LAM, 2, generic) < 1e-12
    assert fundamental_unitarity_residual(Z, LAM, generic) < 1e-12


def test_fundamental_layout(generic):
    R = fundamental_r(Z, LAM, generic)
    assert R[0, 0] == R[3, 3] == 1
    assert np.count_nonzero(R) == 6


@pytest.mark.parametrize("jkrs", [(0, 1, 1, 0), (1, 0, 0, 1), (1, 1, 2, 0), (0, 2, 1, 1), (2, 0, 1, 1)])
def test_q_r_relation(generic, jkrs):
    assert qr_relation_residual(*jkrs, LAM, L1, L2, Z, generic) < 1e-8


@pytest.mark.parametrize("m,k", [(1, 1), (2, 1), (2, 2), (2, 3)])
@pytest.mark.parametrize("s", [0, 1])
def test_residue_kernel_and_simple_pole(generic, m, k, s):
    kernel, norm, simple = residue_kernel_check(L1, L2, Z, k, m, generic, r=1, s=s)
    assert norm > 1e-3  # an actual pole
    assert kernel < 1e-8
    assert simple < 1e-8


def test_no_pole_off_the_list(generic):
    far = 2 * generic.eta * (L1 + L2 + 1)
    assert np.abs(lambda_pole_residue(L1, L2, Z, far, 2, generic)).max() < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_exact_unit_rows(generic, k):
    eta = generic.eta
    R = build_rmatrix(L1, L2, Z, -2 * eta * k, k, generic)
    row = np.zeros(k + 1)
    row[-1] = 1
    assert np.abs(R.entries[0] - row).max() < 1e-8
    R = build_rmatrix(L1, L2, Z, 2 * eta * (L1 + L2 - k), k, generic)
    assert np.abs(R.entries[-1] - row[::-1]).max() < 1e-8


@pytest.mark.parametrize("ind", [(0, 1, 0, 0), (1, 1, 0, 0), (1, 2, 0, 1), (0, 2, 1, 1)])
@pytest.mark.parametrize("s", [0, 1])
def test_coefficient_relations(generic, ind, s):
    assert coeff_relation_residual(1, ind, 1, s, Z, -0.12, L1, L2, generic) < 1e-8
    assert coeff_relation_residual(2, ind, 1, s, Z, -0.12, L1, L2, generic) < 1e-8


def test_shapovalov_factorises(generic):
    model = ModelParams((L1, L2, 4 - L1 - L2), (0, 0.1, 0.2), generic)
    sh = shapovalov(model, LAM)
    eta = generic.eta
    for M, q in zip(sh.index, sh.coefficients):
        acc, prod = 0, 1
        for j in range(3):
            prod *= shapovalov_single(M[j], model.lambdas[j], LAM + 2 * eta * acc, generic)
            acc += model.lambdas[j] - 2 * M[j]
        assert abs(q - prod) < 1e-12 * abs(q)
        for val, *_ in sh.poles[M]:
            assert abs(1 / shapovalov_coefficient(M, model.lambdas, val + 1e-9, generic)) < 1e-6


def test_integer_weights_project_to_finite_block(generic):
    R = build_rmatrix(2, 1, Z, LAM, 2, generic)
    P = finite_dim_project(R, 2, 1)
    assert [tuple(k) for k in P.index] == [(1, 1), (2, 0)]
    prov = RProvider((2, 1, 1), generic, finite=(True, True, True))
    assert level_basis(2, prov.caps()) == [(0, 1, 1), (1, 0, 1), (1, 1, 0), (2, 0, 0)]
    assert dybe_residual(2, 1, 1, 0.21 + 0.03j, -0.17 + 0.05j, LAM, generic, m=2, finite=True) < 1e-8


def test_json_round_trip(generic):
    R = build_rmatrix(L1, L2, Z, LAM, 2, generic)
    d = json.loads(R.to_json())
    assert set(d) >= {"lambda", "z", "L1", "L2", "m", "entries"}
    back = RMatrixBlock.from_json(R.to_json())
    assert np.array_equal(back.entries, R.entries) and back.index == R.index


def test_genuine_pole_raises(generic):
    with pytest.raises(PoleError):
        build_rmatrix(L1, L2, Z, 2 * generic.eta * (L1 - 1), 1, generic)
