import json

import numpy as np
import pytest

from ellqg.bethe import antisymmetric_states, antisymmetrize, eigenvalue_irf
from ellqg.elliptic_core import EllipticParams, PoleError
from ellqg.irf import (
    DEFAULT_MU,
    bad_state_max,
    bethe_eigenvector_restricted,
    boltzmann,
    brute_force_spectrum,
    cyclic_paths,
    height_reflection_residual,
    infinite_restricted_check,
    match_eigenvector,
    random_labels,
    restricted_basis,
    restricted_eigen_residual,
    spectrum_json,
    star_triangle_residual,
    state_index,
    transfer_element,
    unrestricted_check,
    walk_count,
)
from ellqg.rmatrix import fundamental_r
from ellqg.weight_functions import ModelParams

from conftest import SITES4, W1, W2


def _spectral(rng):
    return rng.uniform(-0.4, 0.4, 3) + 1j * rng.uniform(-0.2, 0.2, 3)


def test_star_triangle_generic(root_of_unity, rng):
    for _ in range(30):
        labels = random_labels(rng, DEFAULT_MU)
        assert star_triangle_residual(labels, *_spectral(rng), root_of_unity) < 1e-9


def test_star_triangle_restricted(root_of_unity, rng):
    for _ in range(30):
        labels = random_labels(rng, 0, 1, 3)
        assert star_triangle_residual(labels, *_spectral(rng), root_of_unity, restricted=4) < 1e-9


def test_star_triangle_positive(rng):
    par = EllipticParams(1j, 0.07 + 0.01j)
    for _ in range(30):
        labels = random_labels(rng, 0, 1, 8)
        assert star_triangle_residual(labels, *_spectral(rng), par, restricted="positive") < 1e-9


def test_boltzmann_reads_fundamental_entries(root_of_unity):
    z = 0.21 + 0.05j
    d = DEFAULT_MU
    R = fundamental_r(z, 2 * root_of_unity.eta * d, root_of_unity)
    # equal steps on all four edges: weight 1
    assert abs(boltzmann(d - 1, d - 2, d - 1, d, z, root_of_unity) - 1) < 1e-14
    assert abs(boltzmann(d + 1, d + 2, d + 1, d, z, root_of_unity) - 1) < 1e-14
    # b = d: the 2x2 block of mixed arrows
    vals = [boltzmann(d + s, d, d + t, d, z, root_of_unity) for s in (1, -1) for t in (1, -1)]
    block = R[1:3, 1:3].ravel()
    assert all(np.min(np.abs(block - v)) < 1e-12 for v in vals)
    assert sorted(np.round(np.abs(vals), 10)) == sorted(np.round(np.abs(block), 10))


def test_boltzmann_pole(root_of_unity):
    with pytest.raises(PoleError):
        boltzmann(1, 0, 1, 0, 0.2, root_of_unity)


def test_face_boltzmann_zero_outside_adjacency(root_of_unity):
    assert boltzmann(1, 3, 1, 2, 0.2, root_of_unity) == 0


@pytest.mark.parametrize("N,n", [(3, 4), (4, 4), (5, 4), (4, 6), (5, 6)])
def test_restricted_dimension_equals_walk_count(N, n):
    basis = restricted_basis(N, n)
    assert len(basis) == walk_count(N, n)
    assert basis == sorted(basis)


def test_small_bases():
    assert restricted_basis(3, 4) == [(1, 2, 1, 2), (2, 1, 2, 1)]
    assert len(cyclic_paths(4, 0)) == 6
    assert state_index((1, 2, 1, 2)) == (1, 0, 1, 0)


@pytest.mark.parametrize("N,n", [(3, 4), (4, 4), (5, 4), (4, 6)])
def test_restricted_transfer_matrices_commute(N, n):
    par = EllipticParams(1j, 1 / (2 * N))
    rng = np.random.default_rng(N * 10 + n)
    z = tuple(rng.uniform(-0.3, 0.3, n) + 1j * rng.uniform(-0.05, 0.05, n))
    for _ in range(2):
        w1, w2 = rng.uniform(-0.4, 0.4, 2) + 1j * rng.uniform(-0.1, 0.1, 2)
        _, _, comm = brute_force_spectrum(N, w1, z, par, w2)
        assert comm < 1e-9


def test_restricted_needs_root_of_unity():
    with pytest.raises(ValueError):
        brute_force_spectrum(4, W1, SITES4, EllipticParams(1j, 0.1))


@pytest.fixture(scope="module")
def restricted_case():
    par = EllipticParams(1j, 1 / 8)
    model = ModelParams((1,) * 4, SITES4, par)
    return par, antisymmetric_states(model, "irf")


def test_restricted_bethe_vectors(restricted_case):
    par, states = restricted_case
    vals, vecs, _ = brute_force_spectrum(4, W1, SITES4, par)
    basis = restricted_basis(4, 4)
    assert len(states) >= 1
    for sol, psi in states:
        apsi = antisymmetrize(psi)
        v = bethe_eigenvector_restricted(apsi, 4)
        eps = eigenvalue_irf(sol, W1)
        assert restricted_eigen_residual(v, eps, 4, W1, SITES4, par) < 1e-7
        _, dist, overlap = match_eigenvector(v, vals, vecs, eps)
        assert dist < 1e-7 and overlap > 1 - 1e-6
        assert height_reflection_residual(v, basis, 4, sol.problem.c) < 1e-8
        assert bad_state_max(apsi, 4) < 1e-8 * np.abs(v).max()
        assert unrestricted_check(apsi, eps, W1, SITES4) < 1e-8


def test_infinite_restricted_model():
    par = EllipticParams(1j, 0.07 + 0.01j)
    model = ModelParams((1,) * 4, SITES4, par)
    sol, psi = antisymmetric_states(model, "irf", cs=(0.3 + 0.2j,))[0]
    eps = eigenvalue_irf(sol, W1)
    assert infinite_restricted_check(antisymmetrize(psi), eps, W1, SITES4) < 1e-7
    with pytest.raises(ValueError, match="neutral"):
        infinite_restricted_check(psi, eps, W1, SITES4)


def test_boundary_product_vanishes():
    par = EllipticParams(1j, 0.07 + 0.01j)
    z = 0.13 + 0.02j
    # the factor theta(2 eta * 0) kills the weight that leaves height 0
    assert abs(boltzmann(0, 1, 2, 1, z, par) * boltzmann(1, 2, 1, 0, z, par)) < 1e-13
    assert abs(boltzmann(2, 1, 2, 3, z, par)) > 1e-2


def test_transfer_element_locality(root_of_unity):
    a = (1, 2, 1, 2)
    assert transfer_element((5, 6, 5, 6), a, W1, SITES4, root_of_unity) == 0


def test_spectrum_json_is_sorted_and_flat(root_of_unity):
    vals, vecs, comm = brute_force_spectrum(4, W1, SITES4, root_of_unity, W2)
    d = json.loads(spectrum_json(4, 4, root_of_unity, W1, vals, comm, []))
    assert set(d) == {"N", "n", "tau", "eta", "w", "eigenvalues", "commutator_norm", "bethe_matches"}
    assert len(d["eigenvalues"]) == 8
    assert all(len(p) == 2 for p in d["eigenvalues"])
