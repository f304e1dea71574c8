import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellqg.elliptic_core import (
    EllipticParams,
    elliptic_factorial,
    elliptic_number,
    phase_omega,
    phase_shift_residual,
    terms_for,
    theta,
    theta_log_derivative,
    theta_prime_zero,
    theta_product,
    theta_quasi_check,
)

TAUS = [1j, 0.2 + 0.8j, 0.45 + 0.6j]
coord = st.floats(-1.5, 1.5, allow_nan=False)


@pytest.mark.parametrize("tau", TAUS)
def test_series_matches_product(tau, rng):
    par = EllipticParams(tau, 0.1)
    t = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-1, 1, 50) * tau.imag
    scale = np.maximum(1.0, np.abs(theta_product(t, par)))
    assert np.max(np.abs(theta(t, par) - theta_product(t, par)) / scale) < 1e-10


@settings(max_examples=60, deadline=None)
@given(x=coord, y=coord)
def test_odd_and_quasi_periodic(x, y):
    par = EllipticParams(0.2 + 0.8j, 0.1)
    t = complex(x, y * 0.8)
    assert abs(theta(-t, par) + theta(t, par)) < 1e-10 * max(1.0, abs(theta(t, par)))
    assert theta_quasi_check(t, par) < 1e-9 * max(1.0, abs(theta(t, par)), abs(theta(t + par.tau, par)))


def test_zeros_on_lattice():
    par = EllipticParams(1j, 0.1)
    for n1 in range(-2, 3):
        for n2 in range(-1, 2):
            assert abs(theta(n1 + n2 * par.tau, par)) < 1e-12


def test_array_shape_is_kept(rng):
    par = EllipticParams(1j, 0.1)
    t = rng.normal(size=(3, 4)) + 0j
    assert theta(t, par).shape == (3, 4)
    assert np.ndim(theta(0.3, par)) == 0


def test_prime_at_zero_matches_difference_quotient():
    par = EllipticParams(0.2 + 0.8j, 0.1)
    h = 1e-6
    fd = (theta(h, par) - theta(-h, par)) / (2 * h)
    assert abs(theta_prime_zero(par) - fd) < 1e-8


def test_log_derivative_against_finite_difference(rng):
    par = EllipticParams(1j, 0.1)
    t = 0.23 + 0.11j
    h = 1e-6
    fd = (np.log(theta(t + h, par)) - np.log(theta(t - h, par))) / (2 * h)
    assert abs(theta_log_derivative(t, par) - fd) < 1e-7


def test_elliptic_numbers():
    par = EllipticParams(1j, 0.07 + 0.01j)
    assert elliptic_factorial(0, par) == 1
    assert abs(elliptic_number(1, par) - 1) < 1e-13
    f3 = elliptic_number(1, par) * elliptic_number(2, par) * elliptic_number(3, par)
    assert abs(elliptic_factorial(3, par) - f3) < 1e-12 * abs(f3)


def test_truncation_meets_tolerance():
    for tau in TAUS:
        n = terms_for(tau, 1e-10)
        assert abs(np.exp(2j * np.pi * tau)) ** n < 1e-11


def test_phase_shift_identity(rng):
    par = EllipticParams(0.2 + 0.8j, 0.07 + 0.01j, p=0.4 + 0.9j)
    for _ in range(5):
        z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.2))
        a = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))
        assert phase_shift_residual(z, a, par) < 1e-9 * max(1.0, abs(phase_omega(z, a, par)))


@pytest.mark.parametrize("kw", [dict(tau=-1j, eta=0.1), dict(tau=1j, eta=0.1, p=-0.5j), dict(tau=1j, eta=0.1, tol=0)])
def test_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        EllipticParams(**kw)
