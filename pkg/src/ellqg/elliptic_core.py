"""Theta function, elliptic numbers and the phase function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels


class PoleError(ArithmeticError):
    """Evaluation hit a zero of a denominator."""


@dataclass(frozen=True)
class EllipticParams:
    """Analytic context: modulus tau, step eta, qKZB step p and truncation.

    ``n_terms`` is chosen automatically when left at 0 so that
    ``|q|**n_terms < tol/10`` with ``q = exp(2 pi i tau)``.
    """

    tau: complex
    eta: complex
    p: complex | None = None
    n_terms: int = 0
    tol: float = 1e-10

    def __post_init__(self):
        tau = complex(self.tau)
        if tau.imag <= 0:
            raise ValueError(f"Im(tau) must be positive, got {tau}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "eta", complex(self.eta))
        if self.p is not None:
            p = complex(self.p)
            if p.imag <= 0:
                raise ValueError(f"Im(p) must be positive, got {p}")
            object.__setattr__(self, "p", p)
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not self.n_terms:
            object.__setattr__(self, "n_terms", terms_for(tau, self.tol))
        elif self.n_terms < 1:
            raise ValueError("n_terms must be positive")

    @property
    def q(self) -> complex:
        return np.exp(2j * np.pi * self.tau)

    def with_(self, **kw) -> "EllipticParams":
        d = dict(tau=self.tau, eta=self.eta, p=self.p, n_terms=0, tol=self.tol)
        d.update(kw)
        return EllipticParams(**d)


def terms_for(tau: complex, tol: float) -> int:
    """Smallest n with |q|^n < tol/10."""
    log_q = -2.0 * np.pi * complex(tau).imag
    return max(2, int(math.ceil(math.log(tol / 10.0) / log_q)) + 1)


def _reduce(t, tau):
    # t = t0 + n1 + n2*tau with |Im t0| <= Im(tau)/2 and |Re t0| <= 1/2
    t = np.asarray(t, dtype=complex)
    n2 = np.round(t.imag / tau.imag)
    t1 = t - n2 * tau
    n1 = np.round(t1.real)
    return t1 - n1, n1, n2


def _theta_and_logder(t, params: EllipticParams):
    t = np.asarray(t, dtype=complex)
    shape = t.shape
    tau = params.tau
    t0, n1, n2 = _reduce(t.ravel(), tau)
    val, der = _kernels.theta_series(np.ascontiguousarray(t0), tau, params.n_terms)
    sign = np.where((n1 + n2) % 2 == 0, 1.0, -1.0)
    factor = sign * np.exp(-2j * np.pi * n2 * t0 - 1j * np.pi * n2 * n2 * tau)
    return (factor * val).reshape(shape), val.reshape(shape), der.reshape(shape), n2.reshape(shape)


def theta(t, params: EllipticParams):
    """Odd Jacobi theta function with zeros on Z + tau Z.

    Evaluated by the defining sum after reducing t into the fundamental
    parallelogram with the quasi-periodicity multipliers.
    """
    out = _theta_and_logder(t, params)[0]
    return out[()] if out.ndim == 0 else out


def theta_product(t, params: EllipticParams):
    """Theta via its infinite product; independent of the series route."""
    t = np.asarray(t, dtype=complex)
    q = params.q
    j = np.arange(1, 4 * params.n_terms + 1)
    qj = q ** j
    x = np.exp(2j * np.pi * t)[..., None]
    prod = ((1 - qj) * (1 - qj * x) * (1 - qj / x)).prod(axis=-1)
    out = 2.0 * np.exp(1j * np.pi * params.tau / 4) * np.sin(np.pi * t) * prod
    return out[()] if out.ndim == 0 else out


def theta_quasi_check(t, params: EllipticParams) -> float:
    """Max residual of the multiplier identities under t -> t+1 and t -> t+tau."""
    t = complex(t)
    tau = params.tau
    r1 = abs(theta(t + 1, params) + theta(t, params))
    r2 = abs(theta(t + tau, params) + np.exp(-2j * np.pi * t - 1j * np.pi * tau) * theta(t, params))
    return float(max(r1, r2))


def theta_prime_zero(params: EllipticParams) -> complex:
    """theta'(0) from the differentiated series."""
    _, _, der, _ = _theta_and_logder(np.zeros(1), params)
    return complex(der[0])


def theta_log_derivative(t, params: EllipticParams):
    """theta'(t)/theta(t); raises PoleError at lattice points."""
    _, val0, der0, n2 = _theta_and_logder(t, params)
    scale = np.abs(der0) + 1.0
    if np.any(np.abs(val0) < 1e-14 * scale):
        raise PoleError("theta_log_derivative evaluated at a lattice zero")
    out = der0 / val0 - 2j * np.pi * n2
    return out[()] if out.ndim == 0 else out


def elliptic_number(k, params: EllipticParams):
    """[k] = theta(2 eta k)/theta(2 eta)."""
    return theta(2 * params.eta * np.asarray(k), params) / theta(2 * params.eta, params)


def elliptic_factorial(k: int, params: EllipticParams) -> complex:
    """[k]! = [1][2]...[k] with [0]! = 1."""
    k = int(k)
    if k < 0:
        raise ValueError("elliptic factorial needs k >= 0")
    if k == 0:
        return 1.0 + 0j
    return complex(np.prod(elliptic_number(np.arange(1, k + 1), params)))


def phase_omega(t, a, params: EllipticParams, tau=None, p=None):
    """One-variable phase function Omega_a(t; tau, p) as a truncated double product.

    ``tau`` and ``p`` override the values in ``params`` (used for the
    tau <-> p symmetry check).
    """
    tau = params.tau if tau is None else complex(tau)
    p = params.p if p is None else complex(p)
    if p is None:
        raise ValueError("phase_omega needs params.p")
    if tau.imag <= 0 or p.imag <= 0:
        raise ValueError("phase_omega needs Im(tau) > 0 and Im(p) > 0")
    jn = terms_for(p, params.tol)
    kn = terms_for(tau, params.tol)
    r = np.exp(2j * np.pi * p)
    q = np.exp(2j * np.pi * tau)
    rq = (r ** np.arange(jn))[:, None] * (q ** np.arange(kn))[None, :]
    t = np.asarray(t, dtype=complex)
    a = complex(a)
    em = np.exp(2j * np.pi * (t - a))[..., None, None]
    ep = np.exp(2j * np.pi * (t + a))[..., None, None]
    num = (1 - rq * em) * (1 - r * q * rq / ep)
    den = (1 - rq * ep) * (1 - r * q * rq / em)
    if np.any(np.abs(den) < 1e-300):
        raise PoleError("phase_omega evaluated at a pole")
    out = (num / den).prod(axis=(-2, -1))
    out = out[()] if out.ndim == 0 else out
    if not np.all(np.isfinite(out)):
        raise PoleError("phase_omega is not finite here")
    return out


def phase_shift_residual(z, a, params: EllipticParams) -> float:
    """|Omega_a(z+p) - e^{2 pi i a} theta(z+a)/theta(z-a) Omega_a(z)|."""
    lhs = phase_omega(z + params.p, a, params)
    rhs = np.exp(2j * np.pi * a) * theta(z + a, params) / theta(z - a, params) * phase_omega(z, a, params)
    return float(abs(lhs - rhs))
