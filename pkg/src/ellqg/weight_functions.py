"""Elliptic weight functions, mirror weight functions and their special points."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb

import numpy as np

from . import _kernels
from .elliptic_core import EllipticParams, PoleError, elliptic_factorial, theta

MAX_LEVEL = 5
POLE_EPS = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """Highest weights, evaluation points and the analytic context."""

    lambdas: tuple
    z: tuple
    params: EllipticParams

    def __post_init__(self):
        lam = tuple(complex(x) for x in self.lambdas)
        z = tuple(complex(x) for x in self.z)
        if len(lam) != len(z):
            raise ValueError("lambdas and z must have the same length")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def a(self) -> np.ndarray:
        return self.params.eta * np.array(self.lambdas)

    def with_z(self, z) -> "ModelParams":
        return ModelParams(self.lambdas, tuple(z), self.params)

    def zero_weight_level(self) -> int:
        s = sum(self.lambdas)
        m = round(s.real / 2)
        if abs(s - 2 * m) > 1e-12:
            raise ValueError(f"sum of weights {s} is not an even integer")
        return m


def compositions(m: int, n: int, caps=None) -> list:
    """All M = (m_1..m_n) with sum m, ascending lexicographic order.

    ``caps`` bounds each part (m_j <= caps[j]) for finite-dimensional factors.
    """
    out = []

    def rec(prefix, left, j):
        if j == n - 1:
            if caps is None or left <= caps[j]:
                out.append(tuple(prefix) + (left,))
            return
        top = left if caps is None else min(left, caps[j])
        for k in range(top + 1):
            rec(prefix + [k], left - k, j + 1)

    if n == 0:
        return [()] if m == 0 else []
    rec([], m, 0)
    return out


def is_admissible(M, lambdas) -> bool:
    return all(0 <= mj <= round(complex(lj).real) for mj, lj in zip(M, lambdas))


@lru_cache(maxsize=None)
def block_assignments(M: tuple) -> np.ndarray:
    """Rows c with c_i = block of position i, |{i: c_i = l}| = M[l].

    Enumerated position by position in a fixed order, so the summation order
    of the weight-function sum is reproducible.
    """
    m = sum(M)
    rows = []

    def rec(prefix, left):
        if len(prefix) == m:
            rows.append(list(prefix))
            return
        for l, k in enumerate(left):
            if k:
                left[l] -= 1
                rec(prefix + [l], left)
                left[l] += 1

    rec([], list(M))
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), m)
    arr.setflags(write=False)
    return arr


def _ratio(num, den):
    den = np.asarray(den)
    if np.any(np.abs(den) < POLE_EPS):
        raise PoleError("weight function evaluated at a pole")
    return num / den


def _dynamical_shifts(M, lambdas, eta, mirror):
    n = len(M)
    mu = [lambdas[k] - 2 * M[k] for k in range(n)]
    out = []
    for k in range(n):
        rest = sum(mu[l] for l in (range(k + 1, n) if mirror else range(k)))
        out.append(2 * eta * M[k] - 2 * eta * rest)
    return np.array(out, dtype=complex)


def _weight_tables(M, t, lam, model: ModelParams, mirror: bool):
    par = model.params
    eta = par.eta
    n = len(M)
    t = np.asarray(t, dtype=complex)
    z = np.array(model.z)
    a = model.a
    dt = t[:, None] - z[None, :]
    th_plus = theta(dt + a[None, :], par)
    th_minus = theta(dt - a[None, :], par)
    zr = _ratio(th_plus, th_minus)
    shift = _dynamical_shifts(M, model.lambdas, eta, mirror)
    dyn = _ratio(theta(lam + dt - a[None, :] + shift[None, :], par), th_minus)
    f = np.empty((t.size, n), dtype=complex)
    for l in range(n):
        ks = range(l + 1, n) if mirror else range(l)
        f[:, l] = dyn[:, l] * np.prod(zr[:, list(ks)], axis=1)
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 0.5)
    g = _ratio(theta(diff + 2 * eta, par), theta(diff, par))
    np.fill_diagonal(g, 1.0)
    return f, g


def _check_level(M):
    m = sum(M)
    if m > MAX_LEVEL:
        raise ValueError(f"level {m} exceeds the cap {MAX_LEVEL}")
    if any(k < 0 for k in M):
        raise ValueError(f"negative part in {M}")


def omega(M, t, lam, model: ModelParams, mirror: bool = False) -> complex:
    """Weight function omega_M(t, lambda, z); mirror=True gives the mirror function."""
    M = tuple(int(k) for k in M)
    _check_level(M)
    if len(M) != model.n:
        raise ValueError("index length does not match the number of factors")
    m = sum(M)
    t = np.asarray(t, dtype=complex).ravel()
    if t.size != m:
        raise ValueError(f"need {m} variables, got {t.size}")
    if m == 0:
        return 1.0 + 0j
    f, g = _weight_tables(M, t, complex(lam), model, mirror)
    s = _kernels.assignment_sum(block_assignments(M), f, g, mirror)
    iu = np.triu_indices(m, 1)
    return complex(s / np.prod(g[iu]))


def omega_mirror(M, t, lam, model: ModelParams) -> complex:
    return omega(M, t, lam, model, mirror=True)


def omega_single(m: int, t, lam, z, a, params: EllipticParams) -> complex:
    """One-factor weight function, written out directly."""
    t = np.asarray(t, dtype=complex).ravel()
    eta = params.eta
    out = 1.0 + 0j
    for i in range(m):
        for j in range(i + 1, m):
            out *= theta(t[i] - t[j], params) / theta(t[i] - t[j] + 2 * eta, params)
    for j in range(m):
        out *= theta(lam + 2 * eta * m + t[j] - z - a, params) / theta(t[j] - z - a, params)
    return complex(out)


def multinomial_count(M) -> int:
    out, left = 1, sum(M)
    for k in M:
        out *= comb(left, k)
        left -= k
    return out


def special_point(M, model: ModelParams) -> np.ndarray:
    """T_M: block j is (z_j - eta L_j + 2 eta (m_j - 1), ..., z_j - eta L_j)."""
    eta = model.params.eta
    pts = []
    for j, mj in enumerate(M):
        base = model.z[j] - eta * model.lambdas[j]
        pts.extend(base + 2 * eta * (mj - 1 - i) for i in range(mj))
    return np.array(pts, dtype=complex)


def diagonal_factors(M, lam, model: ModelParams, mirror: bool = False) -> list:
    """Theta arguments (numerator, denominator) whose ratio product is omega_M(T_M)."""
    if model.n != 2:
        raise ValueError("closed diagonal form is for two factors")
    eta = model.params.eta
    L1, L2 = model.lambdas
    z1, z2 = model.z
    m1, m2 = M
    out = []
    if not mirror:
        for l in range(1, m1 + 1):
            out.append((2 * eta, 2 * eta * l))
            out.append((lam - 2 * eta * (L1 - m1 - l + 1), -2 * eta * (L1 - l + 1)))
        for l in range(1, m2 + 1):
            out.append((2 * eta, 2 * eta * l))
            out.append((lam - 2 * eta * (L1 + L2 - 2 * m1 - m2 - l + 1), -2 * eta * (L2 - l + 1)))
            out.append((-z1 + z2 + eta * L1 - eta * L2 + 2 * eta * (l - 1),
                        -z1 + z2 - eta * L1 - eta * L2 + 2 * eta * (l - 1)))
    else:
        for l in range(1, m2 + 1):
            out.append((2 * eta, 2 * eta * l))
            out.append((lam - 2 * eta * (L2 - m2 - l + 1), -2 * eta * (L2 - l + 1)))
        for l in range(1, m1 + 1):
            out.append((2 * eta, 2 * eta * l))
            out.append((lam - 2 * eta * (L1 + L2 - m1 - 2 * m2 - l + 1), -2 * eta * (L1 - l + 1)))
            out.append((z1 - z2 - eta * L1 + eta * L2 + 2 * eta * (l - 1),
                        z1 - z2 - eta * L1 - eta * L2 + 2 * eta * (l - 1)))
        # cross pairs left over from u(t)^{-1}; they do not cancel in the mirror sum
        d = z1 - z2 - eta * L1 + eta * L2
        for p in range(1, m1 + 1):
            for q in range(1, m2 + 1):
                x = d + 2 * eta * (m1 - p) - 2 * eta * (m2 - q)
                out.append((x - 2 * eta, x + 2 * eta))
    return out


def diagonal_value(M, lam, model: ModelParams, mirror: bool = False) -> complex:
    """Closed form of omega_M(T_M) (mirror: of the mirror function), two factors."""
    par = model.params
    out = 1.0 + 0j
    for num, den in diagonal_factors(M, lam, model, mirror):
        out *= theta(num, par) / theta(den, par)
    return complex(out)


def basis_matrices(m: int, lam, model: ModelParams):
    """A[M, L] = omega_M(T_L), At[M, L] = mirror omega_M(T_L) over compositions of m.

    Indices are ordered by ascending m_1, so A is lower and At upper triangular.
    """
    if model.n != 2:
        raise ValueError("basis matrices are defined for two factors")
    idx = compositions(m, 2)
    pts = [special_point(L, model) for L in idx]
    A = np.array([[omega(M, T, lam, model) for T in pts] for M in idx])
    At = np.array([[omega(M, T, lam, model, mirror=True) for T in pts] for M in idx])
    for k, M in enumerate(idx):
        if A[k, k] == 0 or not np.isfinite(A[k, k]):
            raise PoleError(f"diagonal entry of A vanishes at index {M}")
    return A, At


def resonance_lambda(j, a, b, M, model: ModelParams, r=0, s=0) -> complex:
    """lambda_0 = r + s tau + 2 eta (L_j - a - b + sum_{l<j} (L_l - 2 m_l)); j is 0-based."""
    par = model.params
    acc = sum(model.lambdas[l] - 2 * M[l] for l in range(j))
    return r + s * par.tau + 2 * par.eta * (model.lambdas[j] - a - b + acc)


def resonance_check_weights(j, a, b, M, L, r, s, t, model: ModelParams) -> float:
    """|LHS - RHS| of the weight-function resonance relation at factors (j, j+1).

    ``j`` is 0-based; M and L must agree outside positions j, j+1 and carry
    (a, k-a) and (b, k-b) there.
    """
    M, L = tuple(M), tuple(L)
    k = M[j] + M[j + 1]
    if (M[j], L[j]) != (a, b) or L[j] + L[j + 1] != k:
        raise ValueError("M, L do not match (a, k-a), (b, k-b)")
    if any(M[i] != L[i] for i in range(model.n) if i not in (j, j + 1)):
        raise ValueError("M and L must agree away from positions j, j+1")
    par = model.params
    lam0 = resonance_lambda(j, a, b, M, model, r, s)
    phase = model.z[j + 1] - model.z[j] + par.eta * (model.lambdas[j + 1] + model.lambdas[j])
    lhs = elliptic_factorial(a, par) * elliptic_factorial(k - a, par) * np.exp(2j * np.pi * s * a * phase) \
        * omega(M, t, lam0, model)
    rhs = elliptic_factorial(b, par) * elliptic_factorial(k - b, par) * np.exp(2j * np.pi * s * b * phase) \
        * omega(L, t, lam0, model)
    return float(abs(lhs - rhs))
