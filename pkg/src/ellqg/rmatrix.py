"""Dynamical R-matrices from weight functions, and their structural identities."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .elliptic_core import EllipticParams, PoleError, elliptic_factorial, theta, theta_prime_zero
from .weight_functions import (
    ModelParams,
    basis_matrices,
    compositions,
    diagonal_factors,
    diagonal_value,
    omega,
)

COLLOCATION_SEED = 20240611
REMOVABLE_EPS = 1e-7
MEAN_RADIUS = 1e-3
MEAN_NODES = 32


@dataclass(frozen=True)
class RMatrixBlock:
    """R on the level-m subspace of V_L1 (x) V_L2.

    ``entries[r, c]`` is R^{kl}_{ij} with (k, l) = index[r] (output) and
    (i, j) = index[c] (input); index is ascending in the first part.
    """

    m: int
    entries: np.ndarray
    index: tuple
    L1: complex
    L2: complex
    z: complex
    lam: complex
    method: str = "special-points"
    meta: dict = field(default_factory=dict, compare=False)

    def entry(self, out, inp) -> complex:
        pos = {k: i for i, k in enumerate(self.index)}
        if tuple(out) not in pos or tuple(inp) not in pos:
            return 0j
        return complex(self.entries[pos[tuple(out)], pos[tuple(inp)]])

    def to_json(self) -> str:
        d = {
            "lambda": [self.lam.real, self.lam.imag],
            "z": [self.z.real, self.z.imag],
            "L1": [complex(self.L1).real, complex(self.L1).imag],
            "L2": [complex(self.L2).real, complex(self.L2).imag],
            "m": self.m,
            "index": [list(k) for k in self.index],
            "entries": [[float(x.real), float(x.imag)] for x in self.entries.ravel()],
        }
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RMatrixBlock":
        d = json.loads(text)
        idx = tuple(tuple(k) for k in d["index"])
        ent = np.array([complex(a, b) for a, b in d["entries"]]).reshape(len(idx), len(idx))
        c = lambda p: complex(p[0], p[1])
        return cls(d["m"], ent, idx, c(d["L1"]), c(d["L2"]), c(d["z"]), c(d["lambda"]), "json")


def _collocation_points(m, count, params, z):
    rng = np.random.default_rng(COLLOCATION_SEED + 7 * m)
    scale = 0.5 * abs(params.tau)
    pts = []
    for _ in range(count):
        pts.append(0.5 * z + (rng.uniform(-0.45, 0.45, m) + 1j * rng.uniform(-0.3, 0.3, m)) * scale)
    return pts


def _rmatrix_collocation(model, lam, m):
    idx = compositions(m, 2)
    count = 2 * (len(idx) + 1)
    pts = _collocation_points(m, count, model.params, model.z[0])
    W = np.array([[omega(M, T, lam, model) for T in pts] for M in idx])
    Wt = np.array([[omega(M, T, lam, model, mirror=True) for T in pts] for M in idx])
    # R W = Wt in the least-squares sense, solved via the transposed system
    sol, *_ = np.linalg.lstsq(W.T, Wt.T, rcond=None)
    return sol.T


def _removable_point(m, lam, model) -> bool:
    # a vanishing numerator factor on the diagonal of A makes At A^{-1} a 0/0
    par = model.params
    for M in compositions(m, 2):
        for num, _ in diagonal_factors(M, lam, model):
            if abs(theta(num, par)) < REMOVABLE_EPS:
                return True
    return False


def _rmatrix_direct(model, lam, m, method):
    if method in ("auto", "special-points"):
        try:
            A, At = basis_matrices(m, lam, model)
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(At))):
                raise PoleError("non-finite basis matrix")
            return np.linalg.solve(A.T, At.T).T, "special-points"
        except (PoleError, np.linalg.LinAlgError):
            if method == "special-points":
                raise
            return _rmatrix_collocation(model, lam, m), "collocation"
    if method == "collocation":
        return _rmatrix_collocation(model, lam, m), "collocation"
    raise ValueError(f"unknown method {method}")


def build_rmatrix(L1, L2, z, lam, m: int, params: EllipticParams, method: str = "auto",
                  base: complex = 0.0) -> RMatrixBlock:
    """R_{L1,L2}(z, lambda) on the level-m subspace, R = At A^{-1}.

    The weight functions are evaluated with points (z + base, base); the
    result depends on z only. ``method`` is "special-points", "collocation"
    or "auto"; auto falls back to collocation when a special point hits a pole
    of the weight functions (integer weights above the quotient).
    Where a diagonal entry of A vanishes in lambda the quotient is a 0/0. If it
    is removable the value is the mean over a small circle; a nonzero contour
    residue means lambda is a genuine pole and PoleError is raised.
    """
    z, lam = complex(z), complex(lam)
    model = ModelParams((L1, L2), (z + base, base), params)
    idx = tuple(compositions(m, 2))
    if method != "collocation" and _removable_point(m, lam, model):
        mean, res = 0, 0
        for k in range(MEAN_NODES):
            u = MEAN_RADIUS * np.exp(2j * np.pi * (k + 0.5) / MEAN_NODES)
            R = _rmatrix_direct(model, lam + u, m, method)[0]
            mean, res = mean + R, res + R * u
        mean, res = mean / MEAN_NODES, res / MEAN_NODES
        if np.abs(res).max() > 1e-8 * (1.0 + np.abs(mean).max()):
            raise PoleError(f"lambda = {lam} is a pole of the R-matrix")
        R, used = mean, "circle-mean"
    else:
        R, used = _rmatrix_direct(model, lam, m, method)
    return RMatrixBlock(m, R, idx, complex(L1), complex(L2), z, lam, used)


def alpha(z, lam, params):
    eta = params.eta
    return theta(lam + 2 * eta, params) * theta(z, params) / (theta(lam, params) * theta(z - 2 * eta, params))


def beta(z, lam, params):
    eta = params.eta
    return -theta(lam + z, params) * theta(2 * eta, params) / (theta(lam, params) * theta(z - 2 * eta, params))


def fundamental_r(z, lam, params: EllipticParams) -> np.ndarray:
    """Fundamental R-matrix in the basis e00, e01, e10, e11 (rows are outputs)."""
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = R[3, 3] = 1.0
    R[1, 1] = alpha(z, lam, params)
    R[1, 2] = beta(z, lam, params)
    R[2, 1] = beta(z, -lam, params)
    R[2, 2] = alpha(z, -lam, params)
    if not np.all(np.isfinite(R)):
        raise PoleError("fundamental R-matrix evaluated at a pole")
    return R


def fundamental_block(z, lam, level: int, params: EllipticParams) -> np.ndarray:
    """Level block of the fundamental R-matrix over compositions capped at (1, 1)."""
    if level in (0, 2):
        return np.ones((1, 1), dtype=complex)
    if level != 1:
        return np.zeros((0, 0), dtype=complex)
    R = fundamental_r(z, lam, params)
    return R[1:3, 1:3].copy()


def finite_dim_project(R: RMatrixBlock, L1: int, L2: int, tol: float = 1e-8) -> RMatrixBlock:
    """Restrict to indices i <= L1, j <= L2; raises if R leaks quotient into the submodule.

    The submodule spanned by indices with i > L1 or j > L2 must be invariant.
    """
    keep = [k for k, (i, j) in enumerate(R.index) if i <= L1 and j <= L2]
    drop = [k for k in range(len(R.index)) if k not in keep]
    if drop and keep:
        leak = np.abs(R.entries[np.ix_(keep, drop)]).max()
        scale = max(1.0, np.abs(R.entries).max())
        if leak > tol * scale:
            raise ValueError(f"invariant-subspace leakage {leak:.3e}")
    sub = R.entries[np.ix_(keep, keep)]
    idx = tuple(R.index[k] for k in keep)
    return RMatrixBlock(R.m, sub, idx, R.L1, R.L2, R.z, R.lam, R.method + "+projected")


class RProvider:
    """Supplies level blocks R_{La,Lb}(z, lambda) for a list of factors.

    Factors with ``finite[j]`` use the quotient L_{L_j}; weight 1 there uses the
    closed fundamental form.
    """

    def __init__(self, lambdas, params: EllipticParams, finite=None, method="auto"):
        self.lambdas = tuple(complex(x) for x in lambdas)
        self.params = params
        self.finite = tuple(finite) if finite is not None else (False,) * len(self.lambdas)
        self.method = method

    def caps(self):
        return [round(l.real) if f else None for l, f in zip(self.lambdas, self.finite)]

    def block(self, a: int, b: int, z, lam, level: int):
        """(index, matrix) of R_{L_a, L_b}(z, lam) on the given level, factor a first."""
        La, Lb = self.lambdas[a], self.lambdas[b]
        fa, fb = self.finite[a], self.finite[b]
        if fa != fb:
            raise ValueError("mixed finite/Verma factor pairs are not supported")
        if fa:
            ca, cb = round(La.real), round(Lb.real)
            idx = compositions(level, 2, caps=(ca, cb))
            if not idx:
                return idx, np.zeros((0, 0), dtype=complex)
            if ca == 1 and cb == 1:
                return idx, fundamental_block(z, lam, level, self.params)
            R = build_rmatrix(La, Lb, z, lam, level, self.params, self.method)
            P = finite_dim_project(R, ca, cb)
            return list(P.index), P.entries
        R = build_rmatrix(La, Lb, z, lam, level, self.params, self.method)
        return list(R.index), R.entries


def weight_of(lambda_j, k):
    return lambda_j - 2 * k


def pair_matrix(provider: RProvider, basis, a: int, b: int, z, lam_of_state) -> np.ndarray:
    """Matrix of R^{(ab)} on a tensor basis; lam_of_state(state) gives the dynamical argument.

    The argument may depend only on factors other than a and b, which R does
    not change, so rows and columns sharing bystanders share one value.
    """
    pos = {s: i for i, s in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    cache = {}
    for col, s in enumerate(basis):
        level = s[a] + s[b]
        lam = lam_of_state(s)
        key = (level, lam)
        if key not in cache:
            cache[key] = provider.block(a, b, z, lam, level)
        idx, M = cache[key]
        ipos = {k: i for i, k in enumerate(idx)}
        c = ipos[(s[a], s[b])]
        for r, (i, j) in enumerate(idx):
            t = list(s)
            t[a], t[b] = i, j
            t = tuple(t)
            if t in pos:
                out[pos[t], col] += M[r, c]
    return out


def level_basis(m: int, caps) -> list:
    n = len(caps)
    if all(c is None for c in caps):
        return compositions(m, n)
    big = [m if c is None else c for c in caps]
    return compositions(m, n, caps=big)


def dybe_residual(L1, L2, L3, z, w, lam, params: EllipticParams, m: int = 1, finite=False) -> float:
    """Operator norm of the dynamical Yang-Baxter defect on the level-m space of three factors.

    R12(z, lam - 2 eta h3) R13(z+w, lam) R23(w, lam - 2 eta h1)
      = R23(w, lam) R13(z+w, lam - 2 eta h2) R12(z, lam).
    """
    eta = params.eta
    lams = (complex(L1), complex(L2), complex(L3))
    prov = RProvider(lams, params, finite=(finite,) * 3)
    basis = level_basis(m, prov.caps())
    h = lambda s, j: lams[j] - 2 * s[j]
    R12a = pair_matrix(prov, basis, 0, 1, z, lambda s: lam - 2 * eta * h(s, 2))
    R13a = pair_matrix(prov, basis, 0, 2, z + w, lambda s: lam)
    R23a = pair_matrix(prov, basis, 1, 2, w, lambda s: lam - 2 * eta * h(s, 0))
    R23b = pair_matrix(prov, basis, 1, 2, w, lambda s: lam)
    R13b = pair_matrix(prov, basis, 0, 2, z + w, lambda s: lam - 2 * eta * h(s, 1))
    R12b = pair_matrix(prov, basis, 0, 1, z, lambda s: lam)
    lhs = R12a @ R13a @ R23a
    rhs = R23b @ R13b @ R12b
    return float(np.linalg.norm(lhs - rhs, 2))


def flip_matrix(index_a, index_b) -> np.ndarray:
    """Matrix of P: e_i (x) e_j -> e_j (x) e_i from basis index_a to index_b."""
    pos = {k: i for i, k in enumerate(index_b)}
    P = np.zeros((len(index_b), len(index_a)))
    for c, (i, j) in enumerate(index_a):
        P[pos[(j, i)], c] = 1.0
    return P


def unitarity_residual(L1, L2, z, lam, m: int, params: EllipticParams) -> float:
    """||R12(z, lam) R21(-z, lam) - Id|| on level m, R21 = P R_{L2,L1}(-z, lam) P."""
    R12 = build_rmatrix(L1, L2, z, lam, m, params)
    R21s = build_rmatrix(L2, L1, -z, lam, m, params)
    P = flip_matrix(R21s.index, R12.index)
    R21 = P @ R21s.entries @ P.T
    return float(np.linalg.norm(R12.entries @ R21 - np.eye(len(R12.index)), 2))


def fundamental_unitarity_residual(z, lam, params: EllipticParams) -> float:
    P = np.eye(4)[[0, 2, 1, 3]]
    R = fundamental_r(z, lam, params)
    R21 = P @ fundamental_r(-z, lam, params) @ P
    return float(np.linalg.norm(R @ R21 - np.eye(4), 2))


def zero_weight_residual(L1, L2, z, lam, m_max: int, params: EllipticParams) -> float:
    """Norm of [R, h1 + h2] on the direct sum of levels 0..m_max.

    Levels are assembled from independent constructions, so this certifies
    that each construction maps a level into itself.
    """
    idx, blocks = [], []
    for m in range(m_max + 1):
        R = build_rmatrix(L1, L2, z, lam, m, params)
        idx.extend(R.index)
        blocks.append(R.entries)
    n = len(idx)
    full = np.zeros((n, n), dtype=complex)
    o = 0
    for B in blocks:
        k = B.shape[0]
        full[o:o + k, o:o + k] = B
        o += k
    h = np.diag([complex(L1) + complex(L2) - 2 * (i + j) for i, j in idx])
    return float(np.linalg.norm(full @ h - h @ full, 2))


def determinant_check(L1, L2, z, lam, m: int, params: EllipticParams) -> float:
    """Relative gap between det R and prod diag(At) / prod diag(A)."""
    R = build_rmatrix(L1, L2, z, lam, m, params)
    model = ModelParams((L1, L2), (z, 0.0), params)
    num = np.prod([diagonal_value(M, lam, model, mirror=True) for M in R.index])
    den = np.prod([diagonal_value(M, lam, model) for M in R.index])
    ref = num / den
    return float(abs(np.linalg.det(R.entries) - ref) / abs(ref))


def lambda_periodicity_residual(L1, L2, z, w, lam, m: int, params: EllipticParams) -> float:
    """max of |R(lam+1) - R(lam)| and the tau-shift conjugation defect."""
    eta, tau = params.eta, params.tau
    R0 = build_rmatrix(L1, L2, z - w, lam, m, params)
    R1 = build_rmatrix(L1, L2, z - w, lam + 1, m, params)
    Rt = build_rmatrix(L1, L2, z - w, lam + tau, m, params)
    h1 = np.array([complex(L1) - 2 * i for i, _ in R0.index])
    h2 = np.array([complex(L2) - 2 * j for _, j in R0.index])
    left = np.exp(1j * np.pi * (h1 * (-z - eta * L2) + h2 * (-w + eta * L1)))
    right = np.exp(1j * np.pi * (h1 * (z - eta * L2) + h2 * (w + eta * L1)))
    conj = left[:, None] * R0.entries * right[None, :]
    return float(max(np.abs(R1.entries - R0.entries).max(), np.abs(Rt.entries - conj).max()))


# Shapovalov operator

def shapovalov_single(k: int, L, lam, params: EllipticParams) -> complex:
    """Q_k^L(lam)."""
    eta = params.eta
    pref = theta_prime_zero(params) / theta(2 * eta, params)
    out = 1.0 + 0j
    for l in range(1, k + 1):
        out *= pref * theta(2 * eta * (L + 1 - l), params) * theta(2 * eta * l, params)
        out /= theta(lam + 2 * eta * (L + 1 - k - l), params) * theta(lam - 2 * eta * l, params)
    return complex(out)


def shapovalov_coefficient(M, lambdas, lam, params: EllipticParams) -> complex:
    """Q_M(lam) by the closed product over factors."""
    eta = params.eta
    m = sum(M)
    out = (theta_prime_zero(params) / theta(2 * eta, params)) ** m
    acc = 0j
    for j, (mj, Lj) in enumerate(zip(M, lambdas)):
        before = acc
        acc = acc + Lj - 2 * mj
        for l in range(1, mj + 1):
            out *= theta(2 * eta * (Lj + 1 - l), params) * theta(2 * eta * l, params)
            out /= theta(lam + 2 * eta * (mj - l + 1) + 2 * eta * acc, params)
            out /= theta(lam - 2 * eta * l + 2 * eta * before, params)
    return complex(out)


@dataclass(frozen=True)
class ShapovalovDiag:
    """Diagonal of Q on the zero-weight space with the pole sets S_M."""

    index: tuple
    coefficients: np.ndarray
    poles: dict


def shapovalov_poles(M, lambdas, eta) -> list:
    """S_M as a list of (value, j, l, dual index); j is 1-based as in the pole labels."""
    M = tuple(M)
    n = len(M)
    out = []
    for j in range(1, n):
        acc = sum(lambdas[k] - 2 * M[k] for k in range(j - 1))
        for l in range(M[j - 1] + M[j] + 1):
            if l == M[j - 1]:
                continue
            val = -2 * eta * (lambdas[j - 1] - M[j - 1] - l + acc)
            out.append((complex(val), j, l, dual_index(M, j, l)))
    for l in range(M[n - 1] + M[0] + 1):
        if l == M[n - 1]:
            continue
        out.append((complex(-2 * eta * (M[n - 1] - l)), n, l, dual_index(M, n, l)))
    return out


def dual_index(M, j: int, l: int) -> tuple:
    """Index dual to M with respect to the pole labelled (j, l), j 1-based."""
    M = list(M)
    n = len(M)
    if j < n:
        k = M[j - 1] + M[j]
        M[j - 1], M[j] = l, k - l
    else:
        k = M[0] + M[n - 1]
        M[0], M[n - 1] = k - l, l
    return tuple(M)


def shapovalov(model: ModelParams, lam) -> ShapovalovDiag:
    m = model.zero_weight_level()
    idx = tuple(compositions(m, model.n))
    eta = model.params.eta
    coef = np.array([shapovalov_coefficient(M, model.lambdas, lam, model.params) for M in idx])
    poles = {M: shapovalov_poles(M, model.lambdas, eta) for M in idx}
    return ShapovalovDiag(idx, coef, poles)


def qr_relation_residual(j, k, r, s, lam, L1, L2, z, params: EllipticParams) -> float:
    """|LHS - RHS| of the relation between Q and R; (j,k) input, (r,s) output level pair."""
    eta = params.eta
    if j + k != r + s:
        raise ValueError("j + k must equal r + s")
    m = j + k
    Rm = build_rmatrix(L1, L2, z, -lam, m, params)
    Rp = build_rmatrix(L1, L2, z, lam + 2 * eta * (L1 + L2 - 2 * (r + s)), m, params)
    lhs = shapovalov_single(j, L1, lam + 2 * eta * (L2 - 2 * k), params) * shapovalov_single(k, L2, lam, params) \
        * Rm.entry((j, k), (r, s))
    rhs = shapovalov_single(r, L1, lam, params) * shapovalov_single(s, L2, lam + 2 * eta * (L1 - 2 * r), params) \
        * Rp.entry((r, s), (j, k))
    return float(abs(lhs - rhs))


# lambda-poles

def lambda_pole_candidates(L1, m: int, params: EllipticParams, r: int = 0, s: int = 0) -> list:
    eta = params.eta
    return [2 * eta * (L1 - k) + r + s * params.tau for k in range(1, 2 * m)]


def lambda_pole_residue(L1, L2, z, pole, m: int, params: EllipticParams, power: int = 0,
                        radius: float = 1e-3, nodes: int = 32) -> np.ndarray:
    """(1/2 pi i) contour integral of (lam - pole)^power R(lam) on a small circle.

    32-node trapezoidal rule on a circle of radius 1e-3 by default.
    """
    pole = complex(pole)
    acc = None
    for k in range(nodes):
        u = radius * np.exp(2j * np.pi * k / nodes)
        R = build_rmatrix(L1, L2, z, pole + u, m, params).entries
        term = R * u ** (power + 1)
        acc = term if acc is None else acc + term
    return acc / nodes


def residue_kernel_vectors(L1, L2, z, k: int, m: int, s: int, params: EllipticParams) -> np.ndarray:
    """Columns spanning the predicted kernel of the residue at 2 eta (L1 - k) + r + s tau."""
    eta = params.eta
    idx = compositions(m, 2)
    tied = [a for a in range(m + 1) if 0 <= k - a <= m]
    cols = []
    for pos, (a, _) in enumerate(idx):
        if a not in tied:
            v = np.zeros(len(idx), dtype=complex)
            v[pos] = 1.0
            cols.append(v)
    v = np.zeros(len(idx), dtype=complex)
    for pos, (a, _) in enumerate(idx):
        if a in tied:
            w = elliptic_factorial(a, params) * elliptic_factorial(m - a, params)
            w *= np.exp(2j * np.pi * s * a * (-z + eta * L1 + eta * L2))
            v[pos] = 1.0 / w
    cols.append(v)
    return np.array(cols).T


def residue_kernel_check(L1, L2, z, k: int, m: int, params: EllipticParams, r: int = 0, s: int = 0):
    """(relative ||K u|| over kernel vectors, residue norm, simplicity ratio)."""
    pole = 2 * params.eta * (L1 - k) + r + s * params.tau
    K = lambda_pole_residue(L1, L2, z, pole, m, params)
    K1 = lambda_pole_residue(L1, L2, z, pole, m, params, power=1)
    U = residue_kernel_vectors(L1, L2, z, k, m, s, params)
    U = U / np.linalg.norm(U, axis=0)
    kn = np.linalg.norm(K, 2)
    return float(np.linalg.norm(K @ U, 2) / kn), float(kn), float(np.linalg.norm(K1, 2) / kn)


# coefficient relations

def _inv_factorial(k, params):
    return 0.0 if k < 0 else 1.0 / elliptic_factorial(k, params)


def _fact(k, params):
    return 0.0 if k < 0 else elliptic_factorial(k, params)


def _entry(L1, L2, z, lam, out, inp, params):
    if min(out) < 0 or min(inp) < 0 or sum(out) != sum(inp):
        return 0j
    return build_rmatrix(L1, L2, z, lam, sum(out), params).entry(out, inp)


def coeff_relation_residual(kind: int, indices, r, s, z, w, L1, L2, params: EllipticParams) -> float:
    """|LHS - RHS| of a coefficient relation between R-matrix entries.

    kind 1: indices (a, b, b2, c); entries R^{a,b}_{d,c} at lam = 2 eta (b2-b) + r + s tau
    against R^{a,b2}_{d2,c} at 2 eta (b-b2) + r + s tau, with d, d2 fixed by weight.
    kind 2: indices (a, a2, b, d); entries R^{a,b}_{d,c} and R^{a2,b}_{d,c2} at
    lam = 2 eta (L1 + L2 - 2b - a - a2) + r + s tau.
    """
    eta, tau = params.eta, params.tau
    if kind == 1:
        a, b, b2, c = indices
        d, d2 = a + b - c, a + b2 - c
        ph = lambda bb, dd: np.exp(2j * np.pi * s * (bb * (-w + eta * L1) + dd * (z - eta * L2)))
        lhs = ph(b, d) * _fact(b, params) * _inv_factorial(d, params) \
            * _entry(L1, L2, z - w, 2 * eta * (b2 - b) + r + s * tau, (a, b), (d, c), params)
        rhs = ph(b2, d2) * _fact(b2, params) * _inv_factorial(d2, params) \
            * _entry(L1, L2, z - w, 2 * eta * (b - b2) + r + s * tau, (a, b2), (d2, c), params)
    elif kind == 2:
        a, a2, b, d = indices
        c, c2 = a + b - d, a2 + b - d
        lam = 2 * eta * (L1 + L2 - 2 * b - a - a2) + r + s * tau
        ph = lambda aa, cc: np.exp(2j * np.pi * s * (aa * (-z - eta * L2) + cc * (w + eta * L1)))
        lhs = ph(a, c) * _fact(a, params) * _inv_factorial(c, params) \
            * _entry(L1, L2, z - w, lam, (a, b), (d, c), params)
        rhs = ph(a2, c2) * _fact(a2, params) * _inv_factorial(c2, params) \
            * _entry(L1, L2, z - w, lam, (a2, b), (d, c2), params)
    else:
        raise ValueError("kind must be 1 or 2")
    return float(abs(lhs - rhs))
