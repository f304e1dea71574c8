"""Interaction-round-a-face models built from the fundamental R-matrix.

Heights are stored as integers (optionally offset by a complex mu); the
dynamical argument is lambda = 2 eta * height. A height state (a_1..a_n)
stands for the delta function at lambda = 2 eta a_1 with vector
e[a_1-a_2] (x) ... (x) e[a_n-a_1], where e[1] = e_0 and e[-1] = e_1.
"""

from __future__ import annotations

import json
from itertools import product

import numpy as np

from .elliptic_core import EllipticParams, PoleError, theta
from .qkzb_ops import FnSpace, OperatorOnFn, ZeroWeightFn, reverse_operator
from .rmatrix import RProvider, level_basis, pair_matrix

DEFAULT_MU = 0.31 + 0.17j
ADJ_EPS = 1e-9


# Boltzmann weights ------------------------------------------------------------

def _step(x):
    """+1 / -1 for an adjacent height difference, 0 otherwise."""
    x = complex(x)
    if abs(x.imag) > ADJ_EPS:
        return 0
    for s in (1, -1):
        if abs(x.real - s) < ADJ_EPS:
            return s
    return 0


def _idx(step):
    return 0 if step > 0 else 1


def _entry(out, inp, z, lam, params):
    """Entry of the fundamental R-matrix, evaluating only the theta ratio that is needed."""
    eta = params.eta
    if out != inp and {out, inp} != {1, 2}:
        return 0j
    if inp in (0, 3):
        return 1.0 + 0j
    sgn = 1 if out == 1 else -1
    l = sgn * lam
    den = theta(l, params) * theta(z - 2 * eta, params)
    if out == inp:
        num = theta(l + 2 * eta, params) * theta(z, params)
    else:
        num = -theta(l + z, params) * theta(2 * eta, params)
    if abs(den) < 1e-14:
        if abs(num) < 1e-14:
            raise PoleError("0/0 in a Boltzmann weight")
        raise PoleError(f"Boltzmann weight at a pole (lambda = {lam})")
    return complex(num / den)


def boltzmann(a, b, c, d, z, params: EllipticParams) -> complex:
    """w(a,b,c,d;z): R(z, 2 eta d) e[d-c] (x) e[c-b] = sum_a w(a,b,c,d;z) e[a-b] (x) e[d-a].

    Zero unless a-b, b-c, c-d, a-d are all +-1.
    """
    s = [_step(a - b), _step(b - c), _step(c - d), _step(a - d)]
    if 0 in s:
        return 0j
    inp = 2 * _idx(_step(d - c)) + _idx(_step(c - b))
    out = 2 * _idx(_step(a - b)) + _idx(_step(d - a))
    return _entry(out, inp, complex(z), 2 * params.eta * complex(d), params)


def _neighbours(*hs):
    out = []
    for h in hs:
        for s in (1, -1):
            g = h + s
            if not any(abs(g - x) < ADJ_EPS for x in out):
                out.append(g)
    return out


def star_triangle_sides(labels, z1, z2, z3, params: EllipticParams, restricted=None):
    """Both sides of the star-triangle equation for boundary heights (a, b, c, d, e, f).

    ``restricted`` is None (sum over all neighbours), "positive" (heights >= 1)
    or an integer N (heights in 1..N-1).
    """
    a, b, c, d, e, f = labels

    def allowed(g):
        if restricted is None:
            return True
        gr = complex(g).real
        if restricted == "positive":
            return gr >= 1
        return 1 <= gr <= int(restricted) - 1

    w = lambda *x: boltzmann(*x, params)
    lhs = 0j
    for g in _neighbours(b, f, d):
        if allowed(g):
            lhs += w(a, b, g, f, z2 - z3) * w(b, c, d, g, z1 - z3) * w(g, d, e, f, z1 - z2)
    rhs = 0j
    for g in _neighbours(a, c, e):
        if allowed(g):
            rhs += w(b, c, g, a, z1 - z2) * w(a, g, e, f, z1 - z3) * w(g, c, d, e, z2 - z3)
    return lhs, rhs


def star_triangle_residual(labels, z1, z2, z3, params: EllipticParams, restricted=None) -> float:
    lhs, rhs = star_triangle_sides(labels, z1, z2, z3, params, restricted)
    return float(abs(lhs - rhs))


def random_labels(rng, mu=0j, low=None, high=None):
    """Six cyclically adjacent heights mu + integers, optionally confined to [low, high]."""
    while True:
        start = int(rng.integers(low if low is not None else -3, (high if high is not None else 3) + 1))
        steps = rng.choice([-1, 1], size=5)
        hs = [start]
        for s in steps:
            hs.append(hs[-1] + int(s))
        if abs(hs[-1] - hs[0]) != 1:
            continue
        if low is not None and min(hs) < low:
            continue
        if high is not None and max(hs) > high:
            continue
        return tuple(mu + h for h in hs)


# states --------------------------------------------------------------------

def cyclic_paths(n: int, start) -> list:
    """All (a_1..a_n) with a_1 = start and cyclic steps of +-1, lexicographic in the steps."""
    out = []
    for steps in product((-1, 1), repeat=n):
        if sum(steps) != 0:
            continue
        a = [start]
        for s in steps[:-1]:
            a.append(a[-1] + s)
        out.append(tuple(a))
    return sorted(out, key=lambda a: tuple(complex(x).real for x in a))


def restricted_basis(N: int, n: int) -> list:
    """Cyclic +-1 height paths with every height in 1..N-1, lexicographic."""
    if n % 2:
        raise ValueError("n must be even")
    if N < 2:
        raise ValueError("N must be at least 2")
    out = []
    for a1 in range(1, N):
        out.extend(a for a in cyclic_paths(n, a1) if all(1 <= h <= N - 1 for h in a))
    return sorted(out)


def walk_count(N: int, n: int) -> int:
    """Closed walks of length n on the path graph 1..N-1 (trace of the adjacency power)."""
    k = max(N - 1, 0)
    if k == 0:
        return 0
    A = np.zeros((k, k), dtype=np.int64)
    for i in range(k - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return int(np.trace(np.linalg.matrix_power(A, n)))


def state_index(a) -> tuple:
    """Zero-weight index M of a height state: m_j = 0 iff a_j - a_{j+1} = +1."""
    n = len(a)
    return tuple(_idx(_step(a[j] - a[(j + 1) % n])) for j in range(n))


# transfer matrices -----------------------------------------------------------

def transfer_element(b, a, w, z, params: EllipticParams) -> complex:
    """<b| T(w) |a> = prod_j w(b_{j+1}, a_{j+1}, a_j, b_j; w - z_j)."""
    n = len(a)
    out = 1.0 + 0j
    for j in range(n):
        out *= boltzmann(b[(j + 1) % n], a[(j + 1) % n], a[j], b[j], w - z[j], params)
        if out == 0:
            return 0j
    return out


def _shift(a, offset):
    return a if offset == 0 else tuple(offset + h for h in a)


def _targets(a):
    # b_j = a_j +- 1 with b cyclic adjacent
    n = len(a)
    for signs in product((-1, 1), repeat=n):
        b = tuple(x + s for x, s in zip(a, signs))
        if all(_step(b[j] - b[(j + 1) % n]) for j in range(n)):
            yield b


def transfer_apply(v: dict, w, z, params: EllipticParams, allowed=None, offset=0) -> dict:
    """(T v)_b = sum_a <b|T|a> v_a on a coefficient map over height states.

    ``allowed(b)`` filters output states (restricted models); only states
    reachable from the support of v are produced. Keys are integer paths and
    the actual heights are ``key + offset``, so off-lattice heights never end
    up as float dictionary keys.
    """
    out = {}
    for a, va in v.items():
        if va == 0:
            continue
        for b in _targets(a):
            if allowed is not None and not allowed(b):
                continue
            x = transfer_element(_shift(b, offset), _shift(a, offset), w, z, params)
            if x != 0:
                out[b] = out.get(b, 0j) + x * va
    return out


def restricted_transfer_matrix(N: int, w, z, params: EllipticParams, basis=None) -> np.ndarray:
    """Dense T^{N}(w) over restricted_basis(N, n); rows are outputs."""
    n = len(z)
    basis = basis or restricted_basis(N, n)
    pos = {s: i for i, s in enumerate(basis)}
    T = np.zeros((len(basis), len(basis)), dtype=complex)
    for c, a in enumerate(basis):
        for b in _targets(a):
            if b in pos:
                T[pos[b], c] = transfer_element(b, a, w, z, params)
    return T


def _check_root_of_unity(N, params):
    if abs(params.eta - 1 / (2 * N)) > 1e-12:
        raise ValueError(f"restricted model needs eta = 1/(2N) = {1 / (2 * N)}, got {params.eta}")


def brute_force_spectrum(N: int, w, z, params: EllipticParams, w2=None):
    """Eigen-decomposition of T^{N}(w) and the commutator norm with T^{N}(w2).

    Returns (eigenvalues, eigenvectors as columns, commutator norm or None).
    """
    _check_root_of_unity(N, params)
    basis = restricted_basis(N, len(z))
    T = restricted_transfer_matrix(N, w, z, params, basis)
    vals, vecs = np.linalg.eig(T)
    comm = None
    if w2 is not None:
        T2 = restricted_transfer_matrix(N, w2, z, params, basis)
        comm = float(np.linalg.norm(T @ T2 - T2 @ T, 2))
    return vals, vecs, comm


def transfer_operator(w, z, params: EllipticParams) -> OperatorOnFn:
    """T(w) = sum_nu Tr_{V[nu]} L(w, lambda) Gamma_nu on functions with values in W[0], W = (C^2)^n.

    L(w, lambda) applies R^{(01)}(w - z_1, lambda) first, then
    R^{(02)}(w - z_2, lambda - 2 eta h^(1)), ..., the auxiliary space being factor 0.
    """
    z = [complex(x) for x in z]
    n = len(z)
    eta = params.eta
    space = FnSpace((1,) * n, params, (True,) * n)
    prov = RProvider((1,) * (n + 1), params, (True,) * (n + 1))
    blocks = []
    for j0 in (0, 1):
        big = level_basis(space.m + j0, [1] * (n + 1))
        pos = {s: i for i, s in enumerate(big)}
        blocks.append((big, [pos[(j0,) + s] for s in space.basis]))

    def diag_blocks(lam):
        out = []
        for big, idx in blocks:
            L = np.eye(len(big), dtype=complex)
            for k in range(1, n + 1):
                R = pair_matrix(prov, big, 0, k, w - z[k - 1],
                                lambda s, k=k: lam - 2 * eta * sum(1 - 2 * s[l] for l in range(1, k)))
                L = R @ L
            out.append(L[np.ix_(idx, idx)])
        return out

    def transform(f):
        def ev(lam):
            La, Ld = diag_blocks(lam)
            return La @ f(lam - 2 * eta) + Ld @ f(lam + 2 * eta)
        return ev

    return OperatorOnFn(space, space, transform, frozenset({-2 * eta, 2 * eta}), "T")


def reversed_transfer_operator(w, z, params: EllipticParams) -> OperatorOnFn:
    """P^{-1} T(w; z_n..z_1) P with P reversing the tensor factors.

    This is the commuting family diagonalised by eigenfunctions built from
    mirror weight functions (the "transfer" Bethe system).
    """
    z = [complex(x) for x in z]
    T = transfer_operator(w, z[::-1], params)
    P = reverse_operator(T.src)
    return reverse_operator(P.dst) @ T @ P


# Bethe vectors on height states --------------------------------------------------

def coefficient_map(f: ZeroWeightFn, states, offset=0) -> dict:
    """(f)_{|a>} = f_{M(a)}(2 eta a_1) in the standard basis, heights a + offset."""
    f = f.to_standard()
    eta = f.space.params.eta
    pos = {s: i for i, s in enumerate(f.space.basis)}
    return {a: complex(f(2 * eta * (a[0] + offset))[pos[state_index(a)]]) for a in states}


def bethe_eigenvector_restricted(apsi: ZeroWeightFn, N: int, basis=None) -> np.ndarray:
    """Vector (A psi)_{|a>} over the restricted basis; raises if it vanishes."""
    params = apsi.space.params
    _check_root_of_unity(N, params)
    basis = basis or restricted_basis(N, apsi.space.n)
    cm = coefficient_map(apsi, basis)
    v = np.array([cm[a] for a in basis])
    if np.abs(v).max() < 1e-12:
        raise ValueError("the Bethe vector projects to zero on the restricted space")
    return v


def restricted_eigen_residual(v, eps, N, w, z, params: EllipticParams) -> float:
    T = restricted_transfer_matrix(N, w, z, params)
    return float(np.linalg.norm(T @ v - eps * v) / np.linalg.norm(v))


def bad_state_max(apsi: ZeroWeightFn, N: int, window: int = 1) -> float:
    """max |(A psi)_{|a>}| over states with some height divisible by N (heights in a window)."""
    n = apsi.space.n
    states = []
    for a1 in range(-window * N, window * N + 1):
        states.extend(a for a in cyclic_paths(n, a1) if any(h % N == 0 for h in a))
    cm = coefficient_map(apsi, states)
    return max(abs(x) for x in cm.values())


def height_reflection_residual(v, basis, N: int, c) -> float:
    """max |v_a - (-1)^{n/2+1} e^c v_{N-a}| / max|v|."""
    n = len(basis[0])
    pos = {s: i for i, s in enumerate(basis)}
    f = (-1) ** (n // 2 + 1) * np.exp(complex(c))
    worst = 0.0
    for a in basis:
        r = tuple(N - h for h in a)
        worst = max(worst, abs(v[pos[a]] - f * v[pos[r]]))
    return float(worst / np.abs(v).max())


def match_eigenvector(v, vals, vecs, eps):
    """Closest eigenvalue to eps and the overlap of v with that eigenspace.

    The eigenspace is spanned by eigenvectors whose eigenvalues lie within
    1e-7 (relative) of the closest one; overlap is |P v| / |v|.
    """
    k = int(np.argmin(np.abs(vals - eps)))
    near = np.abs(vals - vals[k]) <= 1e-7 * max(1.0, abs(vals[k]))
    Q, _ = np.linalg.qr(vecs[:, near])
    overlap = float(np.linalg.norm(Q.conj().T @ v) / np.linalg.norm(v))
    return complex(vals[k]), float(abs(vals[k] - eps)), overlap


def infinite_restricted_check(apsi: ZeroWeightFn, eps, w, z, a_max: int = 6, neutral_tol: float = 1e-8) -> float:
    """Coefficient-wise defect of T^+(w) A psi^+ = eps A psi^+ on positive states with heights <= a_max.

    Every positive state in the window only reads positive states of height
    <= a_max + 1, so the window is exact. Neutral coefficients (some height 0)
    must vanish first.
    """
    params = apsi.space.params
    n = apsi.space.n
    neutral = []
    for a1 in range(-n, n + 1):
        neutral.extend(a for a in cyclic_paths(n, a1) if any(h == 0 for h in a))
    cm = coefficient_map(apsi, neutral)
    worst_neutral = max(abs(x) for x in cm.values())
    if worst_neutral > neutral_tol:
        raise ValueError(f"coefficients at neutral states do not vanish ({worst_neutral:.2e})")
    src = []
    for a1 in range(1, a_max + 2):
        src.extend(a for a in cyclic_paths(n, a1) if min(a) >= 1 and max(a) <= a_max + 1)
    coeff = coefficient_map(apsi, src)
    image = transfer_apply(coeff, w, z, params, allowed=lambda b: min(b) >= 1)
    worst, scale = 0.0, max(abs(x) for x in coeff.values())
    for b in src:
        if max(b) > a_max:
            continue
        worst = max(worst, abs(image.get(b, 0j) - eps * coeff[b]))
    return float(worst / scale)


def unrestricted_check(apsi: ZeroWeightFn, eps, w, z, mu=DEFAULT_MU, heights=range(-2, 3)) -> float:
    """Eigen-defect on the lattice C_mu for outputs with a_1 in ``heights``."""
    params = apsi.space.params
    n = apsi.space.n
    out_states = [a for h in heights for a in cyclic_paths(n, h)]
    src = sorted({a for b in out_states for a in _targets(b)})
    coeff = coefficient_map(apsi, src, offset=mu)
    image = transfer_apply(coeff, w, z, params, offset=mu)
    outc = coefficient_map(apsi, out_states, offset=mu)
    scale = max(abs(x) for x in outc.values())
    return float(max(abs(image.get(b, 0j) - eps * outc[b]) for b in out_states) / scale)


def spectrum_json(N, n, params, w, vals, comm, matches) -> str:
    pair = lambda x: [float(complex(x).real), float(complex(x).imag)]
    order = sorted(range(len(vals)), key=lambda i: (round(vals[i].real, 10), round(vals[i].imag, 10)))
    d = {
        "N": N,
        "n": n,
        "tau": pair(params.tau),
        "eta": pair(params.eta),
        "w": pair(w),
        "eigenvalues": [pair(vals[i]) for i in order],
        "commutator_norm": comm,
        "bethe_matches": matches,
    }
    return json.dumps(d, sort_keys=True)
