"""Lazy difference operators on vector-valued functions of lambda.

A function is an evaluator lambda -> coefficient vector over the zero-weight
basis of a tensor product. Operators compose without sampling; a shift
operator simply evaluates its input at shifted points when forced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .elliptic_core import EllipticParams, elliptic_factorial
from .rmatrix import RProvider, level_basis, pair_matrix
from .weight_functions import MAX_LEVEL


@dataclass(frozen=True)
class FnSpace:
    """Zero-weight space of V_{L_1} (x) ... (x) V_{L_n} (finite factors use L_{L_j})."""

    lambdas: tuple
    params: EllipticParams
    finite: tuple = None

    def __post_init__(self):
        lam = tuple(complex(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        fin = tuple(bool(f) for f in self.finite) if self.finite is not None else (False,) * len(lam)
        if len(fin) != len(lam):
            raise ValueError("finite flags do not match the number of factors")
        for l, f in zip(lam, fin):
            if f and (abs(l.imag) > 0 or abs(l.real - round(l.real)) > 1e-12 or l.real < 0):
                raise ValueError(f"finite factor needs a natural weight, got {l}")
        object.__setattr__(self, "finite", fin)
        s = sum(lam)
        m = round(s.real / 2)
        if abs(s - 2 * m) > 1e-9:
            raise ValueError(f"weights sum to {s}, not an even integer")
        if m > MAX_LEVEL:
            raise ValueError(f"level {m} exceeds the cap {MAX_LEVEL}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "basis", tuple(level_basis(m, self.caps())))

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def caps(self):
        return [round(l.real) if f else None for l, f in zip(self.lambdas, self.finite)]

    def weight(self, state, j) -> complex:
        return self.lambdas[j] - 2 * state[j]

    def provider(self) -> RProvider:
        return RProvider(self.lambdas, self.params, self.finite)

    def permuted(self, perm) -> "FnSpace":
        """Space whose factor i is factor perm[i] of this one."""
        return FnSpace(tuple(self.lambdas[k] for k in perm), self.params,
                       tuple(self.finite[k] for k in perm))

    def reduced_scale(self) -> np.ndarray:
        """[j_1]!...[j_n]! per basis state; reduced coefficients are these times standard ones."""
        cache = {}

        def fact(k):
            if k not in cache:
                cache[k] = elliptic_factorial(k, self.params)
            return cache[k]

        return np.array([np.prod([fact(k) for k in s]) for s in self.basis], dtype=complex)


def _key(lam):
    lam = complex(lam)
    return (round(lam.real, 13), round(lam.imag, 13))


class ZeroWeightFn:
    """Vector-valued function of lambda given by an evaluator, memoised per point."""

    def __init__(self, space: FnSpace, evaluator, basis_kind: str = "standard"):
        if basis_kind not in ("standard", "reduced"):
            raise ValueError(f"unknown basis kind {basis_kind}")
        self.space = space
        self.basis_kind = basis_kind
        self._ev = evaluator
        self._memo = {}

    def __call__(self, lam) -> np.ndarray:
        k = _key(lam)
        if k not in self._memo:
            v = np.asarray(self._ev(complex(lam)), dtype=complex)
            if v.shape != (self.space.dim,):
                raise ValueError(f"evaluator returned shape {v.shape}, expected ({self.space.dim},)")
            self._memo[k] = v
        return self._memo[k]

    def coefficient(self, M, lam) -> complex:
        return complex(self(lam)[self.space.basis.index(tuple(M))])

    def to_reduced(self) -> "ZeroWeightFn":
        if self.basis_kind == "reduced":
            return self
        sc = self.space.reduced_scale()
        return ZeroWeightFn(self.space, lambda lam: sc * self(lam), "reduced")

    def to_standard(self) -> "ZeroWeightFn":
        if self.basis_kind == "standard":
            return self
        sc = self.space.reduced_scale()
        return ZeroWeightFn(self.space, lambda lam: self(lam) / sc, "standard")

    def __add__(self, other):
        _same(self, other)
        return ZeroWeightFn(self.space, lambda lam: self(lam) + other(lam), self.basis_kind)

    def __sub__(self, other):
        _same(self, other)
        return ZeroWeightFn(self.space, lambda lam: self(lam) - other(lam), self.basis_kind)

    def scale(self, c) -> "ZeroWeightFn":
        return ZeroWeightFn(self.space, lambda lam: c * self(lam), self.basis_kind)


def _same(f, g):
    if f.space != g.space or f.basis_kind != g.basis_kind:
        raise ValueError("functions live on different spaces or bases")


@dataclass(frozen=True)
class OperatorOnFn:
    """Linear map between function spaces; ``offsets`` lists the lambda shifts it reads."""

    src: FnSpace
    dst: FnSpace
    transform: object = field(repr=False)
    offsets: frozenset = frozenset({0j})
    label: str = ""

    def __call__(self, f: ZeroWeightFn) -> ZeroWeightFn:
        if f.space != self.src:
            raise ValueError(f"{self.label or 'operator'} applied to a function on the wrong space")
        f = f.to_standard()
        return ZeroWeightFn(self.dst, self.transform(f))

    def __matmul__(self, other: "OperatorOnFn") -> "OperatorOnFn":
        if other.dst != self.src:
            raise ValueError(f"cannot compose {self.label} after {other.label}")
        offs = frozenset(a + b for a in self.offsets for b in other.offsets)
        return OperatorOnFn(other.src, self.dst, lambda f: self.transform(ZeroWeightFn(other.dst, other.transform(f))),
                            offs, f"{self.label}*{other.label}")


def identity(space: FnSpace) -> OperatorOnFn:
    return OperatorOnFn(space, space, lambda f: f, frozenset({0j}), "Id")


def compose(*ops) -> OperatorOnFn:
    """ops[0] @ ops[1] @ ... (the last one acts first)."""
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = op @ out
    return out


def matrix_operator(src: FnSpace, dst: FnSpace, mat_of_lam, label="M") -> OperatorOnFn:
    """g(lambda) = mat_of_lam(lambda) f(lambda)."""
    return OperatorOnFn(src, dst, lambda f: (lambda lam: mat_of_lam(lam) @ f(lam)), frozenset({0j}), label)


def gamma_j(j: int, space: FnSpace) -> OperatorOnFn:
    """(Gamma_j v)_J(lambda) = v_J(lambda - 2 eta mu_j(J)); j is 0-based."""
    eta = space.params.eta
    shifts = np.array([-2 * eta * space.weight(s, j) for s in space.basis])

    def transform(f):
        def ev(lam):
            out = np.empty(space.dim, dtype=complex)
            for i, d in enumerate(shifts):
                out[i] = f(lam + d)[i]
            return out
        return ev

    return OperatorOnFn(space, space, transform, frozenset(complex(d) for d in shifts), f"G{j + 1}")


def permutation_operator(space: FnSpace, perm) -> OperatorOnFn:
    """Relabel factors: output factor i is input factor perm[i]."""
    dst = space.permuted(perm)
    pos = {s: i for i, s in enumerate(space.basis)}
    P = np.zeros((dst.dim, space.dim))
    for r, t in enumerate(dst.basis):
        src_state = [0] * space.n
        for i, k in enumerate(perm):
            src_state[k] = t[i]
        P[r, pos[tuple(src_state)]] = 1.0
    return matrix_operator(space, dst, lambda lam: P, f"P{tuple(perm)}")


def swap_operator(space: FnSpace, j: int) -> OperatorOnFn:
    """P^{(j, j+1)} with j 0-based."""
    perm = list(range(space.n))
    perm[j], perm[j + 1] = perm[j + 1], perm[j]
    return permutation_operator(space, perm)


def reverse_operator(space: FnSpace) -> OperatorOnFn:
    return permutation_operator(space, list(range(space.n))[::-1])


def r_operator(space: FnSpace, j: int, k: int, z, shift_factors, label=None) -> OperatorOnFn:
    """R_{L_j, L_k}(z, lambda - 2 eta sum_{l in shift_factors} h^(l)) acting on factors j, k."""
    eta = space.params.eta
    prov = space.provider()
    shift_factors = tuple(shift_factors)
    if j in shift_factors or k in shift_factors:
        raise ValueError("dynamical shift may only involve bystander factors")

    def mat(lam):
        return pair_matrix(prov, list(space.basis), j, k, z,
                           lambda s: lam - 2 * eta * sum(space.weight(s, l) for l in shift_factors))

    return matrix_operator(space, space, mat, label or f"R{j + 1}{k + 1}")


def _p_of(space, p):
    p = space.params.p if p is None else p
    if p is None:
        raise ValueError("qKZB operators need the step p")
    return complex(p)


def kzb_operator(j: int, z, space: FnSpace, p=None) -> OperatorOnFn:
    """K_j(z) (0-based j): R_{j,j-1}(+p)...R_{j,0}(+p) Gamma_j R_{j,n-1}...R_{j,j+1}."""
    return _ordered_chain(j, z, space, _p_of(space, p))


def h_operator(j: int, z, space: FnSpace) -> OperatorOnFn:
    """H_j(z): the qKZB operator with p = 0."""
    return _ordered_chain(j, z, space, 0.0)


def _ordered_chain(j, z, space, p):
    n = space.n
    z = [complex(x) for x in z]
    left = [r_operator(space, j, k, z[j] - z[k] + p, [l for l in range(k) if l != j]) for k in range(j - 1, -1, -1)]
    right = [r_operator(space, j, k, z[j] - z[k], [l for l in range(k) if l != j]) for k in range(n - 1, j, -1)]
    op = compose(*(left + [gamma_j(j, space)] + right))
    return OperatorOnFn(op.src, op.dst, op.transform, op.offsets, f"K{j + 1}")


def mirror_kzb_operator(j: int, z, space: FnSpace, p=None) -> OperatorOnFn:
    """K_j^v(z) (0-based j): R^v_{j,j+1}(+p)...R^v_{j,n-1}(+p) Gamma_j R^v_{j,0}...R^v_{j,j-1}."""
    p = _p_of(space, p)
    n = space.n
    z = [complex(x) for x in z]
    rv = lambda k, arg: r_operator(space, j, k, arg, [l for l in range(k + 1, n) if l != j])
    left = [rv(k, z[j] - z[k] + p) for k in range(j + 1, n)]
    right = [rv(k, z[j] - z[k]) for k in range(j)]
    op = compose(*(left + [gamma_j(j, space)] + right))
    return OperatorOnFn(op.src, op.dst, op.transform, op.offsets, f"Kv{j + 1}")


def s_operator(j: int, z, space: FnSpace) -> OperatorOnFn:
    """s_j(z) = P^{(j,j+1)} R_{L_j, L_{j+1}}(z, lambda - 2 eta sum_{l<j} h^(l)); j is 0-based.

    Maps functions on ``space`` to functions on the space with factors j, j+1 swapped.
    """
    R = r_operator(space, j, j + 1, z, list(range(j)), f"R{j + 1}{j + 2}")
    op = swap_operator(space, j) @ R
    return OperatorOnFn(op.src, op.dst, op.transform, op.offsets, f"s{j + 1}")


def delta_operator(space: FnSpace) -> OperatorOnFn:
    """Delta = Gamma_1 P^{(12)} P^{(23)} ... P^{(n-1,n)}: moves the last factor first, then shifts it."""
    n = space.n
    perm = [n - 1] + list(range(n - 1))
    P = permutation_operator(space, perm)
    op = gamma_j(0, P.dst) @ P
    return OperatorOnFn(op.src, op.dst, op.transform, op.offsets, "Delta")


def s_chain_kzb(j: int, z, space: FnSpace, p=None) -> OperatorOnFn:
    """K_j rebuilt as s_{j-1}(z_j-z_{j-1}+p)...s_1(z_j-z_1+p) Delta s_{n-1}(z_j-z_n)...s_j(z_j-z_{j+1})."""
    p = _p_of(space, p)
    n = space.n
    z = [complex(x) for x in z]
    ops = []
    cur = space
    # factor j travels to the end, one swap at a time
    for k in range(j, n - 1):
        op = s_operator(k, z[j] - z[k + 1], cur)
        ops.append(op)
        cur = op.dst
    d = delta_operator(cur)
    ops.append(d)
    cur = d.dst
    for k in range(0, j):
        op = s_operator(k, z[j] - z[k] + p, cur)
        ops.append(op)
        cur = op.dst
    return compose(*reversed(ops))


def weyl_reflection(space: FnSpace) -> OperatorOnFn:
    """(S f)(lambda) = (s (x) ... (x) s) f(-lambda), s E_j = E_{L-j} in the reduced basis."""
    if not all(space.finite):
        raise ValueError("the Weyl reflection acts on finite-dimensional factors only")
    caps = space.caps()
    pos = {s: i for i, s in enumerate(space.basis)}
    fact = {k: elliptic_factorial(k, space.params) for k in range(max(caps) + 1)}
    W = np.zeros((space.dim, space.dim), dtype=complex)
    for c, s in enumerate(space.basis):
        t = tuple(L - k for L, k in zip(caps, s))
        # s e_k = ([k]!/[L-k]!) e_{L-k}
        W[pos[t], c] = np.prod([fact[k] / fact[L - k] for L, k in zip(caps, s)])

    def transform(f):
        return lambda lam: W @ f(-lam)

    return OperatorOnFn(space, space, transform, frozenset({0j}), "S")


def random_test_function(space: FnSpace, seed: int, degree: int = 2, amplitude: float = 1.0) -> ZeroWeightFn:
    """Seeded sum_J sum_{|k|<=degree} c_{J,k} e^{2 pi i k lambda} e_J."""
    rng = np.random.default_rng(seed)
    c = amplitude * (rng.standard_normal((space.dim, 2 * degree + 1))
                     + 1j * rng.standard_normal((space.dim, 2 * degree + 1))) / np.sqrt(2)
    ks = np.arange(-degree, degree + 1)

    def ev(lam):
        return c @ np.exp(2j * np.pi * ks * lam)

    return ZeroWeightFn(space, ev)


def operator_residual(A: OperatorOnFn, B: OperatorOnFn, fns, lams) -> float:
    """max over test functions and points of |A f - B f| / (1 + |B f|)."""
    worst = 0.0
    for f in fns:
        af, bf = A(f), B(f)
        for lam in lams:
            x, y = af(lam), bf(lam)
            worst = max(worst, float(np.abs(x - y).max() / (1.0 + np.abs(y).max())))
    return worst


def shifted(z, j, p):
    z = [complex(x) for x in z]
    z[j] += p
    return z


def compatibility_residual(j: int, l: int, z, space: FnSpace, fns, lams, p=None) -> float:
    """K_j(z + p d_l) K_l(z) against K_l(z + p d_j) K_j(z)."""
    p = _p_of(space, p)
    lhs = kzb_operator(j, shifted(z, l, p), space, p) @ kzb_operator(l, z, space, p)
    rhs = kzb_operator(l, shifted(z, j, p), space, p) @ kzb_operator(j, z, space, p)
    return operator_residual(lhs, rhs, fns, lams)


# resonance conditions ------------------------------------------------------

def resonance_pairs(space: FnSpace, which: int):
    """Yield (M, L, a, b, k) for condition C_which (1-based; which = n is the cyclic one)."""
    n, m = space.n, space.m
    basis = set(space.basis)
    if not 1 <= which <= n:
        raise ValueError(f"condition index must be in 1..{n}")
    for M in space.basis:
        if which < n:
            j = which - 1
            a, k = M[j], M[j] + M[j + 1]
            for b in range(k + 1):
                if b == a:
                    continue
                L = list(M)
                L[j], L[j + 1] = b, k - b
                L = tuple(L)
                if L in basis:
                    yield M, L, a, b, k
        else:
            a, k = M[-1], M[0] + M[-1]
            for b in range(k + 1):
                if b == a:
                    continue
                L = list(M)
                L[0], L[-1] = k - b, b
                L = tuple(L)
                if L in basis:
                    yield M, L, a, b, k


def resonance_points(space: FnSpace, which: int, M, a, b, z, r=0, s=0, p=None):
    """(lambda_M, lambda_L, phase_a, phase_b) of a C_which relation."""
    par = space.params
    eta, tau = par.eta, par.tau
    lams = space.lambdas
    n = space.n
    base = r + s * tau
    if which < n:
        j = which - 1
        acc = sum(lams[l] - 2 * M[l] for l in range(j))
        x = base + 2 * eta * (lams[j] - a - b + acc)
        ph = z[j + 1] - z[j] + eta * (lams[j + 1] + lams[j])
        lm = ll = x
    else:
        pp = 0.0 if s == 0 else _p_of(space, p)
        ph = z[0] - z[-1] + eta * (lams[0] + lams[-1]) - pp
        lm = base + 2 * eta * (a - b)
        ll = base + 2 * eta * (b - a)
    return lm, ll, np.exp(2j * np.pi * s * a * ph), np.exp(2j * np.pi * s * b * ph)


def resonance_condition_residual(u: ZeroWeightFn, which: int, z, r: int = 0, s: int = 0,
                                 p=None, relative: bool = False) -> float:
    """Max violation of condition C_which (1-based) for u in the standard basis.

    [a]![k-a]! e^{2 pi i s a phi} u_M(lambda_M) = [b]![k-b]! e^{2 pi i s b phi} u_L(lambda_L).
    """
    space = u.space
    u = u.to_standard()
    par = space.params
    z = [complex(x) for x in z]
    pos = {st: i for i, st in enumerate(space.basis)}
    worst = 0.0
    for M, L, a, b, k in resonance_pairs(space, which):
        lm, ll, pa, pb = resonance_points(space, which, M, a, b, z, r, s, p)
        lhs = elliptic_factorial(a, par) * elliptic_factorial(k - a, par) * pa * u(lm)[pos[M]]
        rhs = elliptic_factorial(b, par) * elliptic_factorial(k - b, par) * pb * u(ll)[pos[L]]
        d = abs(lhs - rhs)
        if relative:
            d /= max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, float(d))
    return worst


# transformation ledger -----------------------------------------------------

def transformation(M, k: int, j: int, lambdas):
    """Apply T_j(k) (1-based j) to the index M at level k.

    Returns (L, level of the image point) or None when T_j(k) does not apply.
    The image point is 2 eta k for j < n and -2 eta k for j = n.
    """
    M = tuple(int(x) for x in M)
    lam = [round(complex(x).real) for x in lambdas]
    n = len(M)
    if j < n:
        i = j - 1
        acc = sum(lam[l] - 2 * M[l] for l in range(i))
        a = acc + lam[i] - M[i] - k
        if not (0 <= a <= M[i] + M[i + 1]) or a == M[i]:
            return None
        L = list(M)
        L[i], L[i + 1] = a, M[i] + M[i + 1] - a
        return tuple(L), k
    a = M[-1] - k
    if not (0 <= a <= M[-1] + M[0]) or a == M[-1]:
        return None
    L = list(M)
    L[0], L[-1] = M[0] + k, M[-1] - k
    return tuple(L), -k


def all_permutation_spaces(space: FnSpace):
    """Every reordering of the factors (used to probe permutation covariance)."""
    return [space.permuted(p) for p in permutations(range(space.n))]
