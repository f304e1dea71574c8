"""Bethe ansatz equations, a continuation solver and the resulting eigenfunctions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .elliptic_core import EllipticParams, PoleError, theta, theta_log_derivative
from .fusion import dual_index, vanishing_support
from .qkzb_ops import FnSpace, ZeroWeightFn, weyl_reflection
from .weight_functions import ModelParams, omega

VARIANTS = ("h", "transfer", "irf")
SOLVER_TOL = 1e-11
SEED = 20240917


class SolverError(RuntimeError):
    """Newton/continuation failure; ``trace`` holds the steps taken."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


@dataclass(frozen=True)
class BetheProblem:
    """One of the three Bethe systems for m roots.

    variant "h": prod_l th(t-z_l+eta L_l)/th(t-z_l-eta L_l) prod_k th(t_j-t_k-2eta)/th(t_j-t_k+2eta) = e^{-4 eta c}
    variant "transfer": prod_k th(t_k-t_j-2eta)/th(t_k-t_j+2eta)
                        prod_l th(t_j-z_l-(1+L_l)eta)/th(t_j-z_l-(1-L_l)eta) = e^{4 eta c}
    variant "irf": the "h" system with every L_l = 1.
    """

    variant: str
    model: ModelParams
    c: complex = 0j
    m: int = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant}")
        if self.variant == "irf" and any(abs(l - 1) > 0 for l in self.model.lambdas):
            raise ValueError("the irf variant needs all weights equal to 1")
        object.__setattr__(self, "c", complex(self.c))
        if self.m is None:
            object.__setattr__(self, "m", self.model.zero_weight_level())
        if self.m < 0:
            raise ValueError("number of roots must be non-negative")

    @property
    def params(self) -> EllipticParams:
        return self.model.params

    def site_shifts(self):
        """(A_l, B_l, sigma, log rhs): F_j = sum_l [lt(t-z_l+A_l) - lt(t-z_l+B_l)] + sigma*cross - log rhs."""
        eta = self.params.eta
        L = np.array(self.model.lambdas)
        if self.variant == "transfer":
            return -(1 + L) * eta, -(1 - L) * eta, -1.0, 4 * eta * self.c
        return eta * L, -eta * L, 1.0, -4 * eta * self.c


@dataclass
class BetheSolution:
    problem: BetheProblem
    roots: np.ndarray
    residual: float
    trace: list = field(default_factory=list)

    def to_json(self) -> str:
        p = self.problem
        pair = lambda x: [float(complex(x).real), float(complex(x).imag)]
        d = {
            "variant": p.variant,
            "tau": pair(p.params.tau),
            "eta": pair(p.params.eta),
            "c": pair(p.c),
            "z": [pair(x) for x in p.model.z],
            "lambdas": [pair(x) for x in p.model.lambdas],
            "roots": [pair(x) for x in self.roots],
            "residual": float(self.residual),
        }
        return json.dumps(d, sort_keys=True)


def _wrap(x):
    # imaginary part into (-pi, pi]
    return x.real + 1j * (np.pi - np.mod(np.pi - x.imag, 2 * np.pi))


def _log_ratio(num, den, params):
    a, b = theta(num, params), theta(den, params)
    if np.any(np.abs(a) < 1e-300) or np.any(np.abs(b) < 1e-14):
        raise PoleError("Bethe equation evaluated at a lattice zero")
    return np.log(a) - np.log(b)


def bae_residual(problem: BetheProblem, t, params: EllipticParams | None = None) -> np.ndarray:
    """Per-root log(LHS) - log(RHS), imaginary part wrapped into (-pi, pi]."""
    par = params or problem.params
    t = np.asarray(t, dtype=complex).ravel()
    if t.size != problem.m:
        raise ValueError(f"need {problem.m} roots, got {t.size}")
    if t.size == 0:
        return np.zeros(0, dtype=complex)
    A, B, sigma, log_rhs = problem.site_shifts()
    eta = par.eta
    z = np.array(problem.model.z)
    dz = t[:, None] - z[None, :]
    F = _log_ratio(dz + A[None, :], dz + B[None, :], par).sum(axis=1)
    dt = t[:, None] - t[None, :]
    off = ~np.eye(t.size, dtype=bool)
    if t.size > 1:
        cross = np.zeros_like(dt)
        cross[off] = _log_ratio(dt[off] - 2 * eta, dt[off] + 2 * eta, par)
        F = F + sigma * cross.sum(axis=1)
    return _wrap(F - log_rhs)


def bae_jacobian(problem: BetheProblem, t, params: EllipticParams | None = None) -> np.ndarray:
    par = params or problem.params
    t = np.asarray(t, dtype=complex).ravel()
    A, B, sigma, _ = problem.site_shifts()
    eta = par.eta
    z = np.array(problem.model.z)
    dz = t[:, None] - z[None, :]
    diag = (theta_log_derivative(dz + A[None, :], par) - theta_log_derivative(dz + B[None, :], par)).sum(axis=1)
    J = np.diag(diag).astype(complex)
    m = t.size
    for j in range(m):
        for k in range(m):
            if j == k:
                continue
            d = t[j] - t[k]
            g = theta_log_derivative(d - 2 * eta, par) - theta_log_derivative(d + 2 * eta, par)
            J[j, j] += sigma * g
            J[j, k] -= sigma * g
    return J


def _newton(problem, t, par, tol, max_iter=60):
    trace = []
    for it in range(max_iter):
        F = bae_residual(problem, t, par)
        r = float(np.abs(F).max())
        trace.append(r)
        if r < tol:
            return t, r, trace
        J = bae_jacobian(problem, t, par)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise SolverError("singular Jacobian", trace)
        # damp long steps; theta ratios are only locally single-valued
        s = np.abs(step).max()
        if s > 0.1:
            step *= 0.1 / s
        t = t + step
    raise SolverError(f"Newton did not converge (residual {trace[-1]:.2e})", trace)


def _polish(problem, t, par, extra=3):
    # a few undamped steps past the stopping tolerance; keep the best iterate
    best_t, best_r = t, float(np.abs(bae_residual(problem, t, par)).max())
    for _ in range(extra):
        try:
            t = t + np.linalg.solve(bae_jacobian(problem, t, par), -bae_residual(problem, t, par))
        except np.linalg.LinAlgError:
            break
        r = float(np.abs(bae_residual(problem, t, par)).max())
        if r < best_r:
            best_t, best_r = t, r
    return best_t


def _canonical(t):
    t = np.asarray(t, dtype=complex)
    t = t - np.round(t.real)  # omega and the equations are 1-periodic in each root
    return np.array(sorted(t, key=lambda x: (round(x.real, 9), round(x.imag, 9))))


def _valid(problem, t, par, sep=1e-6):
    t = np.asarray(t)
    for i in range(t.size):
        for j in range(i + 1, t.size):
            if abs(theta(t[i] - t[j], par)) < sep:
                return False
    A, B, _, _ = problem.site_shifts()
    z = np.array(problem.model.z)
    dz = t[:, None] - z[None, :]
    return bool(np.abs(theta(dz + B[None, :], par)).min() > sep and np.abs(theta(dz + A[None, :], par)).min() > sep)


def default_seeds(problem: BetheProblem, count: int = 24, seed: int = SEED) -> list:
    """Equally spaced trigonometric seeds around the mean site, then seeded random ones."""
    m = problem.m
    z0 = np.mean(problem.model.z)
    out = []
    for off in (0.0, 0.25, 0.5):
        for im in (0.1, -0.1, 0.3, 0.02):
            out.append(z0 + off + (np.arange(m) - (m - 1) / 2) / max(m, 1) * 0.5 + 1j * im * (np.arange(m) + 1) / m)
    rng = np.random.default_rng(seed)
    while len(out) < count:
        out.append(z0 + rng.uniform(-0.5, 0.5, m) + 1j * rng.uniform(-0.4, 0.4, m))
    return out


def solve_bae(problem: BetheProblem, seeds=None, steps: int = 16, start_imag: float = 4.0,
              tol: float = SOLVER_TOL, all_solutions: bool = False):
    """Log-Newton with continuation from the trigonometric limit.

    Each seed is first solved at Im(tau) = ``start_imag`` (q ~ 0, where theta is
    a sine up to a constant) and then carried to the target tau in ``steps``
    moves, halving a move when Newton fails. Returns the first valid solution,
    or every distinct one with ``all_solutions``.
    """
    if problem.m == 0:
        sol = BetheSolution(problem, np.zeros(0, dtype=complex), 0.0)
        return [sol] if all_solutions else sol
    par = problem.params
    tau = par.tau
    start = complex(tau.real, max(start_imag, tau.imag))
    seeds = default_seeds(problem) if seeds is None else [np.asarray(s, dtype=complex) for s in seeds]
    found, failures = [], []
    for s0 in seeds:
        s0 = np.asarray(s0, dtype=complex)
        if s0.size != problem.m:
            raise ValueError("seed has the wrong number of roots")
        if len(set(np.round(s0, 12))) < s0.size:
            failures.append("colliding seed rejected")
            continue
        trace = []
        try:
            t, r, tr = _newton(problem, s0, par.with_(tau=start), 1e-9)
            trace.append(("start", start, r))
            x, h = 0.0, 1.0 / steps
            while x < 1.0:
                h = min(h, 1.0 - x)
                tau_x = start + (x + h) * (tau - start)
                try:
                    t_new, r, _ = _newton(problem, t, par.with_(tau=tau_x), 1e-9, 40)
                except SolverError:
                    h /= 2
                    if h < 1e-4:
                        raise SolverError("continuation step collapsed", trace)
                    continue
                if np.abs(t_new - t).max() > 0.2:
                    h /= 2  # root jumped to another branch
                    if h < 1e-4:
                        raise SolverError("continuation step collapsed", trace)
                    continue
                t, x = t_new, x + h
                trace.append(("step", tau_x, r))
                h = min(2 * h, 1.0 / steps)
            t, r, _ = _newton(problem, t, par, tol)
        except (SolverError, PoleError, FloatingPointError) as e:
            failures.append(str(e))
            continue
        if not _valid(problem, t, par):
            failures.append("degenerate solution")
            continue
        t = _canonical(_polish(problem, t, par))
        r = float(np.abs(bae_residual(problem, t)).max())
        if r >= tol:
            failures.append(f"residual {r:.2e} after canonicalisation")
            continue
        sol = BetheSolution(problem, t, r, trace)
        if not all_solutions:
            return sol
        if not any(np.abs(sol.roots - f.roots).max() < 1e-7 for f in found):
            found.append(sol)
    if all_solutions and found:
        return found
    raise SolverError(f"no seed converged ({len(failures)} failures)", failures)


# eigenfunctions -------------------------------------------------------------

def _space_of(model: ModelParams, finite):
    if finite is None:
        natural = all(l.imag == 0 and l.real == round(l.real) and l.real > 0 for l in model.lambdas)
        finite = (True,) * model.n if natural else None
    return FnSpace(model.lambdas, model.params, finite)


def eigenfunction_h(solution: BetheSolution, model: ModelParams | None = None, c=None,
                    finite=None) -> ZeroWeightFn:
    """psi(lambda) = e^{c lambda} sum_J omega_J(t, z, lambda) e_J.

    With natural weights the finite-dimensional projection is used by default
    (only admissible J are kept).
    """
    model = model or solution.problem.model
    c = solution.problem.c if c is None else complex(c)
    space = _space_of(model, finite)
    t = solution.roots

    def ev(lam):
        return np.exp(c * lam) * np.array([omega(J, t, lam, model) for J in space.basis])

    return ZeroWeightFn(space, ev)


def eigenfunction_transfer(solution: BetheSolution, model: ModelParams | None = None, c=None,
                           finite=None) -> ZeroWeightFn:
    """b(t_1)...b(t_m) v_c written through mirror weight functions at t - eta.

    psi = e^{c(lambda + 2 eta m)} (-1)^m prod_{i<j} th(s_i-s_j+2eta)/th(s_i-s_j) sum_J mirror omega_J(s) e_J,
    s_j = t_j - eta.
    """
    model = model or solution.problem.model
    par = model.params
    eta = par.eta
    c = solution.problem.c if c is None else complex(c)
    space = _space_of(model, finite)
    s = solution.roots - eta
    m = s.size
    pref = (-1) ** m
    for i in range(m):
        for j in range(i + 1, m):
            pref *= theta(s[i] - s[j] + 2 * eta, par) / theta(s[i] - s[j], par)

    def ev(lam):
        return np.exp(c * (lam + 2 * eta * m)) * pref * np.array(
            [omega(J, s, lam, model, mirror=True) for J in space.basis])

    return ZeroWeightFn(space, ev)


def eigenvalues_h(solution: BetheSolution, model: ModelParams | None = None, c=None) -> np.ndarray:
    """eps_j = e^{-2 c eta L_j} prod_k th(t_k - z_j - eta L_j)/th(t_k - z_j + eta L_j)."""
    model = model or solution.problem.model
    par = model.params
    eta = par.eta
    c = solution.problem.c if c is None else complex(c)
    t = solution.roots
    out = []
    for zj, Lj in zip(model.z, model.lambdas):
        e = np.exp(-2 * c * eta * Lj)
        for tk in t:
            e *= theta(tk - zj - eta * Lj, par) / theta(tk - zj + eta * Lj, par)
        out.append(complex(e))
    return np.array(out)


def eigenvalue_transfer(solution: BetheSolution, w, model: ModelParams | None = None, c=None) -> complex:
    """Transfer-matrix eigenvalue for roots of the "transfer" system."""
    model = model or solution.problem.model
    par = model.params
    eta = par.eta
    c = solution.problem.c if c is None else complex(c)
    t = solution.roots
    first = np.exp(-2 * eta * c) * np.prod([theta(tj - w - 2 * eta, par) / theta(tj - w, par) for tj in t])
    second = np.exp(2 * eta * c) * np.prod([theta(tj - w + 2 * eta, par) / theta(tj - w, par) for tj in t])
    for zk, Lk in zip(model.z, model.lambdas):
        second *= theta(w - zk - (1 - Lk) * eta, par) / theta(w - zk - (1 + Lk) * eta, par)
    return complex(first + second)


def eigenvalue_irf(solution: BetheSolution, w, model: ModelParams | None = None, c=None) -> complex:
    """Transfer-matrix eigenvalue for roots of the "irf" system (all weights 1)."""
    model = model or solution.problem.model
    par = model.params
    eta = par.eta
    c = solution.problem.c if c is None else complex(c)
    t = solution.roots
    first = np.exp(-2 * eta * c) * np.prod([theta(tj - w - eta, par) / theta(tj - w + eta, par) for tj in t])
    second = np.exp(2 * eta * c) * np.prod([theta(tj - w + 3 * eta, par) / theta(tj - w + eta, par) for tj in t])
    for zk in model.z:
        second *= theta(w - zk, par) / theta(w - zk - 2 * eta, par)
    return complex(first + second)


def normalized(psi: ZeroWeightFn, ref_lam) -> ZeroWeightFn:
    """Rescale so that the largest coefficient at ``ref_lam`` equals 1."""
    v = psi(ref_lam)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        raise ValueError("function vanishes at the reference point")
    return psi.scale(1.0 / v[k])


def antisymmetrize(psi: ZeroWeightFn) -> ZeroWeightFn:
    """A psi = psi - S psi."""
    S = weyl_reflection(psi.space)
    return psi - S(psi)


def antisymmetric_ratio(psi: ZeroWeightFn, lams) -> float:
    """max |A psi| / max |psi| over ``lams``; near zero when S psi = psi."""
    apsi = antisymmetrize(psi)
    num = max(float(np.abs(apsi(x)).max()) for x in lams)
    den = max(float(np.abs(psi(x)).max()) for x in lams)
    return num / den


def antisymmetric_states(model: ModelParams, variant: str = "irf", cs=(0, 1j * np.pi),
                         rel: float = 1e-6, grid_size: int = 6):
    """Solve every listed twist c and keep the solutions whose A psi is not identically zero.

    Returns [(solution, psi)] in solver order; psi comes from ordinary weight
    functions for "h"/"irf" and from mirror ones for "transfer".
    """
    grid = lambda_grid(model.params, grid_size)
    out, failures = [], []
    for c in cs:
        try:
            sols = solve_bae(BetheProblem(variant, model, c), all_solutions=True)
        except SolverError as e:
            failures.extend(e.trace)
            continue
        for sol in sols:
            psi = eigenfunction_transfer(sol) if variant == "transfer" else eigenfunction_h(sol)
            if antisymmetric_ratio(psi, grid) > rel:
                out.append((sol, psi))
    if not out and failures:
        raise SolverError("no twist produced a solution", failures)
    return out


def lambda_grid(params: EllipticParams, count: int = 20, margin: float = 0.03, seed: int = SEED) -> list:
    """Deterministic points at distance >= margin from 2 eta Z + Z + tau Z."""
    rng = np.random.default_rng(seed)
    eta, tau = params.eta, params.tau
    out = []
    while len(out) < count:
        lam = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.45, 0.45) * tau.imag)
        ok = True
        for k in range(-12, 13):
            for s in (-1, 0, 1):
                d = lam - 2 * eta * k - s * tau
                if abs(d - round(d.real)) < margin:
                    ok = False
        if ok:
            out.append(lam)
    return out


def eigen_residual(op, psi: ZeroWeightFn, eps, lams) -> float:
    """max_lambda |op psi - eps psi| / max|psi|."""
    out = op(psi)
    worst = 0.0
    for lam in lams:
        v = psi(lam)
        worst = max(worst, float(np.abs(out(lam) - eps * v).max() / max(np.abs(v).max(), 1e-300)))
    return worst


# resonance relations and vanishing --------------------------------------------

def resonance_residual_eigen(psi: ZeroWeightFn, mirror: bool = False) -> float:
    """Relations between reduced coefficients of a Bethe eigenfunction.

    Ordinary weight functions: for each j < n, psi_M = psi_L at
    2 eta (L_j - a - b + sum_{l<j}(L_l - 2 m_l)) with M, L = (.., a, k-a, ..), (.., b, k-b, ..)
    at positions j, j+1; and psi_M(2 eta (a-b)) = psi_L(2 eta (b-a)) for
    M = (k-a, .., a), L = (k-b, .., b).
    Mirror weight functions: pairs sit at positions j-1, j with the sum over l > j,
    and the cyclic relation uses M = (a, .., k-a).
    Returns the largest absolute violation relative to max|psi| at the points used.
    """
    space = psi.space
    u = psi.to_reduced()
    eta = space.params.eta
    lams = space.lambdas
    n = space.n
    pos = {s: i for i, s in enumerate(space.basis)}
    worst, scale = 0.0, 0.0
    for M in space.basis:
        for j in range(n - 1):
            # pair of positions (j, j+1); first entry of the pair is a
            if mirror:
                a, k = M[j + 1], M[j] + M[j + 1]
                acc = sum(lams[l] - 2 * M[l] for l in range(j + 2, n))
                lj = lams[j + 1]
            else:
                a, k = M[j], M[j] + M[j + 1]
                acc = sum(lams[l] - 2 * M[l] for l in range(j))
                lj = lams[j]
            for b in range(k + 1):
                if b == a:
                    continue
                L = list(M)
                if mirror:
                    L[j], L[j + 1] = k - b, b
                else:
                    L[j], L[j + 1] = b, k - b
                L = tuple(L)
                if L not in pos:
                    continue
                x = 2 * eta * (lj - a - b + acc)
                va, vb = u(x)[pos[M]], u(x)[pos[L]]
                worst = max(worst, abs(va - vb))
                scale = max(scale, abs(va), abs(vb))
        if n > 1:
            if mirror:
                a, k = M[0], M[0] + M[-1]
            else:
                a, k = M[-1], M[0] + M[-1]
            for b in range(k + 1):
                if b == a:
                    continue
                L = list(M)
                if mirror:
                    L[0], L[-1] = b, k - b
                else:
                    L[0], L[-1] = k - b, b
                L = tuple(L)
                if L not in pos:
                    continue
                va, vb = u(2 * eta * (a - b))[pos[M]], u(2 * eta * (b - a))[pos[L]]
                worst = max(worst, abs(va - vb))
                scale = max(scale, abs(va), abs(vb))
    return float(worst / max(scale, 1e-300))


def dual_relation_residual(psi: ZeroWeightFn, ks) -> float:
    """max |psi_M(2 eta k) - psi_{s(M)}(-2 eta k)| (reduced coefficients) over k in ``ks``."""
    space = psi.space
    u = psi.to_reduced()
    eta = space.params.eta
    caps = space.caps()
    pos = {s: i for i, s in enumerate(space.basis)}
    worst, scale = 0.0, 0.0
    for M in space.basis:
        sM = dual_index(M, caps)
        for k in ks:
            va, vb = u(2 * eta * k)[pos[M]], u(-2 * eta * k)[pos[sM]]
            worst, scale = max(worst, abs(va - vb)), max(scale, abs(va), abs(vb))
    return float(worst / max(scale, 1e-300))


@dataclass(frozen=True)
class VanishingRow:
    M: tuple
    k: int
    value: float
    forced: bool


def vanishing_report(apsi: ZeroWeightFn, kind: str = "ordinary", N: int | None = None, k_range=None):
    """Evaluate |A psi_M(2 eta k)| (reduced coefficients) and flag the entries forced to vanish.

    Returns (rows, max over forced entries, min over unforced entries).
    """
    space = apsi.space
    u = apsi.to_reduced()
    eta = space.params.eta
    caps = space.caps()
    if k_range is None:
        k_range = range(N) if N is not None else range(-space.m - 1, space.m + 2)
    rows = []
    for k in k_range:
        v = u(2 * eta * k)
        for i, M in enumerate(space.basis):
            rows.append(VanishingRow(M, k, float(abs(v[i])), vanishing_support(M, caps, kind, k, N)))
    forced = [r.value for r in rows if r.forced]
    free = [r.value for r in rows if not r.forced]
    return rows, (max(forced) if forced else 0.0), (min(free) if free else float("inf"))
