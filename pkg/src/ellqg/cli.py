"""Command line front end.

Every command prints one JSON document. Keys are sorted and complex numbers
are [re, im] pairs, so two runs with the same configuration and seed produce
the same bytes apart from ``meta.timestamp``.

Exit codes: 0 pass, 2 a residual above tolerance, 3 solver failure,
4 invalid configuration.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__
from .elliptic_core import EllipticParams, PoleError

EXIT_OK, EXIT_TOL, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4
TOL_ENV = "ELLQG_TOL"
DEFAULT_TOL = 1e-8
SUITES = ("theta", "rmatrix", "qkzb", "fusion", "bethe", "irf")


class ConfigError(ValueError):
    pass


def parse_complex(x) -> complex:
    """Accepts numbers, [re, im] pairs and strings such as '0.2+0.8i'."""
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"expected [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float, complex)):
        return complex(x)
    s = str(x).strip().replace(" ", "").replace("i", "j")
    if s in ("j", "+j"):
        return 1j
    if s == "-j":
        return -1j
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"cannot read {x!r} as a complex number") from None


def pair(x) -> list:
    x = complex(x)
    return [float(x.real), float(x.imag)]


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ConfigError(f"{TOL_ENV}={raw!r} is not a number") from None
    if tol <= 0:
        raise ConfigError(f"{TOL_ENV} must be positive")
    return tol


@dataclass
class RunConfig:
    command: str = "verify"
    tau: complex = 1j
    eta: complex | None = None
    p: complex | None = None
    N: int | None = None
    n: int | None = None
    lambdas: tuple | None = None
    z: tuple | None = None
    c: complex = 0j
    tol: float | None = None
    seed: int = 7
    output: str | None = None
    suite: str = "all"
    w: complex = 0.3 + 0j
    w2: complex | None = None
    L1: complex = 1 + 0j
    L2: complex = 1 + 0j
    m: int | None = None
    lam: complex = 0.23 + 0.11j
    variant: str = "h"
    extra: dict = field(default_factory=dict)

    @classmethod
    def merged(cls, command, file_values: dict, flags: dict) -> "RunConfig":
        """File values first, then command-line flags that were actually given."""
        names = {f.name for f in fields(cls)}
        unknown = set(file_values) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(file_values)
        d.update({k: v for k, v in flags.items() if v is not None})
        d["command"] = command
        cfg = cls(**d)
        cfg.normalise()
        return cfg

    def normalise(self):
        self.tau = parse_complex(self.tau)
        if self.tau.imag <= 0:
            raise ConfigError("Im(tau) must be positive")
        self.c = parse_complex(self.c)
        self.w = parse_complex(self.w)
        self.lam = parse_complex(self.lam)
        self.L1, self.L2 = parse_complex(self.L1), parse_complex(self.L2)
        if self.w2 is not None:
            self.w2 = parse_complex(self.w2)
        if self.p is not None:
            self.p = parse_complex(self.p)
            if self.p.imag <= 0:
                raise ConfigError("Im(p) must be positive")
        if self.N is not None and int(self.N) < 2:
            raise ConfigError("N must be at least 2")
        if self.N is not None:
            self.N = int(self.N)
            root = 1.0 / (2 * self.N)
            if self.eta is None:
                self.eta = complex(root)
            elif abs(parse_complex(self.eta) - root) > 1e-14:
                raise ConfigError(f"eta must equal 1/(2N) = {root} when N is given")
        self.eta = parse_complex(0.125 if self.eta is None else self.eta)
        if self.tol is None:
            self.tol = default_tol()
        self.tol = float(self.tol)
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if isinstance(self.lambdas, str):
            self.lambdas = tuple(s for s in self.lambdas.split(",") if s)
        if isinstance(self.z, str):
            self.z = tuple(s for s in self.z.split(",") if s)
        if self.lambdas is not None:
            self.lambdas = tuple(parse_complex(x) for x in self.lambdas)
        if self.z is not None:
            self.z = tuple(parse_complex(x) for x in self.z)
        if self.n is not None:
            self.n = int(self.n)
            if self.n < 1:
                raise ConfigError("n must be positive")
        self.seed = int(self.seed)

    def params(self) -> EllipticParams:
        return EllipticParams(self.tau, self.eta, self.p)

    def sites(self, n: int) -> tuple:
        """Given z, or seeded distinct points near 0 when absent."""
        if self.z is not None:
            if len(self.z) != n:
                raise ConfigError(f"expected {n} evaluation points, got {len(self.z)}")
            return self.z
        rng = np.random.default_rng(self.seed)
        base = np.linspace(-0.3, 0.3, n) if n > 1 else np.zeros(1)
        return tuple(complex(x) for x in base + 0.04 * rng.standard_normal(n) + 0.04j * rng.standard_normal(n))

    def weights(self, n: int) -> tuple:
        if self.lambdas is None:
            return (1 + 0j,) * n
        if len(self.lambdas) != n:
            raise ConfigError(f"expected {n} weights, got {len(self.lambdas)}")
        return self.lambdas

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        for k, v in d.items():
            if isinstance(v, complex):
                d[k] = pair(v)
            elif isinstance(v, tuple):
                d[k] = [pair(x) for x in v]
        return d


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def emit(cfg: RunConfig, result: dict, status: int) -> int:
    doc = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "meta": {"timestamp": datetime.now(timezone.utc).isoformat(), "version": __version__},
        "result": result,
        "status": status,
    }
    text = json.dumps(doc, sort_keys=True, indent=1)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    return status


def _checks_status(checks) -> int:
    return EXIT_OK if all(c["residual"] <= c["tol"] for c in checks) else EXIT_TOL


def _check(name, residual, tol) -> dict:
    return {"name": name, "residual": float(residual), "tol": float(tol), "pass": bool(residual <= tol)}


# verify suites -------------------------------------------------------------

def _suite_theta(cfg, rng):
    from .elliptic_core import theta, theta_product, theta_quasi_check

    par = cfg.params()
    t = rng.uniform(-0.5, 0.5, 30) + 1j * rng.uniform(-0.4, 0.4, 30) * par.tau.imag
    return [
        _check("series vs product", np.abs(theta(t, par) - theta_product(t, par)).max(), 1e-10),
        _check("oddness", np.abs(theta(-t, par) + theta(t, par)).max(), 1e-10),
        _check("quasi-periodicity", max(theta_quasi_check(x, par) for x in t), 1e-10),
    ]


def _suite_rmatrix(cfg, rng):
    from .rmatrix import build_rmatrix, dybe_residual, fundamental_r, unitarity_residual

    par = cfg.params()
    out = []
    worst_f = worst_d = worst_u = 0.0
    for _ in range(3):
        z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.2))
        w = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.2))
        lam = complex(rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3))
        R = build_rmatrix(1, 1, z, lam, 1, par)
        F = fundamental_r(z, lam, par)[1:3, 1:3]
        worst_f = max(worst_f, float(np.abs(R.entries - F).max()))
        worst_d = max(worst_d, dybe_residual(1, 1, 1, z, w, lam, par, m=1, finite=True))
        worst_u = max(worst_u, unitarity_residual(1, 1, z, lam, 1, par))
    out.append(_check("geometric vs fundamental", worst_f, 1e-10))
    out.append(_check("dynamical Yang-Baxter", worst_d, 1e-9))
    out.append(_check("unitarity", worst_u, 1e-9))
    return out


def _suite_qkzb(cfg, rng):
    from .qkzb_ops import FnSpace, compatibility_residual, random_test_function

    par = cfg.params().with_(p=cfg.p if cfg.p is not None else 0.37 + 0.41j)
    space = FnSpace((1, 1), par, (True, True))
    z = cfg.sites(2)
    fns = [random_test_function(space, cfg.seed + k) for k in range(3)]
    lams = [complex(rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3)) for _ in range(3)]
    return [_check("compatibility n=2", compatibility_residual(0, 1, z, space, fns, lams), 1e-9)]


def _suite_fusion(cfg, rng):
    from itertools import product

    from .fusion import shift_number, shift_number_closed

    bad = 0
    for lams in product(range(4), repeat=3):
        for m in product(*(range(L + 1) for L in lams)):
            w = tuple(L - 2 * k for L, k in zip(lams, m))
            if sum(w) == 0 and shift_number(w, lams) != shift_number_closed(w, lams):
                bad += 1
    return [_check("shift number scan vs closed form", bad, 0)]


def _suite_bethe(cfg, rng):
    from .bethe import BetheProblem, eigen_residual, eigenfunction_h, eigenvalues_h, lambda_grid, solve_bae
    from .qkzb_ops import h_operator
    from .weight_functions import ModelParams

    par = cfg.params()
    z = cfg.sites(2)
    model = ModelParams((1, 1), z, par)
    sol = solve_bae(BetheProblem("h", model, cfg.c))
    psi = eigenfunction_h(sol)
    eps = eigenvalues_h(sol)
    grid = lambda_grid(par, 8)
    worst = max(eigen_residual(h_operator(j, z, psi.space), psi, eps[j], grid) for j in range(2))
    return [_check("BAE residual n=2", sol.residual, 1e-11), _check("H_j eigen-equation n=2", worst, 1e-8)]


def _suite_irf(cfg, rng):
    from .irf import DEFAULT_MU, random_labels, star_triangle_residual

    par = cfg.params()
    worst = 0.0
    for _ in range(10):
        labels = random_labels(rng, DEFAULT_MU)
        zs = [complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.1, 0.1)) for _ in range(3)]
        worst = max(worst, star_triangle_residual(labels, *zs, par))
    return [_check("star-triangle", worst, 1e-9)]


_SUITE_FUNCS = {
    "theta": _suite_theta,
    "rmatrix": _suite_rmatrix,
    "qkzb": _suite_qkzb,
    "fusion": _suite_fusion,
    "bethe": _suite_bethe,
    "irf": _suite_irf,
}


def run_verify(cfg: RunConfig):
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    if any(s not in _SUITE_FUNCS for s in names):
        raise ConfigError(f"unknown suite {cfg.suite}; choose from {', '.join(SUITES)} or all")
    result = {}
    checks = []
    for name in names:
        rng = np.random.default_rng(cfg.seed)
        res = _SUITE_FUNCS[name](cfg, rng)
        result[name] = res
        checks.extend(res)
    return {"suites": result}, _checks_status(checks)


# other commands ------------------------------------------------------------

def run_rmatrix(cfg: RunConfig):
    from .rmatrix import build_rmatrix

    m = 1 if cfg.m is None else int(cfg.m)
    if m < 0:
        raise ConfigError("m must be non-negative")
    z = cfg.z[0] if cfg.z else 0.3 + 0.05j
    R = build_rmatrix(cfg.L1, cfg.L2, z, cfg.lam, m, cfg.params())
    return json.loads(R.to_json()) | {"method": R.method}, EXIT_OK


def run_bethe(cfg: RunConfig):
    from .bethe import VARIANTS, BetheProblem, solve_bae
    from .weight_functions import ModelParams

    if cfg.variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}")
    n = cfg.n or (len(cfg.z) if cfg.z else 2)
    model = ModelParams(cfg.weights(n), cfg.sites(n), cfg.params())
    try:
        prob = BetheProblem(cfg.variant, model, cfg.c, cfg.m)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    sols = solve_bae(prob, all_solutions=True)
    out = [json.loads(s.to_json()) for s in sols]
    status = EXIT_OK if all(s.residual < cfg.tol for s in sols) else EXIT_TOL
    return {"solutions": out}, status


def _restricted_setup(cfg: RunConfig):
    from .weight_functions import ModelParams

    if cfg.N is None:
        raise ConfigError("--N is required")
    n = cfg.n or 4
    if n % 2:
        raise ConfigError("n must be even")
    model = ModelParams((1,) * n, cfg.sites(n), cfg.params())
    return model, n


def run_irf_spectrum(cfg: RunConfig):
    from .bethe import antisymmetric_states, antisymmetrize, eigenvalue_irf
    from .irf import bethe_eigenvector_restricted, brute_force_spectrum, match_eigenvector, restricted_eigen_residual

    model, n = _restricted_setup(cfg)
    par = model.params
    w2 = cfg.w2 if cfg.w2 is not None else cfg.w * 0.7 + 0.13 + 0.05j
    vals, vecs, comm = brute_force_spectrum(cfg.N, cfg.w, model.z, par, w2)
    matches = []
    checks = [_check("commutator", comm, 1e-9)]
    if len(vals) and n <= 6:
        for sol, psi in antisymmetric_states(model, "irf"):
            try:
                v = bethe_eigenvector_restricted(antisymmetrize(psi), cfg.N)
            except ValueError:
                continue
            eps = eigenvalue_irf(sol, cfg.w)
            eig, dist, overlap = match_eigenvector(v, vals, vecs, eps)
            res = restricted_eigen_residual(v, eps, cfg.N, cfg.w, model.z, par)
            matches.append({
                "c": pair(sol.problem.c),
                "roots": [pair(x) for x in sol.roots],
                "epsilon": pair(eps),
                "eigenvalue": pair(eig),
                "distance": dist,
                "overlap": overlap,
                "residual": res,
            })
            checks += [_check("eigenvalue distance", dist, 1e-7), _check("eigen-residual", res, 1e-7),
                       _check("overlap defect", 1 - overlap, 1e-6)]
    from .irf import spectrum_json

    result = json.loads(spectrum_json(cfg.N, n, par, cfg.w, vals, comm, matches))
    return result, _checks_status(checks)


def run_vanishing_report(cfg: RunConfig):
    from .bethe import antisymmetric_states, antisymmetrize, vanishing_report

    model, n = _restricted_setup(cfg)
    kind_of = {"h": "ordinary", "irf": "ordinary", "transfer": "modified"}
    variant = cfg.variant if cfg.variant in kind_of else "irf"
    states = antisymmetric_states(model, variant)
    reports = []
    status = EXIT_OK
    for sol, psi in states:
        rows, forced, free = vanishing_report(antisymmetrize(psi), kind_of[variant], N=cfg.N)
        scale = max(r.value for r in rows)
        ok = forced / scale <= cfg.tol and free >= 10 * forced
        status = status if ok else EXIT_TOL
        reports.append({
            "c": pair(sol.problem.c),
            "roots": [pair(x) for x in sol.roots],
            "max_forced": forced / scale,
            "min_unforced": free / scale,
            "rows": [{"M": list(r.M), "k": r.k, "value": r.value / scale, "forced": r.forced} for r in rows],
        })
    if not reports:
        status = EXIT_SOLVER
    return {"N": cfg.N, "n": n, "variant": variant, "states": reports}, status


RUNNERS = {
    "verify": run_verify,
    "rmatrix": run_rmatrix,
    "bethe": run_bethe,
    "irf-spectrum": run_irf_spectrum,
    "vanishing-report": run_vanishing_report,
}


def execute(command: str, config_path, flags: dict) -> int:
    from .bethe import SolverError

    try:
        cfg = RunConfig.merged(command, load_config_file(config_path), flags)
        cfg.params()
    except (ConfigError, ValueError, TypeError) as e:
        click.echo(json.dumps({"error": "config", "message": str(e)}, sort_keys=True), err=True)
        return EXIT_CONFIG
    try:
        result, status = RUNNERS[command](cfg)
    except ConfigError as e:
        click.echo(json.dumps({"error": "config", "message": str(e)}, sort_keys=True), err=True)
        return EXIT_CONFIG
    except (SolverError, PoleError) as e:
        click.echo(json.dumps({"error": "solver", "message": str(e)}, sort_keys=True), err=True)
        return EXIT_SOLVER
    return emit(cfg, result, status)


# click wiring --------------------------------------------------------------

def _common(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON file with RunConfig fields."),
        click.option("--tau", default=None, help="Modulus, e.g. 0.2+0.8i."),
        click.option("--eta", default=None),
        click.option("--tol", type=float, default=None, help=f"Defaults to ${TOL_ENV} or {DEFAULT_TOL}."),
        click.option("--seed", type=int, default=None),
        click.option("--output", "-o", default=None, help="Also write the report here."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Numerical checks for the elliptic quantum group E_{tau,eta}(sl2)."""


@main.command()
@_common
@click.option("--suite", default=None, help=f"One of {', '.join(SUITES)} or all.")
@click.option("--p", default=None, help="qKZB step.")
def verify(config_path, **flags):
    """Run identity suites and report residuals."""
    sys.exit(execute("verify", config_path, flags))


@main.command()
@_common
@click.option("--L1", "L1", default=None)
@click.option("--L2", "L2", default=None)
@click.option("--z", default=None, help="Spectral parameter.")
@click.option("--lam", default=None, help="Dynamical parameter.")
@click.option("--m", type=int, default=None)
def rmatrix(config_path, z, **flags):
    """R-matrix block on a level-m weight space."""
    if z is not None:
        flags["z"] = (z,)
    sys.exit(execute("rmatrix", config_path, flags))


@main.command()
@_common
@click.option("--variant", default=None, help="h, transfer or irf.")
@click.option("--n", type=int, default=None)
@click.option("--lambdas", default=None, help="Comma separated weights.")
@click.option("--z", default=None, help="Comma separated evaluation points.")
@click.option("--c", default=None)
@click.option("--m", type=int, default=None)
def bethe(config_path, **flags):
    """Solve Bethe ansatz equations; emits every distinct solution."""
    sys.exit(execute("bethe", config_path, flags))


@main.command("irf-spectrum")
@_common
@click.option("--N", "N", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--w", default=None)
@click.option("--w2", default=None, help="Second spectral value for the commutator.")
@click.option("--z", default=None)
def irf_spectrum(config_path, **flags):
    """Restricted transfer matrix spectrum with matched Bethe vectors."""
    sys.exit(execute("irf-spectrum", config_path, flags))


@main.command("vanishing-report")
@_common
@click.option("--N", "N", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--variant", default=None)
@click.option("--z", default=None)
def vanishing_report_cmd(config_path, **flags):
    """Forced zeros of antisymmetrized Bethe eigenfunctions at the root of unity."""
    sys.exit(execute("vanishing-report", config_path, flags))


if __name__ == "__main__":
    main()
