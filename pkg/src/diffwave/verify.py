"""Self-verification suite: oracle comparisons and identity checks.

Each check returns a record with a status ("pass", "fail", or
"insufficient" when a refinement ladder is too short to estimate an order);
the bundle passes only if every check passes.  The fault parameter is a test
hook that deliberately corrupts one primitive so the suite's sensitivity is
itself testable.
"""
from __future__ import annotations

import math

import numpy as np

from .analysis import (WeightKernel, heat_oracle, is_positive_definite,
                       manufactured_residual, trig_target,
                       weight_identity_check, weight_sup_g)
from .core import (Grid, ModelParams, build_grid, dx1, dx2, l2_norm,
                   tridiag_solve)
from .profile import DiffusionWave, solve_profile_cauchy
from .solver import (CauchyProblem, GaussianBump, InitialData, NeumannProblem,
                     RunConfig, ZeroShape, run)

__all__ = ["run_checks", "CHECK_NAMES"]

CHECK_NAMES = ("stencils", "tridiagonal", "weight_identities",
               "positive_definite", "heat_oracle", "manufactured")


def _check_stencils(fault=None) -> dict:
    grid = build_grid(-1.0, 2.0, 41)
    x = grid.nodes
    d1 = dx1(2.0 * x + 1.0, grid)
    d2 = dx2(x**2, grid)
    if fault == "dx2":
        d2 = d2 + 0.01  # deliberate corruption (test hook)
    err1 = float(np.max(np.abs(d1 - 2.0)))
    err2 = float(np.max(np.abs(d2 - 2.0)))
    passed = err1 <= 1e-12 and err2 <= 1e-10
    return {"name": "stencils", "status": "pass" if passed else "fail",
            "dx1_linear_error": err1, "dx2_quadratic_error": err2}


def _check_tridiagonal(fault=None) -> dict:
    rng = np.random.default_rng(7)
    n = 50
    lower = rng.uniform(-1.0, 1.0, n - 1)
    upper = rng.uniform(-1.0, 1.0, n - 1)
    diag = 3.0 + rng.uniform(0.0, 1.0, n)
    rhs = rng.uniform(-1.0, 1.0, n)
    x = tridiag_solve(lower, diag, upper, rhs)
    dense = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    x_ref = np.linalg.solve(dense, rhs)
    err = float(np.max(np.abs(x - x_ref)) / np.max(np.abs(x_ref)))
    return {"name": "tridiagonal", "status": "pass" if err <= 1e-10 else "fail",
            "relative_error": err}


def _check_weight_identities(levels: int = 3, fault=None) -> dict:
    kernel = WeightKernel(alpha=0.25, domain="full_line")
    residuals = []
    for lvl in range(levels):
        n = 801 * 2**lvl + 1
        grid = build_grid(-8.0, 16.0, n)
        residuals.append(weight_identity_check(kernel, grid, 1.0)["max_residual"])
    sup_err = abs(weight_sup_g(WeightKernel(alpha=math.pi))
                  - 1.0)  # alpha = pi makes the full-line supremum exactly 1
    record = {"name": "weight_identities", "residuals": residuals,
              "sup_g_error": sup_err}
    if levels < 2:
        record["status"] = "insufficient"
        record["note"] = "insufficient refinement for an order estimate"
        return record
    factors = [residuals[i] / residuals[i + 1] for i in range(levels - 1)]
    record["refinement_factors"] = factors
    ok = (residuals[0] <= 1e-4 and sup_err <= 1e-10
          and all(3.0 <= f <= 5.0 for f in factors))
    record["status"] = "pass" if ok else "fail"
    return record


def _scan_minimum(lam, mu, K, n=4096) -> float:
    theta = np.linspace(0.0, math.pi, n, endpoint=False)
    c, s = np.cos(theta), np.sin(theta)
    return float(np.min(0.5 * lam * c**2 + 0.5 * K * s**2 - mu * c * s))


def _check_positive_definite(fault=None, n_trials: int = 1000) -> dict:
    rng = np.random.default_rng(11)
    disagreements = 0
    for _ in range(n_trials):
        lam = rng.uniform(0.05, 4.0)
        mu = rng.uniform(-3.0, 3.0)
        K = rng.uniform(0.05, 4.0)
        if is_positive_definite(lam, mu, K) != (_scan_minimum(lam, mu, K) > 0.0):
            disagreements += 1
    return {"name": "positive_definite",
            "status": "pass" if disagreements == 0 else "fail",
            "trials": n_trials, "disagreements": disagreements}


def _heat_error(dx: float, dt: float, t_final: float) -> float:
    params = ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=0.0)
    half = 20.0
    n = int(round(2 * half / dx)) + 1
    grid = build_grid(-half, 2 * half, n)
    amp, sigma = 0.01, 1.0
    initial = InitialData(w0=ZeroShape(),
                          z0=GaussianBump(amp=amp, center=0.0, sigma=sigma))
    wave = DiffusionWave(solve_profile_cauchy(params, tol=1e-6), params)
    kind = CauchyProblem(wave=wave, half_width=half)
    config = RunConfig(params=params, kind=kind, grid=grid, dt=dt,
                       t_final=t_final, output_times=(t_final,),
                       initial=initial)
    result = run(config)
    exact = heat_oracle(1.0, amp, sigma, grid.nodes, result.times[-1])
    return float(np.max(np.abs(result.states[-1].u - exact)))


def _check_heat_oracle(fault=None) -> dict:
    dx, t_final = 0.1, 1.0
    e_coarse = _heat_error(dx, dx**2, t_final)
    e_fine = _heat_error(dx / 2, dx**2 / 4, t_final)
    factor = e_coarse / e_fine if e_fine > 0 else math.inf
    ok = e_coarse <= 5e-3 and 3.4 <= factor <= 4.6
    return {"name": "heat_oracle", "status": "pass" if ok else "fail",
            "error_coarse": e_coarse, "error_fine": e_fine,
            "refinement_factor": factor}


def _check_manufactured(levels: int = 3, fault=None) -> dict:
    params = ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0)
    grid = build_grid(0.0, 2.0 * math.pi, 64)
    config = RunConfig(params=params, kind=NeumannProblem(width=grid.length),
                       grid=grid, dt=0.02, t_final=0.5, output_times=(),
                       initial=InitialData())
    report = manufactured_residual(config, trig_target(), levels=levels)
    record = {"name": "manufactured", **report}
    if not report["sufficient"]:
        record["status"] = "insufficient"
        record["note"] = "insufficient refinement for an order estimate"
        return record
    ok = (report["spatial_order"] >= 1.8
          and 0.85 <= report["temporal_order"] <= 1.15)
    record["status"] = "pass" if ok else "fail"
    return record


def run_checks(fault=None, names=None) -> dict:
    """Run the verification bundle; returns per-check records and a summary."""
    registry = {
        "stencils": _check_stencils,
        "tridiagonal": _check_tridiagonal,
        "weight_identities": _check_weight_identities,
        "positive_definite": _check_positive_definite,
        "heat_oracle": _check_heat_oracle,
        "manufactured": _check_manufactured,
    }
    names = names or CHECK_NAMES
    checks = [registry[n](fault=fault) for n in names]
    all_pass = all(c["status"] == "pass" for c in checks)
    return {"checks": checks, "all_pass": all_pass}
