"""Diagnostics over completed runs: perturbation norms, decay-rate fits,
heat-kernel weighted space-time integrals, energy quadratic forms, boundary
identities, and the independent oracles used for verification.

Everything here is pure over immutable RunResults, so analyses of one run or
of several runs can proceed concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

from .core import Grid, ModelParams, State, boundary_dx3, dx1, dx2, l2_norm
from .solver import (CauchyProblem, DirichletProblem, NeumannProblem,
                     ProblemKind, RunConfig, RunResult, Stepper,
                     reference_state)

__all__ = [
    "PerturbSeries",
    "RateFit",
    "WeightKernel",
    "EnergyLedger",
    "perturbation",
    "norm_series",
    "fit_decay_rate",
    "weight_eval",
    "weight_time_derivatives",
    "weight_identity_check",
    "weighted_spacetime_integral",
    "check_weighted_estimate",
    "energy_ledger",
    "is_positive_definite",
    "boundary_report",
    "tail_vanishing_check",
    "heat_oracle",
    "MmsTarget",
    "trig_target",
    "constant_target",
    "manufactured_residual",
]


def perturbation(state: State, kind: ProblemKind, params: ModelParams):
    """(w, z) = (rho - rho_ref, u - u_ref) against the kind's reference object."""
    x = state.grid.nodes
    u_ref, rho_ref = reference_state(kind, params, x, state.t)
    return state.rho - rho_ref, state.u - u_ref


@dataclass(frozen=True)
class PerturbSeries:
    """Norm time series of the perturbation pair and the derived functionals.

    w_norms/z_norms hold ||d^k_x .|| for k = 0..2 per snapshot; cum_dissipation
    column j is the running integral of
    (1+tau)^j (||d^{j+1}_x w||^2 + ||d^{j+1}_x z||^2 + ||d^j_x(lam w - mu z)||^2),
    and cum_time_deriv the (1+tau)^2-weighted time-derivative analogue
    (snapshot-differenced, so it is tracked more loosely than the others).
    n_functional is the running maximum of weighted_sum, i.e. the a-priori
    smallness quantity the decay statements are phrased in.
    """

    times: np.ndarray
    w_norms: np.ndarray          # (nt, 3)
    z_norms: np.ndarray          # (nt, 3)
    wt_norm: np.ndarray
    zt_norm: np.ndarray
    good_norm: np.ndarray        # ||lam w - mu z||
    good_dx_norm: np.ndarray
    weighted_sum: np.ndarray     # sum_k (1+t)^k (||d^k w||^2 + ||d^k z||^2)
    n_functional: np.ndarray
    cum_dissipation: np.ndarray  # (nt, 3)
    cum_time_deriv: np.ndarray


def _time_derivative(times: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """Second-order differencing of snapshot rows on a non-uniform time grid."""
    nt = times.size
    out = np.empty_like(stack)
    for i in range(nt):
        if 0 < i < nt - 1:
            h1 = times[i] - times[i - 1]
            h2 = times[i + 1] - times[i]
            out[i] = (-h2 / (h1 * (h1 + h2)) * stack[i - 1]
                      + (h2 - h1) / (h1 * h2) * stack[i]
                      + h1 / (h2 * (h1 + h2)) * stack[i + 1])
        elif i == 0:
            h1 = times[1] - times[0]
            h2 = times[2] - times[1]
            a = -(2 * h1 + h2) / (h1 * (h1 + h2))
            b = (h1 + h2) / (h1 * h2)
            c = -h1 / (h2 * (h1 + h2))
            out[0] = a * stack[0] + b * stack[1] + c * stack[2]
        else:
            h1 = times[-2] - times[-3]
            h2 = times[-1] - times[-2]
            a = h2 / (h1 * (h1 + h2))
            b = -(h1 + h2) / (h1 * h2)
            c = (h1 + 2 * h2) / (h2 * (h1 + h2))
            out[-1] = a * stack[-3] + b * stack[-2] + c * stack[-1]
    return out


def _cumtrapz(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values)
    if times.size > 1:
        seg = 0.5 * np.diff(times) * (values[1:] + values[:-1])
        out[1:] = np.cumsum(seg)
    return out


def norm_series(result: RunResult, kind: Optional[ProblemKind] = None) -> PerturbSeries:
    """All PerturbSeries fields from a run's snapshots (needs >= 2 of them)."""
    if len(result.states) < 2:
        raise ValueError("norm_series needs at least two snapshots")
    if kind is None:
        kind = result.config.kind
    params = result.config.params
    grid = result.grid
    nt = len(result.states)
    times = result.times

    ws = np.empty((nt, grid.n))
    zs = np.empty((nt, grid.n))
    for i, state in enumerate(result.states):
        ws[i], zs[i] = perturbation(state, kind, params)

    def dstack(stack, order):
        if order == 0:
            return stack
        if order == 1:
            return np.array([dx1(row, grid) for row in stack])
        if order == 2:
            return np.array([dx2(row, grid) for row in stack])
        return np.array([dx1(dx2(row, grid), grid) for row in stack])

    w_d = [dstack(ws, k) for k in range(4)]
    z_d = [dstack(zs, k) for k in range(4)]

    def norms(stack):
        return np.array([l2_norm(row, grid) for row in stack])

    w_norms = np.stack([norms(w_d[k]) for k in range(3)], axis=1)
    z_norms = np.stack([norms(z_d[k]) for k in range(3)], axis=1)

    lam, mu = params.lam, params.mu
    good = [lam * w_d[k] - mu * z_d[k] for k in range(3)]
    good_norm = norms(good[0])
    good_dx_norm = norms(good[1])

    wt = _time_derivative(times, ws)
    zt = _time_derivative(times, zs)
    wt_norm = norms(wt)
    zt_norm = norms(zt)

    weights = (1.0 + times)[:, None] ** np.arange(3)[None, :]
    weighted_sum = np.sum(weights * (w_norms**2 + z_norms**2), axis=1)
    n_functional = np.maximum.accumulate(weighted_sum)

    cum = np.empty((nt, 3))
    for j in range(3):
        integrand = ((1.0 + times) ** j
                     * (norms(w_d[j + 1])**2 + norms(z_d[j + 1])**2
                        + norms(good[j])**2))
        cum[:, j] = _cumtrapz(times, integrand)

    wxt = _time_derivative(times, w_d[1])
    zxt = _time_derivative(times, z_d[1])
    goodt = lam * wt - mu * zt
    integrand_t = ((1.0 + times) ** 2
                   * (norms(wxt)**2 + norms(zxt)**2 + norms(goodt)**2))
    cum_t = _cumtrapz(times, integrand_t)

    return PerturbSeries(
        times=times.copy(), w_norms=w_norms, z_norms=z_norms,
        wt_norm=wt_norm, zt_norm=zt_norm,
        good_norm=good_norm, good_dx_norm=good_dx_norm,
        weighted_sum=weighted_sum, n_functional=n_functional,
        cum_dissipation=cum, cum_time_deriv=cum_t,
    )


@dataclass(frozen=True)
class RateFit:
    """Algebraic decay exponent of a series against (1+t), with diagnostics."""

    exponent: float
    intercept: float
    window: tuple
    r2: float

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ValueError("fit window must have t_min < t_max")


def fit_decay_rate(times, values, window) -> RateFit:
    """OLS of log(value) against log(1+t) over the window (>= 8 samples)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_min, t_max = float(window[0]), float(window[1])
    mask = (times >= t_min) & (times <= t_max)
    if mask.sum() < 8:
        raise ValueError(f"need >= 8 samples in [{t_min:g}, {t_max:g}], "
                         f"have {int(mask.sum())}")
    v = values[mask]
    if np.any(v <= 0.0):
        raise ValueError("decay fit needs strictly positive values in the window")
    x = np.log1p(times[mask])
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return RateFit(exponent=float(slope), intercept=float(intercept),
                   window=(t_min, t_max), r2=max(0.0, min(1.0, r2)))


# ---------------------------------------------------------------------------
# heat-kernel weights


@dataclass(frozen=True)
class WeightKernel:
    """Squared-heat-kernel weight with rate alpha on the full or half line."""

    alpha: float
    domain: str = "full_line"

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.domain not in ("full_line", "half_line"):
            raise ValueError("domain must be 'full_line' or 'half_line'")


def weight_eval(kernel: WeightKernel, x, t):
    """(omega, g) with omega = (1+t)^(-1/2) exp(-alpha x^2/(1+t)) and g its
    primitive from -inf (full line) or 0 (half line), in closed form."""
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("t must be non-negative")
    x = np.asarray(x, dtype=float)
    s = 1.0 + t
    omega = s**-0.5 * np.exp(-kernel.alpha * x**2 / s)
    root = np.sqrt(kernel.alpha / s)
    if kernel.domain == "full_line":
        g = 0.5 * math.sqrt(math.pi / kernel.alpha) * (1.0 + erf(root * x))
    else:
        g = 0.5 * math.sqrt(math.pi / kernel.alpha) * erf(root * x)
    return omega, g


def weight_time_derivatives(kernel: WeightKernel, x, t):
    """Closed-form (d omega/dt, d g/dt); the identities equate these with
    spatial derivatives of omega."""
    x = np.asarray(x, dtype=float)
    s = 1.0 + t
    omega, _ = weight_eval(kernel, x, t)
    omega_t = omega * (-0.5 / s + kernel.alpha * x**2 / s**2)
    g_t = -x * omega / (2.0 * s)
    return omega_t, g_t


def weight_sup_g(kernel: WeightKernel) -> float:
    """Exact supremum of g over x: sqrt(pi/alpha), halved on the half line."""
    sup = math.sqrt(math.pi / kernel.alpha)
    return sup if kernel.domain == "full_line" else 0.5 * sup


def weight_identity_check(kernel: WeightKernel, grid: Grid, t: float) -> dict:
    """Stencil residuals of the two weight identities on the grid at time t:
    the heat identity (omega_t vs omega_xx/(4 alpha)) and the primitive
    identity (4 alpha g_t vs omega_x).  Residuals are pure O(dx^2) stencil
    error because the time sides are evaluated analytically."""
    if not t > 0.0:
        raise ValueError("t must be positive")
    x = grid.nodes
    omega, _ = weight_eval(kernel, x, t)
    omega_t, g_t = weight_time_derivatives(kernel, x, t)
    heat_res = float(np.max(np.abs(dx2(omega, grid) / (4.0 * kernel.alpha) - omega_t)))
    gt_res = float(np.max(np.abs(4.0 * kernel.alpha * g_t - dx1(omega, grid))))
    return {"heat_residual": heat_res, "gt_residual": gt_res,
            "max_residual": max(heat_res, gt_res)}


def weighted_spacetime_integral(result: RunResult, selector: str,
                                kernel: WeightKernel) -> float:
    """Trapezoid (in x and t) of h^2 omega^2 over the run, h = w or z."""
    if len(result.states) < 2:
        raise ValueError("need at least two snapshots")
    if selector not in ("w", "z"):
        raise ValueError("selector must be 'w' or 'z'")
    grid = result.grid
    x = grid.nodes
    vals = np.empty(len(result.states))
    for i, state in enumerate(result.states):
        w, z = perturbation(state, result.config.kind, result.config.params)
        h = w if selector == "w" else z
        omega, _ = weight_eval(kernel, x, state.t)
        vals[i] = np.trapezoid(h**2 * omega**2, dx=grid.dx)
    return float(np.trapezoid(vals, result.times))


def check_weighted_estimate(result: RunResult, kernel: WeightKernel) -> dict:
    """Both sides of the weighted space-time bound for the bacteria
    perturbation: lhs = iint z^2 omega^2, rhs = int (||z_x||^2 + ||w_x||^2) dtau
    + ||z_0||^2.  The ratio is a finite-constant check, not a proof."""
    grid = result.grid
    lhs = weighted_spacetime_integral(result, "z", kernel)
    zx2 = np.empty(len(result.states))
    wx2 = np.empty(len(result.states))
    for i, state in enumerate(result.states):
        w, z = perturbation(state, result.config.kind, result.config.params)
        wx2[i] = l2_norm(dx1(w, grid), grid) ** 2
        zx2[i] = l2_norm(dx1(z, grid), grid) ** 2
    w0, z0 = perturbation(result.states[0], result.config.kind, result.config.params)
    rhs = float(np.trapezoid(zx2 + wx2, result.times)) + l2_norm(z0, grid) ** 2
    inconsistent = rhs == 0.0 and lhs > 0.0
    ratio = 0.0 if lhs == 0.0 else (math.inf if rhs == 0.0 else lhs / rhs)
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio, "inconsistent": inconsistent}


# ---------------------------------------------------------------------------
# energy diagnostics


def is_positive_definite(lam: float, mu: float, K: float) -> bool:
    """Whether the combined quadratic form lam w^2/2 + K z^2/2 - mu w z is
    positive definite (determinant criterion)."""
    if not (lam > 0.0 and K > 0.0):
        raise ValueError("lam and K must be positive")
    return lam * K > mu * mu


@dataclass(frozen=True)
class EnergyLedger:
    """Per-snapshot values of the combined energy form and its dissipation.

    quadratic is the integral of lam w^2/2 + K z^2/2 - mu w z, which is
    pointwise non-negative exactly when lam K > mu^2; quadratic_dx is the same
    form on (w_x, z_x).  boundary_flux records the boundary production terms
    a z_x z + b w_x (lam w - mu z) at x = 0 (zero for both half-line kinds by
    construction, absent on the full line)."""

    K: float
    times: np.ndarray
    quadratic: np.ndarray
    quadratic_dx: np.ndarray
    wx2: np.ndarray
    zx2: np.ndarray
    good2: np.ndarray
    wxx2: np.ndarray
    zxx2: np.ndarray
    good_dx2: np.ndarray
    boundary_flux: np.ndarray


def energy_ledger(result: RunResult, K: float) -> EnergyLedger:
    """Track the combined quadratic form and dissipation integrands per snapshot."""
    params = result.config.params
    lam, mu = params.lam, params.mu
    if not lam * K > mu * mu:
        raise ValueError(f"need lam*K > mu^2 for a positive form; "
                         f"{lam:g}*{K:g} <= {mu * mu:g}")
    grid = result.grid
    nt = len(result.states)
    quad = np.empty(nt)
    quad_dx = np.empty(nt)
    wx2 = np.empty(nt)
    zx2 = np.empty(nt)
    good2 = np.empty(nt)
    wxx2 = np.empty(nt)
    zxx2 = np.empty(nt)
    good_dx2 = np.empty(nt)
    bflux = np.zeros(nt)
    halfline = isinstance(result.config.kind, (DirichletProblem, NeumannProblem))
    for i, state in enumerate(result.states):
        w, z = perturbation(state, result.config.kind, params)
        wx = dx1(w, grid)
        zx = dx1(z, grid)
        wxx = dx2(w, grid)
        zxx = dx2(z, grid)
        quad[i] = np.trapezoid(0.5 * lam * w**2 + 0.5 * K * z**2 - mu * w * z,
                               dx=grid.dx)
        quad_dx[i] = np.trapezoid(0.5 * lam * wx**2 + 0.5 * K * zx**2 - mu * wx * zx,
                                  dx=grid.dx)
        wx2[i] = l2_norm(wx, grid) ** 2
        zx2[i] = l2_norm(zx, grid) ** 2
        good2[i] = l2_norm(lam * w - mu * z, grid) ** 2
        wxx2[i] = l2_norm(wxx, grid) ** 2
        zxx2[i] = l2_norm(zxx, grid) ** 2
        good_dx2[i] = l2_norm(lam * wx - mu * zx, grid) ** 2
        if halfline:
            bflux[i] = (params.a * zx[0] * z[0]
                        + params.b * wx[0] * (lam * w[0] - mu * z[0]))
    return EnergyLedger(K=float(K), times=result.times.copy(), quadratic=quad,
                        quadratic_dx=quad_dx, wx2=wx2, zx2=zx2, good2=good2,
                        wxx2=wxx2, zxx2=zxx2, good_dx2=good_dx2,
                        boundary_flux=bflux)


# ---------------------------------------------------------------------------
# boundary identities and tail behavior


def boundary_report(result: RunResult, kind: Optional[ProblemKind] = None) -> dict:
    """Boundary diagnostics for half-line runs.

    Dirichlet: |w|, |z| at x = 0 (clamped, so exactly zero) and the scaled
    curvature (1+t)|w_xx(0,t)|, which stays bounded for small waves.
    Neumann: |w_x|, |z_x| at x = 0 (zero to the closure's accuracy) and
    |w_xxx(0,t)|, which vanishes to stencil accuracy by the chemical equation.
    """
    if kind is None:
        kind = result.config.kind
    if isinstance(kind, CauchyProblem):
        raise ValueError("boundary_report applies to half-line kinds only")
    params = result.config.params
    grid = result.grid
    nt = len(result.states)
    out: dict = {"times": result.times.copy()}
    if isinstance(kind, DirichletProblem):
        w0 = np.empty(nt)
        z0 = np.empty(nt)
        wxx0 = np.empty(nt)
        for i, state in enumerate(result.states):
            w, z = perturbation(state, kind, params)
            w0[i] = abs(w[0])
            z0[i] = abs(z[0])
            wxx0[i] = abs(dx2(w, grid)[0])
        out.update(w_abs=w0, z_abs=z0, wxx_abs=wxx0,
                   wxx_scaled=(1.0 + result.times) * wxx0)
    else:
        wx0 = np.empty(nt)
        zx0 = np.empty(nt)
        wxxx0 = np.empty(nt)
        for i, state in enumerate(result.states):
            w, z = perturbation(state, kind, params)
            wx0[i] = abs(dx1(w, grid)[0])
            zx0[i] = abs(dx1(z, grid)[0])
            wxxx0[i] = abs(boundary_dx3(w, grid))
        out.update(wx_abs=wx0, zx_abs=zx0, wxxx_abs=wxxx0)
    return out


def tail_vanishing_check(times, values) -> dict:
    """Qualitative vanishing check for a non-negative series: the last decade
    of 1+t must average <= 10% of the first decade, and the final value must
    be <= 5% of the maximum."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 4:
        raise ValueError("series too short")
    span = (1.0 + times[-1]) / (1.0 + times[0])
    if span < 10.0:
        raise ValueError("series must span at least one decade in 1+t")
    first = values[(1.0 + times) <= 10.0 * (1.0 + times[0])]
    last = values[(1.0 + times) >= (1.0 + times[-1]) / 10.0]
    first_mean = float(np.mean(first))
    last_mean = float(np.mean(last))
    peak = float(np.max(values))
    decayed = (last_mean <= 0.1 * first_mean + 1e-300
               and values[-1] <= 0.05 * peak + 1e-300)
    return {"vanishes": bool(decayed), "first_decade_mean": first_mean,
            "last_decade_mean": last_mean, "final": float(values[-1]),
            "peak": peak}


# ---------------------------------------------------------------------------
# oracles


def heat_oracle(a: float, amp: float, sigma: float, x, t):
    """Exact solution of u_t = a u_xx with u(x,0) = amp exp(-x^2/(2 sigma^2))."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("t must be non-negative")
    x = np.asarray(x, dtype=float)
    var = sigma**2 + 2.0 * a * t
    return amp * sigma / np.sqrt(var) * np.exp(-(x**2) / (2.0 * var))


@dataclass(frozen=True)
class MmsTarget:
    """Closed-form target pair (u, rho) with the derivatives the forcing needs."""

    u: Callable
    u_t: Callable
    u_x: Callable
    u_xx: Callable
    rho: Callable
    rho_t: Callable
    rho_x: Callable
    rho_xx: Callable


def trig_target(decay: float = 1.0) -> MmsTarget:
    """u = rho = exp(-decay*t) cos(x): smooth, boundary-friendly, non-periodic
    on a truncated domain."""

    def h(x, t):
        return math.exp(-decay * t) * np.cos(x)

    return MmsTarget(
        u=h,
        u_t=lambda x, t: -decay * h(x, t),
        u_x=lambda x, t: -math.exp(-decay * t) * np.sin(x),
        u_xx=lambda x, t: -h(x, t),
        rho=h,
        rho_t=lambda x, t: -decay * h(x, t),
        rho_x=lambda x, t: -math.exp(-decay * t) * np.sin(x),
        rho_xx=lambda x, t: -h(x, t),
    )


def constant_target(u0: float, rho0: float) -> MmsTarget:
    zero = lambda x, t: np.zeros_like(np.asarray(x, dtype=float))
    const = lambda c: (lambda x, t: np.full(np.asarray(x, dtype=float).shape, c))
    return MmsTarget(u=const(u0), u_t=zero, u_x=zero, u_xx=zero,
                     rho=const(rho0), rho_t=zero, rho_x=zero, rho_xx=zero)


def _mms_forcing(params: ModelParams, target: MmsTarget):
    def forcing(x, t):
        su = (target.u_t(x, t) - params.a * target.u_xx(x, t)
              + params.kappa * (target.u_x(x, t) * target.rho_x(x, t)
                                + target.u(x, t) * target.rho_xx(x, t)))
        srho = (target.rho_t(x, t) - params.b * target.rho_xx(x, t)
                + params.lam * target.rho(x, t) - params.mu * target.u(x, t))
        return su, srho
    return forcing


def _mms_error(params: ModelParams, grid: Grid, dt: float, t_final: float,
               target: MmsTarget, upwind: bool) -> float:
    """Max-norm error of the forced scheme against the target at t_final.

    Both ends are clamped to the target values, so any smooth target works on
    a truncated domain regardless of the physical boundary kind."""
    x = grid.nodes
    n_steps = max(1, int(round(t_final / dt)))
    dt = t_final / n_steps
    state = State(grid=grid, u=np.asarray(target.u(x, 0.0), dtype=float),
                  rho=np.asarray(target.rho(x, 0.0), dtype=float), t=0.0)

    def clamp(t):
        return ((float(np.asarray(target.u(x[0], t))),
                 float(np.asarray(target.rho(x[0], t)))),
                (float(np.asarray(target.u(x[-1], t))),
                 float(np.asarray(target.rho(x[-1], t)))))

    stepper = Stepper(params, grid, dt, upwind=upwind,
                      forcing=_mms_forcing(params, target), clamp=clamp)
    for _ in range(n_steps):
        state = stepper.step(state)
    eu = np.max(np.abs(state.u - target.u(x, state.t)))
    er = np.max(np.abs(state.rho - target.rho(x, state.t)))
    return float(max(eu, er))


def manufactured_residual(config: RunConfig, target: MmsTarget,
                          levels: int = 3) -> dict:
    """Convergence report for the full coupled scheme on a forced problem.

    Spatial ladder: (dx, dt) -> (dx/2, dt/4) per level, so the observed order
    in dx isolates the O(dx^2) spatial error.  Temporal ladder: dt halvings at
    the finest dx, isolating the O(dt) splitting error.  Fewer than two
    levels cannot produce an order estimate and are flagged as insufficient.
    """
    if isinstance(config.kind, NeumannProblem):
        x0 = config.grid.x0
        slope = float(np.asarray(target.u_x(x0, 0.0)))
        if abs(slope) > 1e-12:
            raise ValueError("target incompatible with the null-Neumann boundary: "
                             f"u_x({x0:g}, 0) = {slope:g}")
    params = config.params
    base_grid = config.grid
    dt0 = config.dt
    t_final = config.t_final

    spatial_err = []
    for lvl in range(levels):
        g = Grid(x0=base_grid.x0, dx=base_grid.dx / 2**lvl,
                 n=(base_grid.n - 1) * 2**lvl + 1)
        spatial_err.append(_mms_error(params, g, dt0 / 4**lvl, t_final, target,
                                      config.upwind))
    spatial_orders = [math.log2(spatial_err[i] / spatial_err[i + 1])
                      for i in range(levels - 1)
                      if spatial_err[i + 1] > 0]

    fine = Grid(x0=base_grid.x0, dx=base_grid.dx / 2 ** (levels - 1),
                n=(base_grid.n - 1) * 2 ** (levels - 1) + 1)
    temporal_err = [_mms_error(params, fine, dt0 / 2**lvl, t_final, target,
                               config.upwind) for lvl in range(levels)]
    temporal_orders = [math.log2(temporal_err[i] / temporal_err[i + 1])
                       for i in range(levels - 1)
                       if temporal_err[i + 1] > 0]

    sufficient = levels >= 2
    return {
        "spatial_errors": spatial_err,
        "spatial_orders": spatial_orders,
        "spatial_order": (float(np.mean(spatial_orders))
                          if sufficient and spatial_orders else math.nan),
        "temporal_errors": temporal_err,
        "temporal_orders": temporal_orders,
        "temporal_order": (float(np.mean(temporal_orders))
                           if sufficient and temporal_orders else math.nan),
        "sufficient": sufficient,
    }
