"""Self-similar diffusion-wave profiles.

The wave connecting the far-field states u_- and u_+ is u(x,t) = phi(xi) with
xi = x/sqrt(1+t), where phi solves the degenerate-diffusion profile equation

    (f(phi) phi')' + (xi/2) phi' = 0,      f(u) = a - (kappa*mu/lam)*u,

with phi(-inf) = u_-, phi(+inf) = u_+.  This module constructs phi by nested
bisection shooting, evaluates the wave and its space/time derivatives at
arbitrary points, fits the Gaussian envelope of phi', and measures the decay
exponents of derivative norms against their predicted values.

Profiles are immutable once constructed; every evaluation here is pure.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .core import Grid, ModelParams, build_grid, lp_norm

__all__ = [
    "ShootingError",
    "ProfileAnchor",
    "EnvelopeFit",
    "OdeTrajectory",
    "Profile",
    "DiffusionWave",
    "integrate_profile_ode",
    "solve_profile_cauchy",
    "solve_profile_halfline",
    "wave_eval",
    "rho_bar_eval",
    "fit_envelope",
    "check_decay_table",
    "ode_residual",
    "save_profile",
    "load_profile",
]

MAX_BISECTIONS = 200


class ShootingError(RuntimeError):
    """Shooting failed to converge or hit degenerate diffusivity."""


@dataclass(frozen=True)
class ProfileAnchor:
    """Shooting data: the profile passes through (xi0, phi0) with slope slope0."""

    xi0: float
    phi0: float
    slope0: float


@dataclass(frozen=True)
class EnvelopeFit:
    """Fitted Gaussian envelope |phi'(xi)| ~ c_amp*|u_+ - u_-|*exp(-c0*xi^2)."""

    c_amp: float
    c0: float
    r2: float


@dataclass(frozen=True)
class OdeTrajectory:
    """Raw integration output; degenerate_* flag directions halted by f <= 0."""

    xi: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    degenerate_left: bool
    degenerate_right: bool


@dataclass(frozen=True)
class Profile:
    """Sampled self-similar profile with derivative samples and shooting metadata."""

    xi_grid: Grid
    phi: np.ndarray
    dphi: np.ndarray
    u_minus: float
    u_plus: float
    anchor: ProfileAnchor
    envelope: Optional[EnvelopeFit]
    residual_left: float
    residual_right: float
    halfline: bool = False

    @property
    def is_constant(self) -> bool:
        # a zero anchor slope forces phi == phi0 (the constant solution is unique)
        return self.anchor.slope0 == 0.0


def _phi_rhs(params: ModelParams, xi: float, phi: float, p: float):
    """Right-hand side of the first-order system for (phi, phi')."""
    fv = params.a - (params.kappa * params.mu / params.lam) * phi
    if fv <= 0.0:
        return None
    return p, -((0.5 * xi) * p + params.df() * p * p) / fv


def _march(params: ModelParams, phi0: float, slope0: float, xi_end: float,
           dxi: float, record: bool):
    """RK4 from xi = 0 to xi_end (either sign).  Returns final values, the
    degeneracy flag, and optionally the sampled trajectory (excluding xi=0)."""
    n_steps = max(1, int(round(abs(xi_end) / dxi)))
    h = math.copysign(abs(xi_end) / n_steps, xi_end) if xi_end != 0.0 else dxi
    phi, p = phi0, slope0
    xi = 0.0
    phis = [] if record else None
    dphis = [] if record else None
    degenerate = False
    for k in range(n_steps):
        k1 = _phi_rhs(params, xi, phi, p)
        if k1 is None:
            degenerate = True
            break
        k2 = _phi_rhs(params, xi + 0.5 * h, phi + 0.5 * h * k1[0], p + 0.5 * h * k1[1])
        if k2 is None:
            degenerate = True
            break
        k3 = _phi_rhs(params, xi + 0.5 * h, phi + 0.5 * h * k2[0], p + 0.5 * h * k2[1])
        if k3 is None:
            degenerate = True
            break
        k4 = _phi_rhs(params, xi + h, phi + h * k3[0], p + h * k3[1])
        if k4 is None:
            degenerate = True
            break
        phi += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        p += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        xi = (k + 1) * h
        if not (math.isfinite(phi) and math.isfinite(p)):
            raise ShootingError(f"non-finite profile values at xi = {xi:g}")
        if record:
            phis.append(phi)
            dphis.append(p)
    if record:
        pad = n_steps - len(phis)
        if pad:
            # degenerate direction: freeze at the last good sample
            phis.extend([phis[-1] if phis else phi0] * pad)
            dphis.extend([dphis[-1] if dphis else slope0] * pad)
        return phi, p, degenerate, np.array(phis), np.array(dphis)
    return phi, p, degenerate, None, None


def integrate_profile_ode(params: ModelParams, phi0: float, slope0: float,
                          xi_span, dxi: float) -> OdeTrajectory:
    """Integrate the profile equation outward from xi = 0 over xi_span.

    xi_span = (xi_lo, xi_hi) with xi_lo <= 0 <= xi_hi.  A direction halts
    early (samples frozen) when f(phi) <= 0, and the corresponding
    degenerate flag is set.
    """
    xi_lo, xi_hi = float(xi_span[0]), float(xi_span[1])
    if not dxi > 0.0:
        raise ValueError("dxi must be positive")
    if xi_lo > 0.0 or xi_hi < 0.0:
        raise ValueError("xi_span must contain the anchor xi = 0")
    if params.f(phi0) <= 0.0:
        raise ShootingError(f"degenerate diffusivity at the anchor: f({phi0:g}) <= 0")

    deg_l = deg_r = False
    phis_l = dphis_l = np.empty(0)
    phis_r = dphis_r = np.empty(0)
    if xi_lo < 0.0:
        _, _, deg_l, phis_l, dphis_l = _march(params, phi0, slope0, xi_lo, dxi, True)
    if xi_hi > 0.0:
        _, _, deg_r, phis_r, dphis_r = _march(params, phi0, slope0, xi_hi, dxi, True)

    xi_left = -np.arange(1, phis_l.size + 1) * (abs(xi_lo) / max(phis_l.size, 1))
    xi_right = np.arange(1, phis_r.size + 1) * (xi_hi / max(phis_r.size, 1))
    xi = np.concatenate([xi_left[::-1], [0.0], xi_right])
    phi = np.concatenate([phis_l[::-1], [phi0], phis_r])
    dphi = np.concatenate([dphis_l[::-1], [slope0], dphis_r])
    return OdeTrajectory(xi=xi, phi=phi, dphi=dphi,
                         degenerate_left=deg_l, degenerate_right=deg_r)


def _xi_max(params: ModelParams, tol: float) -> float:
    """Domain half-width so the conservative envelope exp(-xi^2/(4 f_max))
    drops below tol/10."""
    f_max = params.a + abs(params.df()) * max(abs(params.u_minus), abs(params.u_plus))
    return math.sqrt(4.0 * f_max * math.log(10.0 / tol))


def _shoot(params, phi0, slope0, xi_max, dxi, left=True, right=True):
    """Far-field values reached from the anchor; degenerate directions map to
    an overshoot marker so bisection can step back."""
    lv = rv = None
    if left:
        lv, _, deg, _, _ = _march(params, phi0, slope0, -xi_max, dxi, False)
        if deg:
            lv = math.inf * (1.0 if slope0 < 0 else -1.0)
    if right:
        rv, _, deg, _, _ = _march(params, phi0, slope0, xi_max, dxi, False)
        if deg:
            rv = math.inf * (1.0 if slope0 > 0 else -1.0)
    return lv, rv


def _constant_profile(params: ModelParams, value: float, halfline: bool) -> Profile:
    span = 10.0
    grid = build_grid(0.0 if halfline else -span, span if halfline else 2 * span, 201)
    n = grid.n
    return Profile(
        xi_grid=grid,
        phi=np.full(n, value),
        dphi=np.zeros(n),
        u_minus=value if not halfline else params.u_minus,
        u_plus=value,
        anchor=ProfileAnchor(xi0=0.0, phi0=value, slope0=0.0),
        envelope=None,
        residual_left=0.0,
        residual_right=0.0,
        halfline=halfline,
    )


def solve_profile_cauchy(params: ModelParams, tol: float = 1e-8,
                         dxi: Optional[float] = None) -> Profile:
    """Construct the full-line profile by nested bisection shooting.

    Outer bisection moves phi(0) within [min(u_pm), max(u_pm)] to hit the
    right limit u_+; for each candidate, an inner bisection on phi'(0) hits
    the left limit u_-.  Both limits depend monotonically on the anchor
    values for this monotone equation, so plain bisection is globally
    convergent.
    """
    if not 0.0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    um, up = params.u_minus, params.u_plus
    if um == up:
        return _constant_profile(params, up, halfline=False)

    xi_max = _xi_max(params, tol)
    if dxi is None:
        dxi = 1e-3 * xi_max
    sgn = 1.0 if up > um else -1.0
    slope_scale = abs(up - um) / (2.0 * math.sqrt(math.pi * params.a))

    def inner(phi0):
        """Slope magnitude m with left limit u_-; returns the inside-bracket
        endpoint so the profile approaches u_- without crossing it."""
        def left_gap(m):
            lv, _ = _shoot(params, phi0, sgn * m, xi_max, dxi, right=False)
            return (lv - um) * sgn  # >= 0 while the left limit is inside

        m_lo, gap_lo = 0.0, (phi0 - um) * sgn
        if gap_lo <= tol:
            return 0.0, gap_lo
        m_hi = max(slope_scale, tol)
        for _ in range(60):
            if left_gap(m_hi) < 0.0:
                break
            m_hi *= 2.0
        else:
            raise ShootingError("could not bracket the left far-field limit")
        for _ in range(MAX_BISECTIONS):
            mid = 0.5 * (m_lo + m_hi)
            gap = left_gap(mid)
            if gap >= 0.0:
                m_lo, gap_lo = mid, gap
            else:
                m_hi = mid
            if gap_lo <= tol:
                return m_lo, gap_lo
        raise ShootingError(
            f"inner bisection stalled: left residual {gap_lo:g} > tol {tol:g}"
        )

    # outer bracket in theta with phi0 = u_- + theta*(u_+ - u_-)
    th_lo, th_hi = 0.0, 1.0
    best = None
    for _ in range(MAX_BISECTIONS):
        th = 0.5 * (th_lo + th_hi)
        phi0 = um + th * (up - um)
        m, gap_left = inner(phi0)
        _, rv = _shoot(params, phi0, sgn * m, xi_max, dxi, left=False)
        gap_right = (rv - up) * sgn  # <= 0 while the right limit is inside
        if gap_right <= 0.0:
            th_lo = th
            best = (phi0, sgn * m, gap_left, -gap_right)
            if -gap_right <= tol:
                break
        else:
            th_hi = th
    else:
        raise ShootingError(
            "outer bisection exhausted its iteration budget; "
            f"bracket [{th_lo:g}, {th_hi:g}], residuals unknown"
        )

    phi0, slope0, res_l, res_r = best
    traj = integrate_profile_ode(params, phi0, slope0, (-xi_max, xi_max), dxi)
    if traj.degenerate_left or traj.degenerate_right:
        raise ShootingError("converged anchor still hit degenerate diffusivity")
    return _finalize(params, traj, um, up, phi0, slope0, res_l, res_r, False)


def solve_profile_halfline(params: ModelParams, beta: float,
                           tol: float = 1e-8, dxi: Optional[float] = None) -> Profile:
    """Profile on xi >= 0 with phi(0) = beta and phi(+inf) = u_+.

    beta must lie between u_- and u_+ (endpoints allowed); the wave it
    generates keeps the boundary value beta for all time because xi = 0
    exactly at x = 0.
    """
    if not 0.0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    um, up = params.u_minus, params.u_plus
    lo, hi = min(um, up), max(um, up)
    if not lo <= beta <= hi:
        raise ValueError(f"beta = {beta:g} must lie in [{lo:g}, {hi:g}]")
    if beta == up:
        return _constant_profile(params, up, halfline=True)

    xi_max = _xi_max(params, tol)
    if dxi is None:
        dxi = 1e-3 * xi_max
    sgn = 1.0 if up > beta else -1.0
    slope_scale = abs(up - beta) / math.sqrt(math.pi * params.a)

    def right_gap(m):
        _, rv = _shoot(params, beta, sgn * m, xi_max, dxi, left=False)
        return (rv - up) * sgn  # <= 0 while the right limit is inside

    m_lo, gap_lo = 0.0, (beta - up) * sgn
    m_hi = max(slope_scale, tol)
    for _ in range(60):
        if right_gap(m_hi) > 0.0:
            break
        m_hi *= 2.0
    else:
        raise ShootingError("could not bracket the far-field limit")
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (m_lo + m_hi)
        gap = right_gap(mid)
        if gap <= 0.0:
            m_lo, gap_lo = mid, gap
        else:
            m_hi = mid
        if -gap_lo <= tol:
            break
    else:
        raise ShootingError(f"bisection stalled: residual {-gap_lo:g} > tol {tol:g}")

    slope0 = sgn * m_lo
    traj = integrate_profile_ode(params, beta, slope0, (0.0, xi_max), dxi)
    if traj.degenerate_right:
        raise ShootingError("converged slope still hit degenerate diffusivity")
    return _finalize(params, traj, um, up, beta, slope0, 0.0, -gap_lo, True)


def _finalize(params, traj, um, up, phi0, slope0, res_l, res_r, halfline) -> Profile:
    xi = traj.xi
    grid = Grid(x0=float(xi[0]), dx=float(xi[1] - xi[0]), n=xi.size)
    prof = Profile(
        xi_grid=grid,
        phi=traj.phi,
        dphi=traj.dphi,
        u_minus=um,
        u_plus=up,
        anchor=ProfileAnchor(xi0=0.0, phi0=float(phi0), slope0=float(slope0)),
        envelope=None,
        residual_left=float(res_l),
        residual_right=float(res_r),
        halfline=halfline,
    )
    return dataclasses.replace(prof, envelope=fit_envelope(prof))


def fit_envelope(profile: Profile) -> EnvelopeFit:
    """Least-squares line through (xi^2, log|phi'|) on samples with |phi'| > 1e-12.

    Returns the envelope amplitude relative to |u_+ - u_-|, the Gaussian rate
    c0 = -slope, and the coefficient of determination of the fit.
    """
    if profile.is_constant:
        raise ValueError("constant profiles have no envelope")
    mask = np.abs(profile.dphi) > 1e-12
    if mask.sum() < 8:
        raise ValueError("too few non-vanishing slope samples for an envelope fit")
    x = profile.xi_grid.nodes[mask] ** 2
    y = np.log(np.abs(profile.dphi[mask]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    c_amp = math.exp(intercept) / abs(profile.u_plus - profile.u_minus)
    return EnvelopeFit(c_amp=float(c_amp), c0=float(-slope), r2=float(r2))


def ode_residual(profile: Profile, params: ModelParams) -> float:
    """Max-norm residual of (f(phi)phi')' + (xi/2)phi' on the stored samples.

    Uses 4th-order central differencing of the sampled flux f(phi)phi' so the
    reported number reflects the integration error, not the stencil's.
    """
    xi = profile.xi_grid.nodes
    g = params.f(profile.phi) * profile.dphi
    h = profile.xi_grid.dx
    i = np.arange(2, xi.size - 2)
    dg = (g[i - 2] - 8.0 * g[i - 1] + 8.0 * g[i + 1] - g[i + 2]) / (12.0 * h)
    res = dg + 0.5 * xi[i] * profile.dphi[i]
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# wave evaluation


def _hermite(grid: Grid, y: np.ndarray, dy: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Piecewise-cubic Hermite interpolation, clamped to end values outside."""
    h = grid.dx
    pos = (x - grid.x0) / h
    idx = np.clip(np.floor(pos).astype(int), 0, grid.n - 2)
    s = pos - idx
    s = np.clip(s, 0.0, 1.0)
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return (h00 * y[idx] + h * h10 * dy[idx]
            + h01 * y[idx + 1] + h * h11 * dy[idx + 1])


def _term_table(k: int, j: int) -> dict:
    """Expand d^k/dx^k d^j/dt^j of phi(x/sqrt(1+t)) as a polynomial table.

    Every term of the result shares the prefactor (1+t)^(-(k/2+j)); the table
    maps (p, q) -> coefficient of xi^p * phi^(q)(xi).
    """
    terms = {(0, 0): 1.0}
    for _ in range(k):
        new: dict = {}
        for (p, q), c in terms.items():
            if p > 0:
                new[(p - 1, q)] = new.get((p - 1, q), 0.0) + c * p
            new[(p, q + 1)] = new.get((p, q + 1), 0.0) + c
        terms = new
    r = 0.5 * k
    for _ in range(j):
        new = {}
        for (p, q), c in terms.items():
            c0 = -c * (0.5 * p + r)
            if c0 != 0.0:
                new[(p, q)] = new.get((p, q), 0.0) + c0
            new[(p + 1, q + 1)] = new.get((p + 1, q + 1), 0.0) - 0.5 * c
        terms = new
        r += 1.0
    return terms


@dataclass(frozen=True)
class DiffusionWave:
    """A profile together with its coefficients; rho_bar = (mu/lam) u_bar."""

    profile: Profile
    params: ModelParams

    def __post_init__(self):
        if np.any(self.params.f(self.profile.phi) <= 0.0):
            raise ValueError("profile samples violate f(phi) > 0")

    @cached_property
    def _d2phi_nodes(self) -> np.ndarray:
        xi = self.profile.xi_grid.nodes
        d2, _, _ = _phi_high_derivs(self.params, xi, self.profile.phi, self.profile.dphi)
        return d2

    def phi_derivs(self, xi, max_order: int):
        """phi^(0..max_order) at arbitrary xi (cubic Hermite between samples,
        higher orders from the profile equation)."""
        xi = np.asarray(xi, dtype=float)
        prof = self.profile
        if prof.is_constant:
            out = [np.full(xi.shape, prof.u_plus)]
            out += [np.zeros(xi.shape) for _ in range(max_order)]
            return out
        phi = _hermite(prof.xi_grid, prof.phi, prof.dphi, xi)
        out = [phi]
        if max_order >= 1:
            dphi = _hermite(prof.xi_grid, prof.dphi, self._d2phi_nodes, xi)
            # outside the sampled span the profile has flattened to its limits
            lo, hi = prof.xi_grid.x0, prof.xi_grid.x_end
            outside = (xi < lo) | (xi > hi)
            if np.any(outside):
                dphi = np.where(outside, 0.0, dphi)
            out.append(dphi)
        if max_order >= 2:
            d2, d3, d4 = _phi_high_derivs(self.params, xi, out[0], out[1])
            out.extend([d2, d3, d4][: max_order - 1])
        return out


def _phi_high_derivs(params: ModelParams, xi, phi, dphi):
    """phi'', phi''', phi'''' obtained by differentiating the profile equation."""
    f = params.f(phi)
    fp = params.df()
    d2 = -(0.5 * xi * dphi + fp * dphi * dphi) / f
    d3 = -(0.5 * dphi + 0.5 * xi * d2 + 3.0 * fp * dphi * d2) / f
    d4 = -(d2 + 0.5 * xi * d3 + 3.0 * fp * d2 * d2 + 4.0 * fp * dphi * d3) / f
    return d2, d3, d4


def wave_eval(wave: DiffusionWave, x, t, k: int = 0, j: int = 0):
    """d^k/dx^k d^j/dt^j of the wave u_bar at (x, t); vectorized over x.

    Spatial order k <= 4 and time order j <= 2 with k + 2j <= 4 are
    supported; everything reduces to xi-polynomials times profile
    derivatives, scaled by (1+t)^(-(k/2+j)).
    """
    if not (0 <= k <= 4 and 0 <= j <= 2 and k + 2 * j <= 4):
        raise ValueError(f"unsupported derivative order (k={k}, j={j})")
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be non-negative")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xi = np.atleast_1d(x) / math.sqrt(1.0 + t)
    terms = _term_table(k, j)
    max_q = max(q for (_, q) in terms)
    derivs = wave.phi_derivs(xi, max_q)
    acc = np.zeros(xi.shape)
    for (p, q), c in terms.items():
        acc += c * xi**p * derivs[q]
    acc *= (1.0 + t) ** (-(0.5 * k + j))
    return float(acc[0]) if scalar else acc


def rho_bar_eval(wave: DiffusionWave, x, t, k: int = 0, j: int = 0):
    """Same derivative of the chemical wave rho_bar = (mu/lam) u_bar."""
    return wave.params.mu / wave.params.lam * wave_eval(wave, x, t, k, j)


def check_decay_table(wave: DiffusionWave, times, k: int, j: int, p) -> dict:
    """Fit the observed decay exponent of || d^k_x d^j_t u_bar ||_p in (1+t).

    The norm is evaluated on a fixed grid wide enough to contain the wave at
    every requested time (width >= 10*sqrt(1+t_max)); the predicted exponent
    is -k/2 - j + 1/(2p), with the 1/(2p) term dropped for p = inf.
    """
    if k + j < 1:
        raise ValueError("need k + j >= 1; the wave itself does not decay")
    times = np.sort(np.asarray(times, dtype=float))
    if times.size < 4 or (1.0 + times[-1]) < 10.0 * (1.0 + times[0]):
        raise ValueError("times must span at least one decade in 1+t")
    width = 10.0 * math.sqrt(1.0 + times[-1])
    dx = min(0.05 * math.sqrt(1.0 + times[0]), width / 512.0)
    n = int(math.ceil((width if wave.profile.halfline else 2 * width) / dx)) + 1
    grid = build_grid(0.0 if wave.profile.halfline else -width,
                      width if wave.profile.halfline else 2 * width, n)
    xs = grid.nodes
    norms = np.array([lp_norm(wave_eval(wave, xs, t, k, j), grid, p) for t in times])
    predicted = -0.5 * k - j + (0.0 if p in (math.inf, "inf") else 1.0 / (2.0 * float(p)))
    if np.max(norms) < 1e-14:
        return {"observed_exponent": math.nan, "predicted_exponent": predicted,
                "r2": math.nan, "degenerate": True}
    lt = np.log1p(times)
    ln = np.log(norms)
    slope, intercept = np.polyfit(lt, ln, 1)
    resid = ln - (slope * lt + intercept)
    ss = float(np.sum((ln - ln.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return {"observed_exponent": float(slope), "predicted_exponent": predicted,
            "r2": r2, "degenerate": False}


# ---------------------------------------------------------------------------
# export / import


def save_profile(path, profile: Profile, params: ModelParams) -> None:
    """Columnar text export (xi, phi, dphi) with params and anchor in the header."""
    env = profile.envelope
    lines = [
        "# diffwave profile v1",
        f"# a={params.a!r} b={params.b!r} lambda={params.lam!r} "
        f"mu={params.mu!r} kappa={params.kappa!r}",
        f"# u_minus={params.u_minus!r} u_plus={params.u_plus!r}",
        f"# xi0={profile.anchor.xi0!r} phi0={profile.anchor.phi0!r} "
        f"slope0={profile.anchor.slope0!r}",
        f"# residual_left={profile.residual_left!r} "
        f"residual_right={profile.residual_right!r}",
        f"# halfline={int(profile.halfline)}",
    ]
    if env is not None:
        lines.append(f"# envelope c_amp={env.c_amp!r} c0={env.c0!r} r2={env.r2!r}")
    lines.append("# columns: xi phi dphi")
    xs = profile.xi_grid.nodes
    for i in range(profile.xi_grid.n):
        lines.append(f"{float(xs[i])!r} {float(profile.phi[i])!r} "
                     f"{float(profile.dphi[i])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile(path) -> tuple[Profile, ModelParams]:
    """Inverse of save_profile; reconstructs the profile without re-shooting."""
    meta: dict = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if body.startswith("envelope"):
                    body = body[len("envelope"):].strip()
                for tok in body.split():
                    if "=" in tok:
                        key, val = tok.split("=", 1)
                        meta[key] = val
                continue
            rows.append([float(v) for v in line.split()])
    if not rows:
        raise ValueError(f"profile file {path} has no samples")
    data = np.array(rows)
    params = ModelParams(
        a=float(meta["a"]), b=float(meta["b"]), lam=float(meta["lambda"]),
        mu=float(meta["mu"]), kappa=float(meta["kappa"]),
        u_minus=float(meta["u_minus"]), u_plus=float(meta["u_plus"]),
    )
    xi = data[:, 0]
    grid = Grid(x0=float(xi[0]), dx=float(xi[1] - xi[0]), n=xi.size)
    envelope = None
    if "c_amp" in meta:
        envelope = EnvelopeFit(c_amp=float(meta["c_amp"]), c0=float(meta["c0"]),
                               r2=float(meta["r2"]))
    halfline = bool(int(meta.get("halfline", "0")))
    profile = Profile(
        xi_grid=grid, phi=data[:, 1], dphi=data[:, 2],
        u_minus=params.u_minus,
        u_plus=params.u_plus,
        anchor=ProfileAnchor(xi0=float(meta["xi0"]), phi0=float(meta["phi0"]),
                             slope0=float(meta["slope0"])),
        envelope=envelope,
        residual_left=float(meta["residual_left"]),
        residual_right=float(meta["residual_right"]),
        halfline=halfline,
    )
    return profile, params
