"""IMEX time integration of the chemotaxis system on truncated domains.

Three problem kinds share one scheme: the truncated Cauchy problem (both ends
clamped to the far-field states), the Dirichlet half-line problem (boundary
values pinned at x = 0), and the null-Neumann half-line problem near a
constant state.  Each step treats diffusion and the chemical decay backward
Euler (tridiagonal solves) and the chemotaxis flux explicitly in conservative
half-node form, so the advective term is the only time-step restriction and
discrete u-mass telescopes to boundary fluxes.

A run is strictly sequential in time; distinct runs share nothing.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import Grid, ModelParams, State, TridiagFactor, check_field, dx1
from .profile import DiffusionWave, rho_bar_eval, wave_eval

__all__ = [
    "ConfigError",
    "BlowUpError",
    "GaussianBump",
    "SmoothedStep",
    "FilteredNoise",
    "ZeroShape",
    "InitialData",
    "CauchyProblem",
    "DirichletProblem",
    "NeumannProblem",
    "ProblemKind",
    "RunConfig",
    "RunResult",
    "init_state",
    "step",
    "apply_boundary",
    "run",
]

BLOWUP_CAP = 1e6
COMPAT_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid run configuration; raised before any stepping happens."""


class BlowUpError(RuntimeError):
    """Solution exceeded the blow-up cap or went non-finite."""

    def __init__(self, message: str, t: float, last_state: Optional[State] = None):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


# ---------------------------------------------------------------------------
# initial perturbation shapes


@dataclass(frozen=True)
class GaussianBump:
    amp: float
    center: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ConfigError("gaussian sigma must be positive")

    def sample(self, x: np.ndarray) -> np.ndarray:
        return self.amp * np.exp(-((x - self.center) ** 2) / (2.0 * self.sigma**2))

    def support_radius(self) -> float:
        return abs(self.center) + 8.0 * self.sigma


@dataclass(frozen=True)
class SmoothedStep:
    """Smoothed top-hat: rises over a ramp before center-width, falls after
    center+width, so the perturbation still vanishes at infinity."""

    amp: float
    center: float
    width: float
    ramp: float

    def __post_init__(self):
        if not (self.width > 0.0 and self.ramp > 0.0):
            raise ConfigError("step width and ramp must be positive")

    def sample(self, x: np.ndarray) -> np.ndarray:
        s = (np.tanh((x - self.center + self.width) / self.ramp)
             - np.tanh((x - self.center - self.width) / self.ramp))
        return 0.5 * self.amp * s

    def support_radius(self) -> float:
        return abs(self.center) + self.width + 12.0 * self.ramp


@dataclass(frozen=True)
class FilteredNoise:
    """Low-pass filtered seeded noise, tapered by a sin^2 window so both the
    value and the slope vanish at the domain ends (boundary compatibility)."""

    amp: float
    seed: int
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 1:
            raise ConfigError("noise cutoff must keep at least one mode")

    def sample(self, x: np.ndarray) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        raw = rng.standard_normal(x.size)
        spec = np.fft.rfft(raw)
        spec[self.cutoff + 1:] = 0.0
        smooth = np.fft.irfft(spec, n=x.size)
        span = x[-1] - x[0]
        window = np.sin(math.pi * (x - x[0]) / span) ** 2
        shaped = smooth * window
        peak = np.max(np.abs(shaped))
        if peak == 0.0:
            return np.zeros_like(x)
        return self.amp / peak * shaped

    def support_radius(self) -> float:
        # the window already forces decay at the ends
        return 0.0


@dataclass(frozen=True)
class ZeroShape:
    def sample(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)

    def support_radius(self) -> float:
        return 0.0


Shape = Union[GaussianBump, SmoothedStep, FilteredNoise, ZeroShape]


@dataclass(frozen=True)
class InitialData:
    """Independent perturbation shapes for w0 (chemical) and z0 (bacteria)."""

    w0: Shape = field(default_factory=ZeroShape)
    z0: Shape = field(default_factory=ZeroShape)

    def support_radius(self) -> float:
        return max(self.w0.support_radius(), self.z0.support_radius())


# ---------------------------------------------------------------------------
# problem kinds


@dataclass(frozen=True)
class CauchyProblem:
    wave: DiffusionWave
    half_width: float


@dataclass(frozen=True)
class DirichletProblem:
    beta: float
    wave: DiffusionWave
    width: float


@dataclass(frozen=True)
class NeumannProblem:
    width: float


ProblemKind = Union[CauchyProblem, DirichletProblem, NeumannProblem]


def is_halfline(kind: ProblemKind) -> bool:
    return isinstance(kind, (DirichletProblem, NeumannProblem))


def reference_state(kind: ProblemKind, params: ModelParams, x: np.ndarray, t: float):
    """The asymptotic object perturbations are measured against: the wave for
    Cauchy/Dirichlet kinds, the constant state for Neumann."""
    if isinstance(kind, NeumannProblem):
        u = np.full(x.shape, params.u_plus)
        return u, params.mu / params.lam * u
    u = wave_eval(kind.wave, x, t, 0, 0)
    return u, rho_bar_eval(kind.wave, x, t, 0, 0)


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; validated eagerly so bad configs never step."""

    params: ModelParams
    kind: ProblemKind
    grid: Grid
    dt: float
    t_final: float
    output_times: tuple
    initial: InitialData
    upwind: bool = False

    def __post_init__(self):
        object.__setattr__(self, "output_times",
                           tuple(float(t) for t in self.output_times))
        if not self.dt > 0.0:
            raise ConfigError("dt must be positive")
        if self.t_final < 0.0:
            raise ConfigError("t_final must be non-negative")
        for t in self.output_times:
            if t < 0.0 or t > self.t_final + 1e-12:
                raise ConfigError(f"output time {t:g} outside [0, t_final]")
        if sorted(self.output_times) != list(self.output_times):
            raise ConfigError("output_times must be sorted")
        self._check_domain()
        self._check_dt()

    def _check_domain(self):
        g = self.grid
        kind = self.kind
        if isinstance(kind, CauchyProblem):
            if abs(g.x0 + kind.half_width) > 1e-9 * max(1.0, kind.half_width):
                raise ConfigError("Cauchy grid must span [-half_width, half_width]")
            if abs(g.length - 2.0 * kind.half_width) > 1e-9 * max(1.0, kind.half_width):
                raise ConfigError("Cauchy grid must span [-half_width, half_width]")
            needed = 8.0 * math.sqrt(1.0 + self.t_final) + self.initial.support_radius()
            if kind.half_width < needed - 1e-9:
                raise ConfigError(
                    f"half_width {kind.half_width:g} too small; need >= "
                    f"8*sqrt(1+t_final) + support radius = {needed:g}"
                )
        else:
            if abs(g.x0) > 1e-12:
                raise ConfigError("half-line grids must start at x = 0")
            if abs(g.length - kind.width) > 1e-9 * max(1.0, kind.width):
                raise ConfigError("grid length must equal the problem width")
        if isinstance(kind, DirichletProblem):
            lo = min(self.params.u_minus, self.params.u_plus)
            hi = max(self.params.u_minus, self.params.u_plus)
            if not lo <= kind.beta <= hi:
                raise ConfigError(
                    f"beta = {kind.beta:g} must lie in [{lo:g}, {hi:g}]")

    def _check_dt(self):
        _, rho0 = _initial_fields(self)
        rho_x_max = float(np.max(np.abs(dx1(rho0, self.grid))))
        advective = 0.5 * self.grid.dx / max(1.0, self.params.kappa * rho_x_max)
        limit = min(advective, self.grid.dx)
        if self.dt > limit * (1.0 + 1e-9):
            raise ConfigError(
                f"dt = {self.dt:g} violates the advective bound {limit:g} "
                f"(dx = {self.grid.dx:g}, kappa*max|rho_x| = "
                f"{self.params.kappa * rho_x_max:g})"
            )


def max_stable_dt(params: ModelParams, grid: Grid, kind: ProblemKind,
                  initial: InitialData) -> float:
    """Largest dt the advective bound allows for this configuration."""
    x = grid.nodes
    w0 = initial.w0.sample(x)
    _, rho_ref = reference_state(kind, params, x, 0.0)
    rho0 = rho_ref + w0
    rho_x_max = float(np.max(np.abs(dx1(rho0, grid))))
    return min(0.5 * grid.dx / max(1.0, params.kappa * rho_x_max), grid.dx)


def _initial_fields(config: RunConfig):
    x = config.grid.nodes
    u_ref, rho_ref = reference_state(config.kind, config.params, x, 0.0)
    return u_ref + config.initial.z0.sample(x), rho_ref + config.initial.w0.sample(x)


def init_state(config: RunConfig) -> State:
    """Reference object at t = 0 plus the configured perturbations, with
    boundary compatibility enforced to 1e-12."""
    u0, rho0 = _initial_fields(config)
    x = config.grid.nodes
    w0 = config.initial.w0.sample(x)
    z0 = config.initial.z0.sample(x)
    kind = config.kind
    if isinstance(kind, CauchyProblem):
        for name, pert in (("w0", w0), ("z0", z0)):
            for node in (0, -1):
                if abs(pert[node]) > COMPAT_TOL:
                    raise ConfigError(
                        f"{name} = {pert[node]:.3e} at the truncation boundary; "
                        "perturbations must vanish at the clamped ends")
    elif isinstance(kind, DirichletProblem):
        for name, pert in (("w0", w0), ("z0", z0)):
            if abs(pert[0]) > COMPAT_TOL:
                raise ConfigError(f"{name}(0) = {pert[0]:.3e} violates the "
                                  "boundary compatibility (w,z)(0) = 0")
    else:
        for name, pert in (("w0", w0), ("z0", z0)):
            slope = float(dx1(pert, config.grid)[0])
            if abs(slope) > COMPAT_TOL:
                raise ConfigError(f"{name}'(0) = {slope:.3e} violates the "
                                  "null-Neumann compatibility")
    return State(grid=config.grid, u=u0, rho=rho0, t=0.0)


# ---------------------------------------------------------------------------
# stepping


def _chemo_divergence(u, rho, dx, kappa, neumann_left, upwind):
    """Divergence of the chemotaxis flux kappa*u*rho_x in half-node form."""
    n = u.size
    div = np.zeros(n)
    if kappa == 0.0:
        return div
    v = kappa * (rho[1:] - rho[:-1]) / dx  # face velocity at i+1/2
    if upwind:
        uf = np.where(v > 0.0, u[:-1], u[1:])
    else:
        uf = 0.5 * (u[:-1] + u[1:])
    flux = v * uf
    div[1:-1] = (flux[1:] - flux[:-1]) / dx
    if neumann_left:
        # ghost reflection u[-1]=u[1], rho[-1]=rho[1] makes the ghost face
        # flux the negative of the first interior face flux
        div[0] = 2.0 * flux[0] / dx
    return div


def _clamp_values(kind: ProblemKind, params: ModelParams):
    """(left, right) clamp pairs (u, rho); None for a non-clamped end."""
    ratio = params.mu / params.lam
    if isinstance(kind, CauchyProblem):
        return ((params.u_minus, ratio * params.u_minus),
                (params.u_plus, ratio * params.u_plus))
    if isinstance(kind, DirichletProblem):
        return ((kind.beta, ratio * kind.beta),
                (params.u_plus, ratio * params.u_plus))
    return (None, (params.u_plus, ratio * params.u_plus))


class Stepper:
    """Prefactored IMEX stepper for one (params, grid, dt, kind) combination.

    forcing(x, t) -> (S_u, S_rho) adds explicit source terms (used by the
    manufactured-solution checks); clamp(t) -> ((u,rho) left, (u,rho) right)
    replaces the kind's boundary treatment with time-dependent clamps at both
    ends, in which case kind may be None.
    """

    def __init__(self, params: ModelParams, grid: Grid, dt: float,
                 kind: Optional[ProblemKind] = None, upwind: bool = False,
                 forcing: Optional[Callable] = None,
                 clamp: Optional[Callable] = None):
        if kind is None and clamp is None:
            raise ValueError("need a problem kind or an explicit clamp")
        self.params = params
        self.grid = grid
        self.dt = dt
        self.upwind = upwind
        self.forcing = forcing
        self.clamp = clamp
        self.x = grid.nodes
        self.neumann_left = isinstance(kind, NeumannProblem) and clamp is None
        self.static_clamps = (_clamp_values(kind, params)
                              if clamp is None else None)

        n = grid.n
        ru = dt * params.a / grid.dx**2
        rr = dt * params.b / grid.dx**2

        lower_u = np.full(n - 1, -ru)
        diag_u = np.full(n, 1.0 + 2.0 * ru)
        upper_u = np.full(n - 1, -ru)
        lower_r = np.full(n - 1, -rr)
        diag_r = np.full(n, 1.0 + 2.0 * rr + dt * params.lam)
        upper_r = np.full(n - 1, -rr)

        if self.neumann_left:
            # ghost reflection folded into the first row
            upper_u[0] = -2.0 * ru
            upper_r[0] = -2.0 * rr
        else:
            diag_u[0] = 1.0
            upper_u[0] = 0.0
            diag_r[0] = 1.0
            upper_r[0] = 0.0
        diag_u[-1] = 1.0
        lower_u[-1] = 0.0
        diag_r[-1] = 1.0
        lower_r[-1] = 0.0

        self.factor_u = TridiagFactor(lower_u, diag_u, upper_u)
        self.factor_rho = TridiagFactor(lower_r, diag_r, upper_r)

    @classmethod
    def from_config(cls, config: RunConfig) -> "Stepper":
        return cls(config.params, config.grid, config.dt, config.kind,
                   upwind=config.upwind)

    def _boundary_values(self, t_next):
        if self.clamp is not None:
            return self.clamp(t_next)
        return self.static_clamps

    def step(self, state: State) -> State:
        p = self.params
        dt = self.dt
        t_next = state.t + dt
        u, rho = state.u, state.rho

        div = _chemo_divergence(u, rho, self.grid.dx, p.kappa,
                                self.neumann_left, self.upwind)
        su = srho = None
        if self.forcing is not None:
            su, srho = self.forcing(self.x, t_next)
        rhs_u = u - dt * div
        if su is not None:
            rhs_u = rhs_u + dt * su
        left, right = self._boundary_values(t_next)
        if left is not None:
            rhs_u[0] = left[0]
        rhs_u[-1] = right[0]
        u_new = self.factor_u.solve(rhs_u)

        rhs_rho = rho + dt * p.mu * u_new
        if srho is not None:
            rhs_rho = rhs_rho + dt * srho
        if left is not None:
            rhs_rho[0] = left[1]
        rhs_rho[-1] = right[1]
        rho_new = self.factor_rho.solve(rhs_rho)

        if self.neumann_left:
            # one-sided closure: zero the O(dx^2) boundary derivative exactly
            u_new[0] = (4.0 * u_new[1] - u_new[2]) / 3.0
            rho_new[0] = (4.0 * rho_new[1] - rho_new[2]) / 3.0

        bad = not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(rho_new)))
        if bad or max(np.max(np.abs(u_new)), np.max(np.abs(rho_new))) > BLOWUP_CAP:
            raise BlowUpError(f"solution blew up at t = {t_next:g}", t=t_next,
                              last_state=state)
        return State(grid=self.grid, u=u_new, rho=rho_new, t=t_next)


def step(state: State, config: RunConfig) -> State:
    """Advance one IMEX step.  For long runs prefer run(); this convenience
    wrapper rebuilds the matrix factorizations on every call."""
    if max(np.max(np.abs(state.u)), np.max(np.abs(state.rho))) > BLOWUP_CAP:
        raise BlowUpError(f"state already beyond the blow-up cap at t = {state.t:g}",
                          t=state.t, last_state=state)
    return Stepper.from_config(config).step(state)


def apply_boundary(state: State, kind: ProblemKind, params: ModelParams) -> State:
    """Re-apply the boundary closure of the given kind to a state."""
    u = state.u.copy()
    rho = state.rho.copy()
    left, right = _clamp_values(kind, params)
    if left is None:
        u[0] = (4.0 * u[1] - u[2]) / 3.0
        rho[0] = (4.0 * rho[1] - rho[2]) / 3.0
    else:
        u[0], rho[0] = left
    u[-1], rho[-1] = right
    return State(grid=state.grid, u=u, rho=rho, t=state.t)


# ---------------------------------------------------------------------------
# runs


@dataclass(frozen=True)
class RunResult:
    """Snapshots at the requested output times plus per-snapshot diagnostics."""

    config: RunConfig
    times: np.ndarray
    states: tuple
    max_u: np.ndarray
    max_rho: np.ndarray
    mass: np.ndarray
    wall_clock: np.ndarray
    n_steps: int

    @property
    def grid(self) -> Grid:
        return self.config.grid


def run(config: RunConfig) -> RunResult:
    """Step to t_final, capturing snapshots at the steps nearest the requested
    output times (recorded times are the step times actually reached)."""
    state = init_state(config)
    n_steps = int(round(config.t_final / config.dt)) if config.t_final > 0 else 0
    wanted = sorted({min(int(round(t / config.dt)), n_steps)
                     for t in config.output_times})
    if not wanted:
        wanted = [0, n_steps] if n_steps else [0]

    stepper = Stepper.from_config(config)
    t_start = _time.perf_counter()
    times, states, max_u, max_rho, mass, wall = [], [], [], [], [], []

    def record(s: State):
        times.append(s.t)
        states.append(s)
        max_u.append(float(np.max(np.abs(s.u))))
        max_rho.append(float(np.max(np.abs(s.rho))))
        mass.append(float(np.trapezoid(s.u, dx=config.grid.dx)))
        wall.append(_time.perf_counter() - t_start)

    if wanted[0] == 0:
        record(state)
    try:
        for k in range(1, n_steps + 1):
            state = stepper.step(state)
            if k in wanted:
                # pin the recorded time to the exact step multiple
                state = State(state.grid, state.u, state.rho, k * config.dt)
                record(state)
    except BlowUpError as exc:
        raise BlowUpError(str(exc), t=exc.t,
                          last_state=states[-1] if states else exc.last_state) from None
    return RunResult(
        config=config,
        times=np.array(times),
        states=tuple(states),
        max_u=np.array(max_u),
        max_rho=np.array(max_rho),
        mass=np.array(mass),
        wall_clock=np.array(wall),
        n_steps=n_steps,
    )
