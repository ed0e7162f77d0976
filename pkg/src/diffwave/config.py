"""Key = value experiment configs with a complete-defaults policy.

Every field has a default, so `simulate` runs from a one-line config (or an
empty one).  Unknown keys are rejected eagerly; nothing invalid reaches the
solver.  Fields marked "auto" are resolved from the rest of the
configuration at build time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .core import ModelParams, build_grid
from .profile import DiffusionWave
from .solver import (CauchyProblem, ConfigError, DirichletProblem,
                     FilteredNoise, GaussianBump, InitialData, NeumannProblem,
                     ProblemKind, RunConfig, SmoothedStep, ZeroShape,
                     max_stable_dt)

__all__ = ["ExperimentConfig", "parse_config_text", "load_config"]

_AUTO = None

PROBLEMS = ("cauchy", "dirichlet", "neumann")
SHAPES = ("none", "gaussian", "step", "noise")
REPORT_FORMATS = ("json", "text")


@dataclass
class ExperimentConfig:
    """One experiment: model coefficients, problem kind, discretization,
    initial perturbations, and analysis options.

    Optional fields default to "auto" (None) and are derived in the build
    helpers: domain widths from the truncation rule, dt from the advective
    bound, output times log-spaced, the energy weight from 2*mu^2/lam + 1,
    and the fit window from [t_final/10, t_final].
    """

    problem: str = "neumann"
    a: float = 1.0
    b: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    kappa: float = 1.0
    u_minus: float = -0.025
    u_plus: float = 0.025
    beta: float = 0.0
    half_width: Optional[float] = _AUTO
    width: Optional[float] = _AUTO
    dx: float = 0.2
    dt: Optional[float] = _AUTO
    t_final: float = 400.0
    n_outputs: int = 64
    output_times: Optional[tuple] = _AUTO
    upwind: bool = False

    w0_shape: str = "none"
    w0_amp: float = 0.01
    w0_center: Optional[float] = _AUTO
    w0_sigma: float = 2.0
    w0_width: float = 5.0
    w0_ramp: float = 1.0
    w0_seed: int = 12345
    w0_cutoff: int = 8

    z0_shape: str = "gaussian"
    z0_amp: float = 0.01
    z0_center: Optional[float] = _AUTO
    z0_sigma: float = 2.0
    z0_width: float = 5.0
    z0_ramp: float = 1.0
    z0_seed: int = 54321
    z0_cutoff: int = 8

    alpha: float = 0.125
    energy_k: Optional[float] = _AUTO
    fit_t_min: Optional[float] = _AUTO
    fit_t_max: Optional[float] = _AUTO

    profile_tol: float = 1e-8
    profile_dxi: Optional[float] = _AUTO
    profile_file: str = "profile.txt"

    figures: bool = True
    report_format: str = "json"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got "
                              f"{self.problem!r}")
        for name in ("w0_shape", "z0_shape"):
            if getattr(self, name) not in SHAPES:
                raise ConfigError(f"{name} must be one of {SHAPES}")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"report_format must be one of {REPORT_FORMATS}")
        if self.dx <= 0.0:
            raise ConfigError("dx must be positive")
        if self.t_final < 0.0:
            raise ConfigError("t_final must be non-negative")
        if self.n_outputs < 2:
            raise ConfigError("n_outputs must be at least 2")

    # -- building blocks ----------------------------------------------------

    def build_params(self) -> ModelParams:
        try:
            return ModelParams(a=self.a, b=self.b, lam=self.lam, mu=self.mu,
                               kappa=self.kappa, u_minus=self.u_minus,
                               u_plus=self.u_plus)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _shape(self, prefix: str, center: float):
        kind = getattr(self, prefix + "_shape")
        amp = getattr(self, prefix + "_amp")
        if kind == "none" or amp == 0.0:
            return ZeroShape()
        if kind == "gaussian":
            return GaussianBump(amp=amp, center=center,
                                sigma=getattr(self, prefix + "_sigma"))
        if kind == "step":
            return SmoothedStep(amp=amp, center=center,
                                width=getattr(self, prefix + "_width"),
                                ramp=getattr(self, prefix + "_ramp"))
        return FilteredNoise(amp=amp, seed=getattr(self, prefix + "_seed"),
                             cutoff=getattr(self, prefix + "_cutoff"))

    def _auto_center(self, prefix: str) -> float:
        c = getattr(self, prefix + "_center")
        if c is not None:
            return c
        if self.problem == "cauchy":
            return 0.0
        # half-line: keep the bump far enough from x = 0 that both its value
        # and slope are below the 1e-12 compatibility tolerance
        shape = getattr(self, prefix + "_shape")
        if shape == "gaussian":
            return 10.0 + 8.0 * getattr(self, prefix + "_sigma")
        if shape == "step":
            return (10.0 + getattr(self, prefix + "_width")
                    + 12.0 * getattr(self, prefix + "_ramp"))
        return 0.0

    def build_initial(self) -> InitialData:
        return InitialData(w0=self._shape("w0", self._auto_center("w0")),
                           z0=self._shape("z0", self._auto_center("z0")))

    def domain_extent(self, initial: InitialData) -> float:
        """half_width (cauchy) or width (half line), auto from the truncation
        rule 8 sqrt(1+t_final) + support radius."""
        explicit = self.half_width if self.problem == "cauchy" else self.width
        if explicit is not None:
            return explicit
        auto = 8.0 * math.sqrt(1.0 + self.t_final) + initial.support_radius()
        return math.ceil(auto / self.dx) * self.dx

    def build_kind(self, wave: Optional[DiffusionWave],
                   initial: InitialData) -> ProblemKind:
        extent = self.domain_extent(initial)
        if self.problem == "cauchy":
            if wave is None:
                raise ConfigError("the Cauchy problem needs a wave profile")
            return CauchyProblem(wave=wave, half_width=extent)
        if self.problem == "dirichlet":
            if wave is None:
                raise ConfigError("the Dirichlet problem needs a wave profile")
            return DirichletProblem(beta=self.beta, wave=wave, width=extent)
        return NeumannProblem(width=extent)

    def build_output_times(self) -> tuple:
        if self.output_times is not None:
            return tuple(self.output_times)
        if self.t_final == 0.0:
            return (0.0,)
        t0 = min(1.0, self.t_final / 100.0)
        times = np.geomspace(t0, self.t_final, self.n_outputs)
        return (0.0, *times)

    def build_run_config(self, wave: Optional[DiffusionWave]) -> RunConfig:
        initial = self.build_initial()
        params = self.build_params()
        kind = self.build_kind(wave, initial)
        extent = self.domain_extent(initial)
        if self.problem == "cauchy":
            n = int(round(2.0 * extent / self.dx)) + 1
            grid = build_grid(-extent, 2.0 * extent, n)
        else:
            n = int(round(extent / self.dx)) + 1
            grid = build_grid(0.0, extent, n)
        dt = self.dt
        if dt is None:
            dt = max_stable_dt(params, grid, kind, initial)
            if self.t_final > 0:
                # land on t_final with a whole number of steps
                dt = self.t_final / max(1, math.ceil(self.t_final / dt))
        return RunConfig(params=params, kind=kind, grid=grid, dt=dt,
                         t_final=self.t_final,
                         output_times=self.build_output_times(),
                         initial=initial, upwind=self.upwind)

    def resolved_energy_k(self) -> float:
        if self.energy_k is not None:
            return self.energy_k
        return 2.0 * self.mu**2 / self.lam + 1.0

    def fit_window(self) -> tuple:
        lo = self.fit_t_min if self.fit_t_min is not None else self.t_final / 10.0
        hi = self.fit_t_max if self.fit_t_max is not None else self.t_final
        return (lo, hi)

    def override_seed(self, seed: int) -> None:
        self.w0_seed = seed
        self.z0_seed = seed

    def as_mapping(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            key = "lambda" if f.name == "lam" else f.name
            if val is None:
                out[key] = "auto"
            elif isinstance(val, bool):
                out[key] = "true" if val else "false"
            elif isinstance(val, tuple):
                out[key] = ",".join(f"{v:g}" for v in val)
            else:
                out[key] = val
        return out


_FIELD_BY_KEY = {("lambda" if f.name == "lam" else f.name): f
                 for f in fields(ExperimentConfig)}


def _parse_value(f, raw: str):
    raw = raw.strip()
    if raw.lower() == "auto":
        if "Optional" in str(f.type) or f.default is None:
            return None
        raise ConfigError(f"{f.name} does not accept 'auto'")
    base = str(f.type)
    if f.name == "output_times":
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if "bool" in base:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{f.name} expects a boolean, got {raw!r}")
    if "int" in base:
        return int(raw)
    if "float" in base:
        return float(raw)
    return raw


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse key = value lines; '#' starts a comment, blank lines ignored."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        f = _FIELD_BY_KEY.get(key)
        if f is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[f.name] = _parse_value(f, raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())
