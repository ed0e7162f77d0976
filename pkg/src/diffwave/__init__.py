"""Numerical laboratory for nonlinear diffusion waves of the 1D Keller-Segel
system: self-similar profile construction, IMEX simulation of the Cauchy and
half-line problems, and decay/energy diagnostics."""

__version__ = "0.1.0"

from .core import (Grid, ModelParams, State, build_grid, dx1, dx2, l2_norm,
                   lp_norm, sobolev_norm, tridiag_solve)
from .profile import (DiffusionWave, Profile, check_decay_table, fit_envelope,
                      integrate_profile_ode, load_profile, rho_bar_eval,
                      save_profile, solve_profile_cauchy,
                      solve_profile_halfline, wave_eval)
from .solver import (CauchyProblem, DirichletProblem, FilteredNoise,
                     GaussianBump, InitialData, NeumannProblem, RunConfig,
                     RunResult, SmoothedStep, ZeroShape, apply_boundary,
                     init_state, run, step)
from .analysis import (EnergyLedger, PerturbSeries, RateFit, WeightKernel,
                       boundary_report, check_weighted_estimate, energy_ledger,
                       fit_decay_rate, heat_oracle, is_positive_definite,
                       manufactured_residual, norm_series, perturbation,
                       tail_vanishing_check, trig_target, weight_eval,
                       weight_identity_check, weighted_spacetime_integral)
from .config import ExperimentConfig, load_config, parse_config_text

__all__ = [name for name in dir() if not name.startswith("_")]
