import math

import numpy as np
import pytest

import diffwave as dw
from diffwave.solver import max_stable_dt

# Shooting and long runs are shared session-wide; everything they produce is
# immutable, so sharing is safe.


@pytest.fixture(scope="session")
def params_linear():
    return dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=0.0,
                          u_minus=-0.05, u_plus=0.05)


@pytest.fixture(scope="session")
def wave_linear(params_linear):
    prof = dw.solve_profile_cauchy(params_linear, tol=1e-8)
    return dw.DiffusionWave(prof, params_linear)


@pytest.fixture(scope="session")
def params_nonlinear():
    return dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0,
                          u_minus=-0.05, u_plus=0.05)


@pytest.fixture(scope="session")
def wave_nonlinear(params_nonlinear):
    prof = dw.solve_profile_cauchy(params_nonlinear, tol=1e-8)
    return dw.DiffusionWave(prof, params_nonlinear)


@pytest.fixture(scope="session")
def params_demo():
    # delta = |rho_+ - rho_-| + |u_+| + |u_-| = 0.1
    return dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0,
                          u_minus=-0.025, u_plus=0.025)


@pytest.fixture(scope="session")
def wave_demo(params_demo):
    prof = dw.solve_profile_cauchy(params_demo, tol=1e-8)
    return dw.DiffusionWave(prof, params_demo)


@pytest.fixture(scope="session")
def wave_demo_halfline(params_demo):
    prof = dw.solve_profile_halfline(params_demo, beta=0.0, tol=1e-8)
    return dw.DiffusionWave(prof, params_demo)


def build_cauchy_run(params, wave, t_final=400.0, dx=0.2, amp_w=0.01,
                     amp_z=0.01, sigma=2.0, n_outputs=64, dt=None,
                     extra_margin=0.0):
    half = 8.0 * math.sqrt(1.0 + t_final) + 8.0 * sigma + extra_margin
    half = math.ceil(half / dx) * dx
    n = int(round(2 * half / dx)) + 1
    grid = dw.build_grid(-half, 2 * half, n)
    kind = dw.CauchyProblem(wave=wave, half_width=half)
    initial = dw.InitialData(
        w0=dw.GaussianBump(amp=amp_w, center=0.0, sigma=sigma),
        z0=dw.GaussianBump(amp=amp_z, center=0.0, sigma=sigma))
    if dt is None:
        dt = max_stable_dt(params, grid, kind, initial)
        dt = t_final / math.ceil(t_final / dt)
    times = (0.0, *np.geomspace(min(1.0, t_final), t_final, n_outputs))
    return dw.RunConfig(params=params, kind=kind, grid=grid, dt=dt,
                        t_final=t_final, output_times=times, initial=initial)


def build_halfline_run(params, wave, problem, t_final=400.0, dx=0.2,
                       amp=0.01, sigma=2.0, center=None, n_outputs=64):
    if center is None:
        center = 10.0 + 8.0 * sigma
    width = 8.0 * math.sqrt(1.0 + t_final) + center + 8.0 * sigma
    width = math.ceil(width / dx) * dx
    n = int(round(width / dx)) + 1
    grid = dw.build_grid(0.0, width, n)
    if problem == "dirichlet":
        kind = dw.DirichletProblem(beta=0.0, wave=wave, width=width)
    else:
        kind = dw.NeumannProblem(width=width)
    initial = dw.InitialData(
        w0=dw.GaussianBump(amp=amp, center=center, sigma=sigma),
        z0=dw.GaussianBump(amp=amp, center=center, sigma=sigma))
    dt = max_stable_dt(params, grid, kind, initial)
    dt = t_final / math.ceil(t_final / dt)
    times = (0.0, *np.geomspace(min(1.0, t_final), t_final, n_outputs))
    return dw.RunConfig(params=params, kind=kind, grid=grid, dt=dt,
                        t_final=t_final, output_times=times, initial=initial)


@pytest.fixture(scope="session")
def cauchy_demo_run(params_demo, wave_demo):
    return dw.run(build_cauchy_run(params_demo, wave_demo))


@pytest.fixture(scope="session")
def dirichlet_demo_run(params_demo, wave_demo_halfline):
    return dw.run(build_halfline_run(params_demo, wave_demo_halfline,
                                     "dirichlet"))


@pytest.fixture(scope="session")
def neumann_demo_params():
    return dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0,
                          u_minus=0.0, u_plus=0.05)


@pytest.fixture(scope="session")
def neumann_demo_run(neumann_demo_params):
    return dw.run(build_halfline_run(neumann_demo_params, None, "neumann"))
