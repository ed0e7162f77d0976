import math

import numpy as np
import pytest

import diffwave as dw
from diffwave.solver import (BlowUpError, ConfigError, FilteredNoise,
                             max_stable_dt)

from conftest import build_cauchy_run, build_halfline_run


def neumann_config(u_plus=0.05, width=50.0, dx=0.2, dt=0.1, t_final=10.0,
                   initial=None, output_times=None, kappa=1.0):
    p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=kappa,
                       u_minus=0.0, u_plus=u_plus)
    n = int(round(width / dx)) + 1
    grid = dw.build_grid(0.0, width, n)
    kind = dw.NeumannProblem(width=width)
    if initial is None:
        initial = dw.InitialData()
    if output_times is None:
        output_times = (0.0, t_final)
    return dw.RunConfig(params=p, kind=kind, grid=grid, dt=dt,
                        t_final=t_final, output_times=output_times,
                        initial=initial)


class TestShapes:
    def test_gaussian_sample(self):
        x = np.linspace(-5, 5, 11)
        b = dw.GaussianBump(amp=2.0, center=1.0, sigma=0.5)
        assert b.sample(x)[6] == pytest.approx(2.0)  # x = 1

    def test_step_vanishes_far_away(self):
        s = dw.SmoothedStep(amp=1.0, center=0.0, width=2.0, ramp=0.5)
        x = np.array([-40.0, 0.0, 40.0])
        vals = s.sample(x)
        assert vals[1] == pytest.approx(1.0, abs=1e-3)
        assert abs(vals[0]) < 1e-12 and abs(vals[2]) < 1e-12

    def test_noise_deterministic_and_windowed(self):
        x = np.linspace(0, 100, 501)
        n1 = FilteredNoise(amp=0.01, seed=7, cutoff=6)
        n2 = FilteredNoise(amp=0.01, seed=7, cutoff=6)
        v1, v2 = n1.sample(x), n2.sample(x)
        assert np.array_equal(v1, v2)
        assert np.max(np.abs(v1)) == pytest.approx(0.01)
        assert v1[0] == 0.0 and v1[-1] == 0.0

    def test_noise_different_seeds_differ(self):
        x = np.linspace(0, 100, 501)
        v1 = FilteredNoise(amp=0.01, seed=7, cutoff=6).sample(x)
        v2 = FilteredNoise(amp=0.01, seed=8, cutoff=6).sample(x)
        assert not np.array_equal(v1, v2)


class TestRunConfigValidation:
    def test_rejects_oversized_dt(self):
        with pytest.raises(ConfigError, match="advective bound"):
            neumann_config(dt=0.5, dx=0.2)

    def test_rejects_short_cauchy_domain(self, params_demo, wave_demo):
        grid = dw.build_grid(-10.0, 20.0, 101)
        kind = dw.CauchyProblem(wave=wave_demo, half_width=10.0)
        with pytest.raises(ConfigError, match="half_width"):
            dw.RunConfig(params=params_demo, kind=kind, grid=grid, dt=0.1,
                         t_final=100.0, output_times=(0.0,),
                         initial=dw.InitialData())

    def test_rejects_output_times_outside_range(self):
        with pytest.raises(ConfigError, match="output time"):
            neumann_config(t_final=10.0, output_times=(0.0, 20.0))

    def test_rejects_beta_outside_states(self, params_demo, wave_demo_halfline):
        grid = dw.build_grid(0.0, 50.0, 251)
        kind = dw.DirichletProblem(beta=0.5, wave=wave_demo_halfline,
                                   width=50.0)
        with pytest.raises(ConfigError, match="beta"):
            dw.RunConfig(params=params_demo, kind=kind, grid=grid, dt=0.1,
                         t_final=1.0, output_times=(0.0,),
                         initial=dw.InitialData())

    def test_advective_bound_uses_initial_slope(self):
        # steep w0 shrinks the admissible dt below the pure-grid bound
        steep = dw.InitialData(w0=dw.GaussianBump(amp=2.0, center=25.0,
                                                  sigma=0.4))
        with pytest.raises(ConfigError, match="advective"):
            neumann_config(dt=0.1, initial=steep)


class TestInitState:
    def test_zero_perturbation_cauchy_equals_wave(self, params_demo, wave_demo):
        cfg = build_cauchy_run(params_demo, wave_demo, t_final=1.0, amp_w=0.0,
                               amp_z=0.0)
        state = dw.init_state(cfg)
        x = cfg.grid.nodes
        assert np.allclose(state.u, dw.wave_eval(wave_demo, x, 0.0), atol=1e-15)
        assert np.allclose(state.rho, dw.rho_bar_eval(wave_demo, x, 0.0),
                           atol=1e-15)

    def test_zero_perturbation_neumann_constant(self):
        cfg = neumann_config(u_plus=0.05)
        state = dw.init_state(cfg)
        assert np.all(state.u == 0.05)
        assert np.all(state.rho == 0.05)

    def test_neumann_accepts_distant_bump(self):
        init = dw.InitialData(z0=dw.GaussianBump(amp=0.01, center=25.0,
                                                 sigma=1.0))
        cfg = neumann_config(initial=init)
        state = dw.init_state(cfg)
        assert abs(dw.dx1(state.u - 0.05, cfg.grid)[0]) <= 1e-12

    def test_neumann_rejects_boundary_slope(self):
        init = dw.InitialData(z0=dw.GaussianBump(amp=0.01, center=1.0,
                                                 sigma=1.0))
        cfg = neumann_config(initial=init, dt=0.05)
        with pytest.raises(ConfigError, match="Neumann compatibility"):
            dw.init_state(cfg)

    def test_dirichlet_rejects_boundary_value(self, params_demo,
                                              wave_demo_halfline):
        cfg = build_halfline_run(params_demo, wave_demo_halfline, "dirichlet",
                                 t_final=1.0, center=0.5, sigma=1.0)
        with pytest.raises(ConfigError, match="compatibility"):
            dw.init_state(cfg)


class TestStep:
    def test_neumann_constant_state_is_fixed_point(self):
        cfg = neumann_config()
        state = dw.init_state(cfg)
        new = dw.step(state, cfg)
        assert np.max(np.abs(new.u - state.u)) <= 1e-14
        assert np.max(np.abs(new.rho - state.rho)) <= 1e-14
        assert new.t == pytest.approx(cfg.dt)

    def test_fixed_point_holds_for_1000_steps(self):
        cfg = neumann_config(t_final=100.0, dt=0.1,
                             output_times=(0.0, 50.0, 100.0))
        res = dw.run(cfg)
        assert res.n_steps == 1000
        for s in res.states:
            assert np.max(np.abs(s.u - 0.05)) <= 1e-12
            assert np.max(np.abs(s.rho - 0.05)) <= 1e-12

    def test_blowup_signal_on_oversized_state(self):
        cfg = neumann_config()
        state = dw.init_state(cfg)
        huge = dw.State(grid=state.grid, u=state.u + 2e6, rho=state.rho,
                        t=0.0)
        with pytest.raises(BlowUpError):
            dw.step(huge, cfg)


class TestApplyBoundary:
    def test_dirichlet_clamps(self, params_demo, wave_demo_halfline):
        cfg = build_halfline_run(params_demo, wave_demo_halfline, "dirichlet",
                                 t_final=1.0)
        state = dw.init_state(cfg)
        messy = dw.State(grid=state.grid, u=state.u + 0.01,
                         rho=state.rho + 0.01, t=0.0)
        fixed = dw.apply_boundary(messy, cfg.kind, cfg.params)
        assert fixed.u[0] == 0.0  # beta
        assert fixed.u[-1] == 0.025
        assert fixed.rho[-1] == pytest.approx(0.025)

    def test_neumann_zero_slope(self):
        cfg = neumann_config()
        state = dw.init_state(cfg)
        bumped = dw.State(grid=state.grid,
                          u=state.u + 0.01 * np.exp(-state.grid.nodes),
                          rho=state.rho, t=0.0)
        fixed = dw.apply_boundary(bumped, cfg.kind, cfg.params)
        assert abs(dw.dx1(fixed.u, cfg.grid)[0]) <= 1e-14

    def test_cauchy_clamps_far_fields(self, params_demo, wave_demo):
        cfg = build_cauchy_run(params_demo, wave_demo, t_final=1.0)
        state = dw.init_state(cfg)
        messy = dw.State(grid=state.grid, u=state.u + 0.001,
                         rho=state.rho - 0.001, t=0.0)
        fixed = dw.apply_boundary(messy, cfg.kind, cfg.params)
        assert fixed.u[0] == -0.025 and fixed.u[-1] == 0.025


class TestRun:
    def test_zero_t_final_single_snapshot(self):
        cfg = neumann_config(t_final=0.0, output_times=(0.0,))
        res = dw.run(cfg)
        assert len(res.states) == 1
        assert res.times[0] == 0.0

    def test_snapshot_times_are_step_multiples(self):
        cfg = neumann_config(t_final=10.0, dt=0.1,
                             output_times=(0.0, 3.14, 10.0))
        res = dw.run(cfg)
        # 3.14 is captured at the nearest step, 3.1
        assert res.times[1] == pytest.approx(3.1)

    def test_kappa_zero_matches_heat_oracle(self, params_linear, wave_linear):
        # wave is the erf profile; a pure Gaussian兵 needs equal end states
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=0.0)
        prof = dw.solve_profile_cauchy(p, tol=1e-6)
        wave = dw.DiffusionWave(prof, p)
        half, dx, t_final = 20.0, 0.1, 1.0

        def solve(dx, dt):
            n = int(round(2 * half / dx)) + 1
            grid = dw.build_grid(-half, 2 * half, n)
            cfg = dw.RunConfig(
                params=p, kind=dw.CauchyProblem(wave=wave, half_width=half),
                grid=grid, dt=dt, t_final=t_final, output_times=(t_final,),
                initial=dw.InitialData(z0=dw.GaussianBump(amp=0.01, center=0.0,
                                                          sigma=1.0)))
            res = dw.run(cfg)
            exact = dw.heat_oracle(1.0, 0.01, 1.0, grid.nodes, res.times[-1])
            return np.max(np.abs(res.states[-1].u - exact))

        e1 = solve(dx, dx**2)
        e2 = solve(dx / 2, dx**2 / 4)
        assert e1 <= 5e-3
        assert 3.4 <= e1 / e2 <= 4.6

    def test_perturbation_mass_conserved(self):
        # equal (zero) end states, kappa = 0: discrete flux form conserves
        # the perturbation mass up to clamped-tail leakage
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=0.0)
        prof = dw.solve_profile_cauchy(p, tol=1e-6)
        wave = dw.DiffusionWave(prof, p)
        half, dx = 30.0, 0.1
        n = int(round(2 * half / dx)) + 1
        grid = dw.build_grid(-half, 2 * half, n)
        cfg = dw.RunConfig(
            params=p, kind=dw.CauchyProblem(wave=wave, half_width=half),
            grid=grid, dt=0.05, t_final=10.0,
            output_times=tuple(np.linspace(0, 10, 11)),
            initial=dw.InitialData(z0=dw.GaussianBump(amp=0.01, center=0.0,
                                                      sigma=1.0)))
        res = dw.run(cfg)
        drift = np.max(np.abs(res.mass - res.mass[0]))
        assert drift <= 1e-8 * cfg.t_final

    def test_range_bound_for_small_chemotaxis(self, params_demo, wave_demo):
        # data inside [u_-, u_+] stays inside (comparison-principle proxy)
        cfg = build_cauchy_run(params_demo, wave_demo, t_final=10.0,
                               amp_w=0.0, amp_z=0.015, sigma=1.0)
        state = dw.init_state(cfg)
        assert state.u.max() <= 0.025 and state.u.min() >= -0.025
        res = dw.run(cfg)
        for s in res.states:
            assert s.u.max() <= 0.025 + 1e-6
            assert s.u.min() >= -0.025 - 1e-6

    def test_determinism(self):
        init = dw.InitialData(w0=FilteredNoise(amp=0.005, seed=11, cutoff=5),
                              z0=FilteredNoise(amp=0.005, seed=12, cutoff=5))
        res1 = dw.run(neumann_config(t_final=5.0, initial=init,
                                     output_times=(0.0, 2.5, 5.0)))
        res2 = dw.run(neumann_config(t_final=5.0, initial=init,
                                     output_times=(0.0, 2.5, 5.0)))
        for s1, s2 in zip(res1.states, res2.states):
            assert np.array_equal(s1.u, s2.u)
            assert np.array_equal(s1.rho, s2.rho)
        assert np.array_equal(res1.mass, res2.mass)

    def test_upwind_flag_runs_and_stays_close(self, params_demo, wave_demo):
        import dataclasses

        cfg = build_cauchy_run(params_demo, wave_demo, t_final=5.0)
        cfg_up = dataclasses.replace(cfg, upwind=True)
        res = dw.run(cfg)
        res_up = dw.run(cfg_up)
        diff = np.max(np.abs(res.states[-1].u - res_up.states[-1].u))
        assert 0.0 < diff < 1e-3  # same physics, different flux limiter
