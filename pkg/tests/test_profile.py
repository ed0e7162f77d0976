import math

import numpy as np
import pytest
from scipy.special import erf

import diffwave as dw
from diffwave.profile import (ShootingError, fit_envelope, integrate_profile_ode,
                              ode_residual)


def linear_params(u_minus=-0.05, u_plus=0.05, a=1.0):
    return dw.ModelParams(a=a, b=1.0, lam=1.0, mu=1.0, kappa=0.0,
                          u_minus=u_minus, u_plus=u_plus)


class TestIntegrateOde:
    def test_zero_slope_gives_constant(self):
        p = linear_params()
        traj = integrate_profile_ode(p, 0.3, 0.0, (-5.0, 5.0), 0.01)
        assert np.all(traj.phi == 0.3)
        assert np.all(traj.dphi == 0.0)
        assert not traj.degenerate_left and not traj.degenerate_right

    def test_linear_diffusion_gaussian_slope(self):
        # with constant diffusivity a the slope is s*exp(-xi^2/(4a))
        for a in (1.0, 2.0):
            p = linear_params(a=a)
            s = 0.03
            traj = integrate_profile_ode(p, 0.0, s, (-6.0, 6.0), 0.005)
            exact = s * np.exp(-traj.xi**2 / (4.0 * a))
            assert np.max(np.abs(traj.dphi - exact)) <= 1e-10

    def test_linear_diffusion_erf_profile(self):
        # slope 1/(2 sqrt(pi)) makes the limits exactly +-1/2
        p = dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=0.0,
                           u_minus=-0.5, u_plus=0.5)
        s = 1.0 / (2.0 * math.sqrt(math.pi))
        traj = integrate_profile_ode(p, 0.0, s, (-10.0, 10.0), 0.005)
        assert np.max(np.abs(traj.phi - 0.5 * erf(traj.xi / 2.0))) <= 1e-10
        assert traj.phi[-1] == pytest.approx(0.5, abs=1e-8)
        assert traj.phi[0] == pytest.approx(-0.5, abs=1e-8)

    def test_flags_degenerate_diffusivity(self):
        # huge slope pushes phi past the degeneracy threshold a*lam/(kappa*mu)
        p = dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0,
                           u_minus=-0.05, u_plus=0.05)
        traj = integrate_profile_ode(p, 0.0, 5.0, (-8.0, 8.0), 0.01)
        assert traj.degenerate_right

    def test_rejects_degenerate_anchor(self):
        p = dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=1.0,
                           u_minus=-0.05, u_plus=0.05)
        with pytest.raises(ShootingError):
            integrate_profile_ode(p, 2.0, 0.1, (-1.0, 1.0), 0.01)


class TestSolveCauchy:
    def test_equal_states_constant_wave(self):
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=1,
                           u_minus=0.3, u_plus=0.3)
        prof = dw.solve_profile_cauchy(p, tol=1e-8)
        assert np.all(prof.phi == 0.3)
        assert np.all(prof.dphi == 0.0)
        assert prof.residual_left == 0.0 and prof.residual_right == 0.0

    def test_linear_anchor_matches_erf_closed_form(self, params_linear,
                                                   wave_linear):
        prof = wave_linear.profile
        assert prof.anchor.phi0 == pytest.approx(0.0, abs=1e-6)
        assert prof.anchor.slope0 == pytest.approx(0.1 / (2 * math.sqrt(math.pi)),
                                                   abs=1e-4)
        xi = prof.xi_grid.nodes
        assert np.max(np.abs(prof.phi - 0.05 * erf(xi / 2))) <= 1e-6

    def test_nonlinear_profile_invariants(self, params_nonlinear,
                                          wave_nonlinear):
        prof = wave_nonlinear.profile
        assert np.all(np.diff(prof.phi) > 0.0)  # strictly increasing
        assert prof.phi.min() >= -0.05 and prof.phi.max() <= 0.05
        assert np.all(params_nonlinear.f(prof.phi) > 0.0)
        assert prof.residual_left <= 1e-8 and prof.residual_right <= 1e-8

    def test_decreasing_wave(self):
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=1,
                           u_minus=0.04, u_plus=-0.04)
        prof = dw.solve_profile_cauchy(p, tol=1e-7)
        assert np.all(np.diff(prof.phi) < 0.0)
        assert prof.residual_right <= 1e-7

    def test_ode_residual_within_tolerance(self, params_nonlinear,
                                           wave_nonlinear):
        res = ode_residual(wave_nonlinear.profile, params_nonlinear)
        assert res <= 10.0 * 1e-8

    def test_rejects_bad_tolerance(self, params_linear):
        with pytest.raises(ValueError):
            dw.solve_profile_cauchy(params_linear, tol=0.5)


class TestSolveHalfline:
    def test_beta_at_endpoint_constant(self, params_demo):
        prof = dw.solve_profile_halfline(params_demo, beta=0.025)
        assert np.all(prof.phi == 0.025)
        assert prof.halfline

    def test_linear_erf_closed_form(self):
        p = dw.ModelParams(a=1.0, b=1.0, lam=1.0, mu=1.0, kappa=0.0,
                           u_minus=0.0, u_plus=0.05)
        prof = dw.solve_profile_halfline(p, beta=0.0, tol=1e-8)
        assert prof.anchor.slope0 == pytest.approx(0.05 / math.sqrt(math.pi),
                                                   abs=1e-4)
        xi = prof.xi_grid.nodes
        assert np.max(np.abs(prof.phi - 0.05 * erf(xi / 2))) <= 1e-6

    def test_rejects_beta_outside_range(self, params_demo):
        with pytest.raises(ValueError, match="beta"):
            dw.solve_profile_halfline(params_demo, beta=-0.03)

    def test_monotone_into_far_field(self, wave_demo_halfline):
        prof = wave_demo_halfline.profile
        assert prof.xi_grid.x0 == 0.0
        assert np.all(np.diff(prof.phi) > 0.0)
        assert abs(prof.phi[-1] - 0.025) <= 1e-8


class TestWaveEval:
    def test_constant_wave_everywhere(self):
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=1,
                           u_minus=0.3, u_plus=0.3)
        wave = dw.DiffusionWave(dw.solve_profile_cauchy(p), p)
        assert dw.wave_eval(wave, 1.7, 4.2) == 0.3
        assert dw.wave_eval(wave, -3.0, 0.0, 1, 0) == 0.0
        assert dw.rho_bar_eval(wave, 9.0, 2.0) == pytest.approx(0.3)

    def test_first_derivative_scaling(self, wave_nonlinear):
        # at x = 0, t = 3 the scaling factor sqrt(1+t) equals 2
        prof = wave_nonlinear.profile
        val = dw.wave_eval(wave_nonlinear, 0.0, 3.0, 1, 0)
        assert val == pytest.approx(prof.anchor.slope0 / 2.0, rel=1e-12)

    def test_time_derivative_vanishes_at_origin(self, wave_nonlinear):
        for t in (0.0, 1.0, 10.0):
            assert dw.wave_eval(wave_nonlinear, 0.0, t, 0, 1) == 0.0

    @pytest.mark.parametrize("k,j", [(5, 0), (0, 3), (3, 1), (1, 2), (4, 1)])
    def test_rejects_unsupported_orders(self, wave_nonlinear, k, j):
        with pytest.raises(ValueError):
            dw.wave_eval(wave_nonlinear, 0.0, 1.0, k, j)

    def test_rejects_negative_time(self, wave_nonlinear):
        with pytest.raises(ValueError):
            dw.wave_eval(wave_nonlinear, 0.0, -0.5)

    def test_self_similarity(self, wave_nonlinear):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.uniform(-5, 5)
            t = rng.uniform(0, 20)
            s = rng.uniform(0, 20)
            x2 = x * math.sqrt((1.0 + s) / (1.0 + t))
            v1 = dw.wave_eval(wave_nonlinear, x, t)
            v2 = dw.wave_eval(wave_nonlinear, x2, s)
            assert abs(v1 - v2) <= 1e-10

    def test_x_derivatives_match_finite_differences(self, wave_nonlinear):
        h = 1e-4
        for x, t in ((0.7, 2.0), (-1.3, 0.5), (2.1, 9.0)):
            fd = (dw.wave_eval(wave_nonlinear, x + h, t)
                  - dw.wave_eval(wave_nonlinear, x - h, t)) / (2 * h)
            assert fd == pytest.approx(dw.wave_eval(wave_nonlinear, x, t, 1, 0),
                                       abs=5e-8)
            fd2 = (dw.wave_eval(wave_nonlinear, x + h, t)
                   - 2 * dw.wave_eval(wave_nonlinear, x, t)
                   + dw.wave_eval(wave_nonlinear, x - h, t)) / h**2
            assert fd2 == pytest.approx(dw.wave_eval(wave_nonlinear, x, t, 2, 0),
                                        abs=5e-6)

    def test_t_derivatives_match_finite_differences(self, wave_nonlinear):
        h = 1e-4
        for x, t in ((0.7, 2.0), (-1.3, 0.5), (2.1, 9.0)):
            fd = (dw.wave_eval(wave_nonlinear, x, t + h)
                  - dw.wave_eval(wave_nonlinear, x, t - h)) / (2 * h)
            assert fd == pytest.approx(dw.wave_eval(wave_nonlinear, x, t, 0, 1),
                                       abs=5e-8)
            fd_mixed = (dw.wave_eval(wave_nonlinear, x, t + h, 1, 0)
                        - dw.wave_eval(wave_nonlinear, x, t - h, 1, 0)) / (2 * h)
            assert fd_mixed == pytest.approx(
                dw.wave_eval(wave_nonlinear, x, t, 1, 1), abs=5e-8)

    def test_rho_bar_is_scaled_wave(self, wave_nonlinear):
        x = np.linspace(-3, 3, 7)
        for k, j in ((0, 0), (1, 0), (2, 0), (0, 1)):
            u = dw.wave_eval(wave_nonlinear, x, 2.0, k, j)
            r = dw.rho_bar_eval(wave_nonlinear, x, 2.0, k, j)
            assert np.allclose(r, u, rtol=1e-14)  # mu/lam = 1 here


class TestEnvelope:
    def test_linear_envelope_quarter_rate(self, wave_linear):
        env = wave_linear.profile.envelope
        assert env.c0 == pytest.approx(0.25, rel=0.02)
        assert env.r2 > 0.999

    def test_nonlinear_envelope_positive_rate(self, wave_nonlinear):
        env = fit_envelope(wave_nonlinear.profile)
        assert env.c0 > 0.0
        assert env.r2 > 0.99

    def test_constant_profile_rejected(self):
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=1,
                           u_minus=0.2, u_plus=0.2)
        prof = dw.solve_profile_cauchy(p)
        with pytest.raises(ValueError):
            fit_envelope(prof)


class TestDecayTable:
    def test_predicted_exponents(self, wave_nonlinear):
        times = np.geomspace(10, 1000, 20)
        cases = {(1, 0, 2): -0.25, (1, 0, math.inf): -0.5,
                 (2, 0, 2): -0.75, (0, 1, math.inf): -1.0}
        for (k, j, p), expected in cases.items():
            row = dw.check_decay_table(wave_nonlinear, times, k, j, p)
            assert row["predicted_exponent"] == pytest.approx(expected)
            assert row["observed_exponent"] == pytest.approx(expected, abs=0.05)

    def test_observed_at_most_predicted_plus_slack(self, wave_nonlinear):
        times = np.geomspace(5, 200, 12)
        for k, j in ((1, 0), (0, 1), (2, 0), (1, 1)):
            for p in (2, math.inf):
                row = dw.check_decay_table(wave_nonlinear, times, k, j, p)
                assert (row["observed_exponent"]
                        <= row["predicted_exponent"] + 0.1)

    def test_constant_wave_degenerate(self):
        p = dw.ModelParams(a=1, b=1, lam=1, mu=1, kappa=1,
                           u_minus=0.1, u_plus=0.1)
        wave = dw.DiffusionWave(dw.solve_profile_cauchy(p), p)
        row = dw.check_decay_table(wave, np.geomspace(10, 500, 10), 1, 0, 2)
        assert row["degenerate"]

    def test_rejects_zero_orders(self, wave_nonlinear):
        with pytest.raises(ValueError):
            dw.check_decay_table(wave_nonlinear, np.geomspace(10, 500, 10),
                                 0, 0, 2)


class TestExportImport:
    def test_roundtrip_bit_exact(self, tmp_path, params_nonlinear,
                                 wave_nonlinear):
        path = tmp_path / "profile.txt"
        dw.save_profile(path, wave_nonlinear.profile, params_nonlinear)
        prof2, params2 = dw.load_profile(path)
        assert params2 == params_nonlinear
        assert np.array_equal(prof2.phi, wave_nonlinear.profile.phi)
        assert np.array_equal(prof2.dphi, wave_nonlinear.profile.dphi)
        assert prof2.anchor == wave_nonlinear.profile.anchor
        assert prof2.envelope == wave_nonlinear.profile.envelope
        # reconstructed profile evaluates identically
        wave2 = dw.DiffusionWave(prof2, params2)
        x = np.linspace(-4, 4, 17)
        assert np.array_equal(dw.wave_eval(wave2, x, 3.0, 1, 0),
                              dw.wave_eval(wave_nonlinear, x, 3.0, 1, 0))

    def test_halfline_flag_preserved(self, tmp_path, params_demo,
                                     wave_demo_halfline):
        path = tmp_path / "half.txt"
        dw.save_profile(path, wave_demo_halfline.profile, params_demo)
        prof2, _ = dw.load_profile(path)
        assert prof2.halfline
