"""Tests for the singularly perturbed viscous flow and its diagnostics."""

import math

import numpy as np
import pytest

from wfl.errors import ConfigError, ScaleValidityError, StiffnessFailureError
from wfl.limit_solver import LimitSystem, Ramp, elastic_strip, solve_limit
from wfl.models import VerticalBristle
from wfl.profiles import SurfaceProfile
from wfl.viscous_solver import (
    IntegratorConfig,
    ViscousTrajectory,
    WigglySystem,
    energy_balance_residual,
    integrate,
    rhs,
)

CANONICAL = SurfaceProfile.sinusoid(slope=0.1)
MODEL = VerticalBristle(k=1.0, L_rest=2.0, h=1.0)


def canonical_base(duration=2.0):
    """Unit hauling spring pulled at unit rate: ell(t) = t."""
    return LimitSystem(
        k_h=1.0,
        L_h_rest=0.0,
        loading=Ramp(q0=0.0, rate=1.0, duration=duration),
        rho_plus=0.1,
        rho_minus=-0.1,
    )


def canonical_system(epsilon, gamma=1.0, duration=2.0):
    return WigglySystem(
        base=canonical_base(duration),
        model=MODEL,
        profile=CANONICAL,
        epsilon=epsilon,
        gamma=gamma,
    )


@pytest.fixture(scope="module")
def canonical_run():
    """Memoized canonical integrations shared across the module."""
    cache = {}

    def run(epsilon, config=None):
        key = (epsilon, config)
        if key not in cache:
            cache[key] = integrate(canonical_system(epsilon), 0.0, config=config)
        return cache[key]

    return run


class TestRightHandSide:
    def test_force_balance_at_origin(self):
        # at t = z = 0 only the corrugation force k*(L_rest - h)*w'(0) = 0.1
        # acts, so zdot = -0.1 / eps
        system = canonical_system(0.1)
        assert rhs(system, 0.0, 0.0) == pytest.approx(-1.0, rel=1e-13)

    def test_doubling_time_scale_halves_velocity(self):
        # eps = 1/4: gamma 1 vs 1/2 gives time scales 0.25 and 0.5 exactly,
        # and the force does not depend on gamma
        fast = canonical_system(0.25, gamma=1.0)
        slow = canonical_system(0.25, gamma=0.5)
        assert fast.time_scale == 0.25
        assert slow.time_scale == 0.5
        for t, z in [(0.0, 0.0), (0.7, 0.3), (1.9, 1.6)]:
            assert rhs(slow, t, z) == 0.5 * rhs(fast, t, z)

    def test_force_is_minus_energy_gradient(self):
        system = canonical_system(0.1)
        h = 1e-6
        for t, z in [(0.5, 0.2), (1.5, 1.3)]:
            fd = -(system.energy(t, z + h) - system.energy(t, z - h)) / (2.0 * h)
            assert system.force(t, z) == pytest.approx(fd, rel=1e-7, abs=1e-8)


class TestIntegration:
    def test_tracks_limit_solution(self, canonical_run):
        traj = canonical_run(0.05)
        limit = solve_limit(canonical_base(), 0.0)
        sup = float(np.max(np.abs(traj.states - limit.states)))
        assert 0.01 < sup < 0.03

    def test_dissipation_near_limit_value(self, canonical_run):
        # the quasistatic ramp dissipates 0.1 * 1.9 = 0.19; the viscous run
        # adds an O(eps) excess
        traj = canonical_run(0.05)
        assert 0.19 < traj.total_dissipation < 0.25

    def test_dissipation_window_additivity(self, canonical_run):
        traj = canonical_run(0.05)
        whole = traj.dissipated(0.2, 1.7)
        split = traj.dissipated(0.2, 0.9) + traj.dissipated(0.9, 1.7)
        assert whole == pytest.approx(split, abs=1e-14)

    def test_velocity_column_is_time_scaled_force(self, canonical_run):
        traj = canonical_run(0.05)
        system = canonical_system(0.05)
        np.testing.assert_allclose(
            traj.xi, system.time_scale * traj.velocities, rtol=0.0, atol=1e-13
        )

    def test_grid_sampling_matches_request(self, canonical_run):
        traj = canonical_run(0.05)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == 2.0
        assert traj.states[0] == 0.0
        assert traj.dissipation[0] == 0.0
        assert np.all(np.diff(traj.dissipation) >= 0.0)

    def test_custom_grid_and_horizon(self):
        grid = np.linspace(0.0, 0.5, 301)
        traj = integrate(canonical_system(0.1), 0.0, horizon=0.5, grid=grid)
        np.testing.assert_array_equal(traj.times, grid)


class TestEnergyBalance:
    def test_residual_small_at_default_tolerances(self, canonical_run):
        traj = canonical_run(0.05)
        system = canonical_system(0.05)
        scale = max(1.0, float(np.max(np.abs(traj.energies))))
        residual = energy_balance_residual(system, traj)
        assert 0.0 <= residual <= 1e-6 * scale

    def test_residual_small_at_tight_tolerances(self, canonical_run):
        config = IntegratorConfig(rtol=1e-10, atol=1e-12)
        traj = canonical_run(0.05, config)
        system = canonical_system(0.05)
        scale = max(1.0, float(np.max(np.abs(traj.energies))))
        assert energy_balance_residual(system, traj) <= 1e-6 * scale

    def test_tolerance_drop_improves_residual(self, canonical_run):
        # RK45 residuals scale like tol^(4/5), so a 100x tolerance drop
        # should buy well over a factor of two
        system = canonical_system(0.1)
        loose = canonical_run(0.1, IntegratorConfig(rtol=1e-7, atol=1e-9))
        tight = canonical_run(0.1, IntegratorConfig(rtol=1e-9, atol=1e-11))
        r_loose = energy_balance_residual(system, loose)
        r_tight = energy_balance_residual(system, tight)
        assert r_loose >= 2.0 * r_tight

    def test_fenchel_residual_vanishes_along_solution(self, canonical_run):
        # M_eps(zdot, xi) - zdot*xi = (sqrt(tau) zdot - xi/sqrt(tau))^2 / 2
        # is the square of the local force defect, so it collapses to
        # rounding noise along an accurately computed solution
        traj = canonical_run(0.05)
        tau = canonical_system(0.05).time_scale
        root = math.sqrt(tau)
        residual = 0.5 * np.square(root * traj.velocities - traj.xi / root)
        force_scale = max(1.0, float(np.max(np.abs(traj.xi))))
        assert float(np.max(residual)) <= 1e-8 * force_scale**2

    def test_power_integral_matches_trapezoid(self, canonical_run):
        traj = canonical_run(0.1)
        system = canonical_system(0.1)
        crude = np.trapezoid(
            -system.base.ell_rate(traj.times) * traj.states, traj.times
        )
        assert traj.power_integral == pytest.approx(crude, abs=1e-4)


class TestStripAttraction:
    def test_delta_zero_when_started_inside(self, canonical_run):
        traj = canonical_run(0.05)
        assert traj.delta[0] == 0.0
        assert np.all(traj.delta >= 0.0)

    def test_delta_decays_from_outside_strip(self):
        # start two units above the strip: the boundary layer contracts the
        # excess at rate k_h / eps^gamma before the O(eps) regime takes over
        system = canonical_system(0.1)
        _, upper = elastic_strip(system.base, 0.0)
        traj = integrate(system, upper + 2.0)
        assert traj.delta[0] == pytest.approx(2.0, rel=1e-12)
        layer = traj.delta > 10.0 * system.epsilon**system.beta
        assert np.all(np.diff(traj.delta)[layer[:-1]] < 0.0)
        assert traj.delta[traj.times >= 0.5].max() < 0.15
        assert traj.delta[-1] < 0.1

    def test_states_remain_bounded_by_envelopes(self, canonical_run):
        traj = canonical_run(0.05)
        system = canonical_system(0.05)
        lower, upper = elastic_strip(system.base, traj.times)
        slack = 10.0 * system.epsilon**system.beta
        assert np.all(traj.states <= upper + slack)
        assert np.all(traj.states >= lower - slack)


class TestGammaExponent:
    def test_beta_is_min_of_one_and_gamma(self):
        assert canonical_system(0.1, gamma=0.5).beta == 0.5
        assert canonical_system(0.1, gamma=2.0).beta == 1.0

    def test_gamma_two_run_stays_near_limit(self):
        system = canonical_system(0.2, gamma=2.0, duration=0.5)
        traj = integrate(system, 0.0)
        limit = solve_limit(canonical_base(0.5), 0.0)
        sup = float(np.max(np.abs(traj.states - limit.states)))
        assert sup < 0.25


class TestFailureModes:
    def test_runaway_initial_state_raises_stiffness_error(self):
        system = canonical_system(0.1)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(StiffnessFailureError):
                integrate(system, 1e308)

    def test_epsilon_outside_validity_rejected(self):
        with pytest.raises(ScaleValidityError):
            canonical_system(0.0)
        with pytest.raises(ScaleValidityError):
            canonical_system(1e9)

    def test_gamma_must_be_positive(self):
        with pytest.raises(ConfigError):
            canonical_system(0.1, gamma=0.0)
        with pytest.raises(ConfigError):
            canonical_system(0.1, gamma=-1.0)

    def test_integrator_config_validation(self):
        with pytest.raises(ConfigError):
            IntegratorConfig(rtol=0.0)
        with pytest.raises(ConfigError):
            IntegratorConfig(atol=-1e-9)
        with pytest.raises(ConfigError):
            IntegratorConfig(max_step=0.0)

    def test_effective_max_step_caps_at_half_time_scale(self):
        assert IntegratorConfig().effective_max_step(0.1) == 0.05
        assert IntegratorConfig(max_step=1e-3).effective_max_step(0.1) == 1e-3
        assert IntegratorConfig(max_step=1.0).effective_max_step(0.1) == 0.05

    def test_grid_and_horizon_validation(self):
        system = canonical_system(0.1)
        with pytest.raises(ConfigError):
            integrate(system, 0.0, horizon=3.0)
        with pytest.raises(ConfigError):
            integrate(system, 0.0, grid=np.array([0.5, 1.0]))
        with pytest.raises(ConfigError):
            integrate(system, 0.0, grid=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ConfigError):
            integrate(system, float("nan"))

    def test_trajectory_requires_diagnostic_columns(self):
        t = np.linspace(0.0, 1.0, 5)
        z = np.zeros_like(t)
        with pytest.raises(ConfigError):
            ViscousTrajectory(
                times=t,
                states=z,
                velocities=z,
                energies=z,
                dissipation=z,
            )
