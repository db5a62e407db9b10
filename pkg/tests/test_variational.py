"""Tests for the convex duality layer: K, densities, contact set, certificate."""

import math
from dataclasses import replace

import numpy as np
import pytest

from wfl.errors import ConfigError
from wfl.limit_solver import LimitSystem, Ramp, solve_limit
from wfl.models import VerticalBristle, SlantedBristle, coefficients
from wfl.profiles import TWO_PI, FourierTerm, SurfaceProfile
from wfl.variational import (
    CertificateReport,
    ElasticInterval,
    LimitWithK,
    ViscousQuadratic,
    contact_set_member,
    de_giorgi_certificate,
    fenchel_residual,
    k_of_xi,
    legendre_conjugate_limit,
    legendre_conjugate_numeric,
    limit_density,
)

RHO = 0.1
OMEGA = ElasticInterval(lower=-RHO, upper=RHO)


def sin_force(y):
    """Symmetric one-period force profile with range [-0.1, 0.1]."""
    return RHO * np.sin(TWO_PI * np.asarray(y, dtype=float))


def canonical_ramp_system(rate=1.0, q0=0.0, duration=2.0):
    return LimitSystem(
        k_h=1.0,
        L_h_rest=0.0,
        loading=Ramp(q0=q0, rate=rate, duration=duration),
        rho_plus=RHO,
        rho_minus=-RHO,
    )


class TestElasticInterval:
    def test_requires_straddling_zero(self):
        with pytest.raises(ConfigError):
            ElasticInterval(lower=0.1, upper=0.2)
        with pytest.raises(ConfigError):
            ElasticInterval(lower=-0.1, upper=0.0)
        with pytest.raises(ConfigError):
            ElasticInterval(lower=-math.inf, upper=0.1)

    def test_membership_and_clip(self):
        assert OMEGA.contains(0.0)
        assert OMEGA.contains(RHO)
        assert not OMEGA.contains(RHO + 1e-12)
        assert OMEGA.contains(RHO + 1e-12, tol=1e-9)
        assert OMEGA.width == pytest.approx(0.2)
        np.testing.assert_allclose(
            OMEGA.clip(np.array([-1.0, 0.05, 1.0])), [-RHO, 0.05, RHO]
        )

    def test_from_system(self):
        system = canonical_ramp_system()
        interval = ElasticInterval.from_system(system)
        assert (interval.lower, interval.upper) == (-RHO, RHO)


class TestIndicatorConjugate:
    def test_interior_and_boundary_are_free(self):
        assert legendre_conjugate_limit(0.0, OMEGA) == 0.0
        assert legendre_conjugate_limit(RHO, OMEGA) == 0.0
        assert legendre_conjugate_limit(-RHO, OMEGA) == 0.0

    def test_exterior_hits_the_sentinel(self):
        assert legendre_conjugate_limit(RHO + 1e-9, OMEGA) == math.inf
        assert legendre_conjugate_limit(-RHO - 1e-9, OMEGA) == math.inf


class TestKOfXi:
    def test_symmetric_profile_at_zero(self):
        # int_0^1 |0.1 sin(2 pi y)| dy = 2 * 0.1 / pi
        assert k_of_xi(0.0, sin_force) == pytest.approx(2.0 * RHO / math.pi, abs=1e-12)

    def test_collapses_to_abs_outside_force_range(self):
        assert k_of_xi(0.2, sin_force) == 0.2
        assert k_of_xi(-0.2, sin_force) == 0.2
        assert k_of_xi(1.0, sin_force) == 1.0
        assert k_of_xi(RHO, sin_force) == pytest.approx(RHO, abs=1e-12)
        assert k_of_xi(-RHO, sin_force) == pytest.approx(RHO, abs=1e-12)

    def test_strictly_dominates_abs_inside(self):
        delta = 0.05 * OMEGA.width
        for xi in np.linspace(OMEGA.lower + delta, OMEGA.upper - delta, 20):
            assert k_of_xi(float(xi), sin_force) > abs(xi) + 1e-12

    def test_matches_brute_force_oracle(self):
        def skewed(y):
            y = np.asarray(y, dtype=float)
            return 0.07 * np.sin(TWO_PI * y) + 0.03 * np.sin(2.0 * TWO_PI * y + 0.8)

        ys = np.linspace(0.0, 1.0, 2**20 + 1)
        for xi in (-0.04, 0.0, 0.013, 0.06):
            brute = float(np.trapezoid(np.abs(xi - skewed(ys)), ys))
            assert k_of_xi(xi, skewed) == pytest.approx(brute, abs=1e-8)

    def test_scalar_only_sampler_supported(self):
        def scalar_force(y):
            return RHO * math.sin(TWO_PI * float(y))

        assert k_of_xi(0.0, scalar_force) == pytest.approx(
            2.0 * RHO / math.pi, abs=1e-10
        )

    def test_even_in_xi_for_odd_profile(self):
        for xi in (0.01, 0.04, 0.09):
            assert k_of_xi(xi, sin_force) == pytest.approx(
                k_of_xi(-xi, sin_force), abs=1e-12
            )


class TestViscousQuadratic:
    def test_scale_validation(self):
        with pytest.raises(ConfigError):
            ViscousQuadratic(epsilon=0.0)
        with pytest.raises(ConfigError):
            ViscousQuadratic(epsilon=0.1, gamma=-1.0)

    def test_equality_case_on_the_flow_rule(self):
        density = ViscousQuadratic(epsilon=0.05, gamma=1.3)
        for v in (-2.0, -0.3, 0.0, 1.7):
            xi = density.time_scale * v
            assert fenchel_residual(density, v, xi) <= 1e-12

    def test_residual_equals_direct_defect(self):
        density = ViscousQuadratic(epsilon=0.1)
        rng = np.random.default_rng(7)
        v = rng.uniform(-2.0, 2.0, 500)
        xi = rng.uniform(-0.5, 0.5, 500)
        direct = density.value(v, xi) - v * xi
        np.testing.assert_allclose(density.residual(v, xi), direct, atol=1e-14)

    def test_random_pairs_nonnegative(self):
        density = ViscousQuadratic(epsilon=0.05)
        rng = np.random.default_rng(11)
        v = rng.uniform(-3.0, 3.0, 20000)
        xi = rng.uniform(-0.3, 0.3, 20000)
        direct = density.value(v, xi) - v * xi
        assert float(np.min(direct)) >= -1e-12
        assert float(np.min(density.residual(v, xi))) >= 0.0


class TestLimitWithK:
    def test_sticking_contact_is_exact(self):
        density = LimitWithK(wprime=sin_force, interval=OMEGA)
        for xi in (-RHO, -0.03, 0.0, 0.08, RHO):
            assert fenchel_residual(density, 0.0, xi) == 0.0

    def test_sliding_contact_is_exact(self):
        density = LimitWithK(wprime=sin_force, interval=OMEGA)
        assert fenchel_residual(density, 1.0, RHO) <= 1e-12
        assert fenchel_residual(density, -1.0, -RHO) <= 1e-12
        assert fenchel_residual(density, 3.5, RHO) <= 1e-12

    def test_indicator_fires_outside(self):
        density = LimitWithK(wprime=sin_force, interval=OMEGA)
        assert density.value(1.0, RHO + 1e-9) == math.inf
        assert fenchel_residual(density, -2.0, RHO + 1e-9) == math.inf

    def test_random_pairs_nonnegative(self):
        density = LimitWithK(wprime=sin_force, interval=OMEGA)
        rng = np.random.default_rng(23)
        worst = 0.0
        for v, xi in zip(
            rng.uniform(-2.0, 2.0, 20000), rng.uniform(-0.2, 0.2, 20000)
        ):
            worst = min(worst, fenchel_residual(density, float(v), float(xi)))
        assert worst >= -1e-12

    def test_memoization_quantizes_the_argument(self):
        density = LimitWithK(wprime=sin_force, interval=OMEGA)
        first = density.k(0.0123)
        second = density.k(0.0123 + 1e-16)
        assert first == second
        assert len(density._cache) == 1


class TestContactSet:
    def test_sticking_branch(self):
        assert contact_set_member(0.0, 0.0, OMEGA)
        assert contact_set_member(0.0, RHO, OMEGA)
        assert contact_set_member(1e-13, 0.05, OMEGA)
        assert not contact_set_member(0.0, RHO + 1e-6, OMEGA)

    def test_sliding_branches(self):
        assert contact_set_member(1.0, RHO, OMEGA)
        assert not contact_set_member(1.0, -RHO, OMEGA)
        assert contact_set_member(-1.0, -RHO, OMEGA)
        tau_xi = 1e-8 * OMEGA.upper
        assert not contact_set_member(-1.0, -RHO + 2.0 * tau_xi, OMEGA)
        assert contact_set_member(-1.0, -RHO + 0.5 * tau_xi, OMEGA)


class TestNumericConjugate:
    def test_involution_recovers_the_quadratic(self):
        # conjugating xi^2/(2 tau) on a grid gives tau v^2 / 2
        tau = 0.04
        grid = np.linspace(-1.0, 1.0, 20001)
        values = np.square(grid) / (2.0 * tau)
        slopes = np.linspace(-1.0, 1.0, 41)
        conj = legendre_conjugate_numeric(grid, values, slopes)
        np.testing.assert_allclose(conj, 0.5 * tau * np.square(slopes), atol=1e-6)

    def test_shape_validation(self):
        with pytest.raises(ConfigError):
            legendre_conjugate_numeric(np.zeros(3), np.zeros(4), 0.0)


class TestLimitDensityFactory:
    def test_vertical_model_reproduces_analytic_density(self):
        # unit tension scale and a = 0 make the one-period force profile a
        # pure 0.1-sinusoid up to a phase, which K cannot see
        model = VerticalBristle(k=1.0, L_rest=2.0, h=1.0)
        profile = SurfaceProfile.sinusoid(slope=0.1)
        density = limit_density(model, profile)
        coeffs = coefficients(model, profile)
        assert density.interval.lower == coeffs.rho_minus
        assert density.interval.upper == coeffs.rho_plus
        assert density.k(0.0) == pytest.approx(2.0 * RHO / math.pi, abs=1e-12)
        assert density.k(density.interval.upper) == abs(density.interval.upper)

    def test_slanted_model_density_is_consistent(self):
        model = SlantedBristle(k=1.0, L_rest=2.0, h=1.0, theta=0.3)
        profile = SurfaceProfile.sinusoid(slope=0.1)
        density = limit_density(model, profile)
        coeffs = coefficients(model, profile)
        assert density.interval.lower < 0.0 < density.interval.upper
        assert density.k(coeffs.rho_plus) == pytest.approx(coeffs.rho_plus, abs=1e-12)
        assert density.k(0.0) > 0.0
        # sampler range must match the thresholds it claims
        ys = np.linspace(0.0, 1.0, 4097)
        forces = density.wprime(ys)
        assert float(np.max(forces)) == pytest.approx(coeffs.rho_plus, abs=1e-9)
        assert float(np.min(forces)) == pytest.approx(coeffs.rho_minus, abs=1e-9)


class TestCertificate:
    def setup_method(self):
        self.system = canonical_ramp_system()
        self.trajectory = solve_limit(self.system, 0.0)
        self.density = LimitWithK(wprime=sin_force, interval=OMEGA)

    def test_ramp_solution_passes(self):
        report = de_giorgi_certificate(self.system, self.trajectory, self.density)
        assert isinstance(report, CertificateReport)
        assert report.passed
        assert report.chi_time is None
        assert abs(report.residual) <= report.tolerance
        scale = max(1.0, float(np.max(np.abs(self.trajectory.energies))))
        assert abs(report.residual) <= 1e-6 * scale

    def test_tolerance_follows_grid_and_load(self):
        report = de_giorgi_certificate(self.system, self.trajectory, self.density)
        dt = float(np.max(np.diff(self.trajectory.times)))
        zmax = float(np.max(np.abs(self.trajectory.states)))
        assert report.tolerance == pytest.approx(
            10.0 * self.system.ell_lipschitz * zmax * dt
        )

    def test_sticking_under_constant_load_is_exact(self):
        system = canonical_ramp_system(rate=0.0, q0=0.05, duration=1.0)
        trajectory = solve_limit(system, 0.03)
        report = de_giorgi_certificate(system, trajectory, self.density)
        assert report.residual == 0.0
        assert report.tolerance == 0.0
        assert report.passed

    def test_perturbed_trajectory_fails_without_indicator(self):
        states = self.trajectory.states.copy()
        window = (self.trajectory.times >= 0.5) & (self.trajectory.times <= 1.5)
        states[window] += 0.05
        perturbed = replace(self.trajectory, states=states)
        report = de_giorgi_certificate(self.system, perturbed, self.density)
        assert not report.passed
        assert report.chi_time is None
        assert report.residual > report.tolerance

    def test_confinement_violation_fires_indicator(self):
        states = self.trajectory.states.copy()
        window = self.trajectory.times >= 0.5
        states[window] += 0.3
        violating = replace(self.trajectory, states=states)
        report = de_giorgi_certificate(self.system, violating, self.density)
        assert not report.passed
        assert report.residual == math.inf
        assert report.chi_time == pytest.approx(0.5, abs=1e-3)

    def test_custom_elastic_energy_passes(self):
        system = LimitSystem(
            k_h=1.0,
            L_h_rest=0.0,
            loading=Ramp(q0=0.0, rate=1.0, duration=2.0),
            rho_plus=RHO,
            rho_minus=-RHO,
            phi=lambda z: np.cosh(z) - 1.0,
            phi_prime=np.sinh,
            phi_prime_inv=np.arcsinh,
            convexity=1.0,
        )
        trajectory = solve_limit(system, 0.0)
        report = de_giorgi_certificate(system, trajectory, self.density)
        assert report.passed

    def test_threshold_mismatch_rejected(self):
        wrong = LimitWithK(
            wprime=lambda y: 0.2 * np.sin(TWO_PI * np.asarray(y)),
            interval=ElasticInterval(lower=-0.2, upper=0.2),
        )
        with pytest.raises(ConfigError):
            de_giorgi_certificate(self.system, self.trajectory, wrong)

    def test_explicit_tolerance_override(self):
        report = de_giorgi_certificate(
            self.system, self.trajectory, self.density, tolerance=1e-15
        )
        assert not report.passed
        assert report.tolerance == 1e-15
