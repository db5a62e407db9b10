"""Elastic bristle contacts and the friction coefficients they generate.

Three bristle geometries share one abstract mechanism.  A bristle tip is
dragged over a corrugated surface ``y = eps * w(x / eps)``; elasticity plus
geometry turn the corrugation into a tilted washboard potential for the
bristle root, and in the small-scale limit the root obeys dry friction with
thresholds

    rho_plus > 0  (resisting rightward sliding),
    rho_minus < 0 (resisting leftward sliding).

The models:

* ``VerticalBristle``: a vertical linear spring of stiffness ``k`` and rest
  length ``L_rest`` pinned at height ``h`` above the surface.  The tip
  tracks the corrugation directly.
* ``SlantedBristle``: the same spring mounted at a fixed angle ``theta``
  from the vertical.  The contact point lags or leads the root, which skews
  the perceived corrugation.
* ``AngularBristle``: a rigid rod of length ``L`` hinged at height ``h``
  with a torsional spring (stiffness ``k``, rest angle ``theta_rest``).
  The rod's inclination at flat contact is ``theta_lim = arccos(h / L)``.

Each geometry reduces to two numbers: a tension scale ``alpha`` (force per
unit slope carried by the contact) and a slope factor ``a``.  The factor
deforms the profile seen by the root: if the tip sits at surface abscissa
``p``, the root sits at ``z = g(p) = p + a * w(p)``, and the perceived
profile is ``W(z) = w(g^{-1}(z))``.  Whenever ``1 + a w'(p) > 0`` the map
is invertible and the perceived extreme slopes are

    mu_pm = omega_pm / (1 + a * omega_pm),

from which the friction thresholds follow:

    alpha > 0:  rho_plus = alpha * mu_plus,  rho_minus = alpha * mu_minus
    alpha < 0:  rho_plus = alpha * mu_minus, rho_minus = alpha * mu_plus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    GeometryError,
    InadmissibleModelError,
    InadmissibleSlopeFactorError,
    InversionFailureError,
    ParameterDomainError,
    ScaleValidityError,
    ZeroTensionError,
)
from .profiles import DerivativeExtrema, SurfaceProfile, derivative_extrema, eval_profile


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise GeometryError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class VerticalBristle:
    """Vertical linear spring: stiffness ``k``, rest length ``L_rest``, stand-off ``h``."""

    k: float
    L_rest: float
    h: float

    def __post_init__(self) -> None:
        _require_finite(k=self.k, L_rest=self.L_rest, h=self.h)
        if self.k <= 0.0:
            raise GeometryError(f"stiffness must be positive, got {self.k}")
        if self.h <= 0.0:
            raise GeometryError(f"stand-off height must be positive, got {self.h}")
        if self.L_rest < 0.0:
            raise GeometryError(f"rest length must be nonnegative, got {self.L_rest}")
        if self.L_rest == self.h:
            raise ZeroTensionError(
                "rest length equals stand-off: spring is unloaded on the flat "
                "and the friction thresholds vanish"
            )

    name = "vertical"

    @property
    def slope_factor(self) -> float:
        return 0.0

    @property
    def gap_constant(self) -> float:
        """Offset between root and tip abscissa at flat contact (zero here)."""
        return 0.0

    @property
    def alpha(self) -> float:
        return self.k * (self.L_rest - self.h)


@dataclass(frozen=True)
class SlantedBristle:
    """Linear spring mounted at angle ``theta`` from the vertical."""

    k: float
    L_rest: float
    h: float
    theta: float

    def __post_init__(self) -> None:
        _require_finite(k=self.k, L_rest=self.L_rest, h=self.h, theta=self.theta)
        if self.k <= 0.0:
            raise GeometryError(f"stiffness must be positive, got {self.k}")
        if self.h <= 0.0:
            raise GeometryError(f"stand-off height must be positive, got {self.h}")
        if self.L_rest < 0.0:
            raise GeometryError(f"rest length must be nonnegative, got {self.L_rest}")
        if not 0.0 < self.theta < 0.5 * math.pi:
            raise GeometryError(
                f"mounting angle must lie in (0, pi/2), got {self.theta}"
            )
        if self.L_rest == self.h / math.cos(self.theta):
            raise ZeroTensionError(
                "spring is exactly at rest length on the flat; friction degenerates"
            )

    name = "slanted"

    @property
    def slope_factor(self) -> float:
        return -math.tan(self.theta)

    @property
    def gap_constant(self) -> float:
        return -self.h * math.tan(self.theta)

    @property
    def alpha(self) -> float:
        cos_t = math.cos(self.theta)
        return (self.k / cos_t) * (self.L_rest - self.h / cos_t)


@dataclass(frozen=True)
class AngularBristle:
    """Rigid rod of length ``L`` on a torsional spring at height ``h``.

    The rod hangs from a hinge that travels horizontally at height ``h``
    above the mean surface; its inclination from the vertical is ``theta``
    and the spring drives it toward ``theta_rest``.  Flat contact pins the
    inclination at ``theta_lim = arccos(h / L)``.
    """

    k: float
    L: float
    h: float
    theta_rest: float

    def __post_init__(self) -> None:
        _require_finite(k=self.k, L=self.L, h=self.h, theta_rest=self.theta_rest)
        if self.k <= 0.0:
            raise GeometryError(f"torsional stiffness must be positive, got {self.k}")
        if not 0.0 < self.h < self.L:
            raise GeometryError(
                f"need 0 < h < L for the rod to reach the surface, got h={self.h}, L={self.L}"
            )
        if not -0.5 * math.pi < self.theta_rest < self.theta_lim:
            raise GeometryError(
                f"rest angle must lie in (-pi/2, theta_lim={self.theta_lim:.6f}), "
                f"got {self.theta_rest}"
            )

    name = "angular"

    @property
    def theta_lim(self) -> float:
        return math.acos(self.h / self.L)

    @property
    def slope_factor(self) -> float:
        # cot(theta_lim), written directly in terms of the geometry
        return self.h / math.sqrt(self.L ** 2 - self.h ** 2)

    @property
    def gap_constant(self) -> float:
        return -math.sqrt(self.L ** 2 - self.h ** 2)

    @property
    def alpha(self) -> float:
        return self.k * (self.theta_lim - self.theta_rest) / math.sqrt(
            self.L ** 2 - self.h ** 2
        )


BristleModel = Union[VerticalBristle, SlantedBristle, AngularBristle]


@dataclass(frozen=True)
class FrictionCoefficients:
    """Tension scale, perceived slopes, and friction thresholds of a contact."""

    alpha: float
    mu_plus: float
    mu_minus: float
    rho_plus: float
    rho_minus: float

    def __post_init__(self) -> None:
        if not self.rho_minus < 0.0 < self.rho_plus:
            raise ParameterDomainError(
                f"friction thresholds must straddle zero: "
                f"rho_minus={self.rho_minus}, rho_plus={self.rho_plus}"
            )

    @property
    def asymmetry(self) -> float:
        """rho_plus + rho_minus; zero for a direction-symmetric contact."""
        return self.rho_plus + self.rho_minus


@dataclass(frozen=True)
class AdmissibilityCondition:
    label: str
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class AdmissibilityReport:
    conditions: tuple[AdmissibilityCondition, ...]

    @property
    def admissible(self) -> bool:
        return all(c.satisfied for c in self.conditions)

    def require(self) -> None:
        failing = [c for c in self.conditions if not c.satisfied]
        if failing:
            detail = "; ".join(f"{c.label} (margin {c.margin:.3e})" for c in failing)
            raise InadmissibleModelError(f"model inadmissible for this profile: {detail}")


def validate(model: BristleModel, extrema: DerivativeExtrema) -> AdmissibilityReport:
    """Check the slope inequalities that keep the contact single-valued.

    Returns one condition per inequality with its margin (positive when
    satisfied).  Vertical bristles have no profile-dependent condition.
    """
    conditions: list[AdmissibilityCondition] = []
    if isinstance(model, SlantedBristle):
        cot = 1.0 / math.tan(model.theta)
        margin = cot - extrema.omega_plus
        conditions.append(
            AdmissibilityCondition("omega_plus < cot(theta)", margin > 0.0, margin)
        )
    elif isinstance(model, AngularBristle):
        tan_lim = math.tan(model.theta_lim)
        margin_lo = extrema.omega_minus + tan_lim
        conditions.append(
            AdmissibilityCondition(
                "-tan(theta_lim) < omega_minus", margin_lo > 0.0, margin_lo
            )
        )
        cot_lim = model.slope_factor
        margin_hi = cot_lim - extrema.omega_plus
        conditions.append(
            AdmissibilityCondition(
                "omega_plus < cot(theta_lim)", margin_hi > 0.0, margin_hi
            )
        )
    return AdmissibilityReport(tuple(conditions))


def mu_from_omega(
    omega_plus: float, omega_minus: float, slope_factor: float
) -> tuple[float, float]:
    """Perceived extreme slopes ``omega_pm / (1 + a * omega_pm)``.

    Requires ``omega_minus < 0 < omega_plus`` and ``1 + a * omega_pm > 0``;
    the latter is the invertibility of the tip-to-root map and fails with
    :class:`InadmissibleSlopeFactorError`.
    """
    if not omega_minus < 0.0 < omega_plus:
        raise ParameterDomainError(
            f"extreme slopes must straddle zero, got ({omega_minus}, {omega_plus})"
        )
    den_plus = 1.0 + slope_factor * omega_plus
    den_minus = 1.0 + slope_factor * omega_minus
    if den_plus <= 0.0 or den_minus <= 0.0:
        raise InadmissibleSlopeFactorError(
            f"slope factor a={slope_factor} gives nonpositive 1 + a*omega "
            f"({den_plus}, {den_minus}); contact map not invertible"
        )
    return omega_plus / den_plus, omega_minus / den_minus


def coefficients(model: BristleModel, profile: SurfaceProfile) -> FrictionCoefficients:
    """Friction coefficients of a bristle model on a given profile.

    Raises :class:`InadmissibleModelError` when the profile slopes violate
    the model's admissibility inequalities, and :class:`ZeroTensionError`
    when the contact carries no force on the flat.
    """
    extrema = derivative_extrema(profile)
    validate(model, extrema).require()
    alpha = model.alpha
    if alpha == 0.0:
        raise ZeroTensionError("contact tension scale alpha is zero")
    mu_plus, mu_minus = mu_from_omega(
        extrema.omega_plus, extrema.omega_minus, model.slope_factor
    )
    if alpha > 0.0:
        rho_plus, rho_minus = alpha * mu_plus, alpha * mu_minus
    else:
        # with a negative tension scale the perceived profile flips, so the
        # extreme slopes swap roles: max(alpha * W') = alpha * min(W')
        rho_plus, rho_minus = alpha * mu_minus, alpha * mu_plus
    return FrictionCoefficients(
        alpha=alpha,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
    )


# ---------------------------------------------------------------------------
# perceived profile: numerical inversion of the tip-to-root map
# ---------------------------------------------------------------------------

def _check_invertible(profile: SurfaceProfile, slope_factor: float) -> DerivativeExtrema:
    extrema = derivative_extrema(profile)
    if (
        1.0 + slope_factor * extrema.omega_plus <= 0.0
        or 1.0 + slope_factor * extrema.omega_minus <= 0.0
    ):
        raise InadmissibleSlopeFactorError(
            f"slope factor a={slope_factor} makes g(p) = p + a*w(p) non-monotone"
        )
    return extrema


def invert_contact_map(
    profile: SurfaceProfile,
    slope_factor: float,
    z,
    tol: float = 1e-12,
    max_iter: int = 100,
):
    """Solve ``p + a * w(p) = z`` for ``p`` (elementwise, safeguarded Newton).

    The map is strictly increasing under the admissibility condition, so the
    solution is unique and lies within ``|a| * sup|w|`` of ``z``.  Newton
    steps are clipped to that bracket; a bisection sweep mops up any points
    that have not met ``tol`` after ``max_iter`` iterations.
    """
    _check_invertible(profile, slope_factor)
    a = slope_factor
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    radius = abs(a) * profile.amplitude_bound
    lo = zs - radius
    hi = zs + radius
    p = zs.copy()
    converged = False
    for _ in range(max_iter):
        r = p + a * eval_profile(profile, p, 0) - zs
        if np.max(np.abs(r)) <= tol:
            converged = True
            break
        dg = 1.0 + a * eval_profile(profile, p, 1)
        p = np.clip(p - r / dg, lo, hi)
    if not converged:
        r = p + a * eval_profile(profile, p, 0) - zs
        bad = np.abs(r) > tol
        p_lo, p_hi = lo[bad], hi[bad]
        for _ in range(80):
            mid = 0.5 * (p_lo + p_hi)
            high = mid + a * eval_profile(profile, mid, 0) - zs[bad] > 0.0
            p_hi = np.where(high, mid, p_hi)
            p_lo = np.where(high, p_lo, mid)
        p[bad] = 0.5 * (p_lo + p_hi)
        r = p + a * eval_profile(profile, p, 0) - zs
        if np.max(np.abs(r)) > tol:
            raise InversionFailureError(
                f"contact map inversion stalled at residual {np.max(np.abs(r)):.3e}"
            )
    if np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0):
        return float(p[0])
    return p


@dataclass(frozen=True)
class PerceivedProfile:
    """Profile seen by the bristle root: ``W(z) = w(g^{-1}(z))``.

    Holds a one-period tabulation plus the data needed for pointwise exact
    evaluation by Newton inversion.
    """

    base: SurfaceProfile
    slope_factor: float
    grid: np.ndarray
    heights: np.ndarray
    slopes: np.ndarray

    def height(self, z) -> float:
        """Exact W(z) by inversion (not interpolation)."""
        p = invert_contact_map(self.base, self.slope_factor, z)
        return eval_profile(self.base, p, 0)

    def slope(self, z) -> float:
        """Exact W'(z) = w'(p) / (1 + a w'(p)) at p = g^{-1}(z)."""
        p = invert_contact_map(self.base, self.slope_factor, z)
        wp = eval_profile(self.base, p, 1)
        return wp / (1.0 + self.slope_factor * wp)


def perceived_profile(
    profile: SurfaceProfile, slope_factor: float, samples: int = 4096
) -> PerceivedProfile:
    """Tabulate the perceived profile over one period of the root coordinate."""
    _check_invertible(profile, slope_factor)
    zs = np.arange(samples, dtype=float) / samples
    ps = invert_contact_map(profile, slope_factor, zs)
    heights = eval_profile(profile, ps, 0)
    wp = eval_profile(profile, ps, 1)
    slopes = wp / (1.0 + slope_factor * wp)
    return PerceivedProfile(
        base=profile,
        slope_factor=slope_factor,
        grid=zs,
        heights=heights,
        slopes=slopes,
    )


def perceived_extrema(profile: SurfaceProfile, slope_factor: float) -> tuple[float, float]:
    """Extreme slopes of the perceived profile, by direct numerical search.

    This is the oracle counterpart of :func:`mu_from_omega`: it never uses
    the closed form, only tabulation of ``W'`` and bounded refinement, so
    the two routes cross-check each other.
    """
    perceived = perceived_profile(profile, slope_factor)
    step = 1.0 / perceived.grid.size

    def refine(idx: int, sign: float) -> float:
        z0 = perceived.grid[idx]
        res = minimize_scalar(
            lambda z: -sign * perceived.slope(z),
            bounds=(z0 - step, z0 + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        candidate = -sign * res.fun
        grid_value = perceived.slopes[idx]
        # never return something worse than the raw grid sample
        return sign * max(sign * candidate, sign * grid_value)

    mu_plus = refine(int(np.argmax(perceived.slopes)), +1.0)
    mu_minus = refine(int(np.argmin(perceived.slopes)), -1.0)
    return float(mu_plus), float(mu_minus)


# ---------------------------------------------------------------------------
# microscale forces
# ---------------------------------------------------------------------------

def epsilon_limit(model: BristleModel, profile: SurfaceProfile) -> float:
    """Largest corrugation scale the geometry tolerates with a safety margin.

    The corrugation height ``eps * sup|w|`` must stay well below the
    model's geometric clearances, otherwise contact may detach or become
    multivalued.  Runs at larger ``eps`` are refused.
    """
    bound = profile.amplitude_bound
    if isinstance(model, VerticalBristle):
        clearance = 0.5 * model.h
    elif isinstance(model, SlantedBristle):
        omega_plus = derivative_extrema(profile).omega_plus
        clearance = 0.25 * model.h * (1.0 - math.tan(model.theta) * omega_plus)
    else:
        clearance = 0.5 * min(model.h, model.L - model.h)
    return clearance / bound


def _require_valid_epsilon(model: BristleModel, profile: SurfaceProfile, epsilon: float) -> None:
    if epsilon <= 0.0 or not math.isfinite(epsilon):
        raise ScaleValidityError(f"epsilon must be positive and finite, got {epsilon}")
    limit = epsilon_limit(model, profile)
    if epsilon > limit:
        raise ScaleValidityError(
            f"epsilon {epsilon} exceeds the geometric validity limit {limit:.6g} "
            f"for this {model.name} bristle"
        )


def _tip_abscissa(model: BristleModel, profile: SurfaceProfile, epsilon: float, z):
    """Surface abscissa p of the contact point when the root sits at z.

    Solves the model-specific root-tip relation at corrugation scale eps
    with a safeguarded Newton iteration (the relation is strictly monotone
    inside the validity region).
    """
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    if isinstance(model, VerticalBristle):
        return zs
    if isinstance(model, SlantedBristle):
        tan_t = math.tan(model.theta)

        def residual(p):
            return p - tan_t * epsilon * eval_profile(profile, p / epsilon, 0) - zs

        def dresidual(p):
            return 1.0 - tan_t * eval_profile(profile, p / epsilon, 1)

        radius = abs(tan_t) * epsilon * profile.amplitude_bound
    else:
        h, L = model.h, model.L
        s0 = math.sqrt(L * L - h * h)

        def residual(p):
            y = epsilon * eval_profile(profile, p / epsilon, 0)
            return p + (np.sqrt(L * L - (h - y) ** 2) - s0) - zs

        def dresidual(p):
            y = epsilon * eval_profile(profile, p / epsilon, 0)
            a_local = (h - y) / np.sqrt(L * L - (h - y) ** 2)
            return 1.0 + a_local * eval_profile(profile, p / epsilon, 1)

        ymax = epsilon * profile.amplitude_bound
        radius = max(
            abs(math.sqrt(L * L - (h - ymax) ** 2) - s0),
            abs(math.sqrt(L * L - (h + ymax) ** 2) - s0),
        )
    lo, hi = zs - radius, zs + radius
    p = zs.copy()
    for _ in range(100):
        r = residual(p)
        if np.max(np.abs(r)) <= 1e-13 * max(1.0, float(np.max(np.abs(zs)))):
            return p
        p = np.clip(p - r / dresidual(p), lo, hi)
    r = residual(p)
    bad = np.abs(r) > 1e-12
    if np.any(bad):
        p_lo, p_hi = lo.copy(), hi.copy()
        for _ in range(80):
            mid = 0.5 * (p_lo + p_hi)
            high = residual(mid) > 0.0
            p_hi = np.where(high, mid, p_hi)
            p_lo = np.where(high, p_lo, mid)
        p = np.where(bad, 0.5 * (p_lo + p_hi), p)
        if np.max(np.abs(residual(p))) > 1e-10:
            raise InversionFailureError("tip location iteration failed to converge")
    return p


def wiggly_force(model: BristleModel, profile: SurfaceProfile, epsilon: float, z):
    """Derivative of the microscale bristle potential at root position ``z``.

    Computed from the exact geometry (no small-slope expansion): locate the
    contact point, then differentiate the stored elastic energy through the
    root-tip relation.
    """
    _require_valid_epsilon(model, profile, epsilon)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    p = _tip_abscissa(model, profile, epsilon, zs)
    wp = eval_profile(profile, p / epsilon, 1)
    if isinstance(model, VerticalBristle):
        y = epsilon * eval_profile(profile, p / epsilon, 0)
        out = model.k * (model.L_rest - model.h + y) * wp
    elif isinstance(model, SlantedBristle):
        cos_t = math.cos(model.theta)
        tan_t = math.tan(model.theta)
        y = epsilon * eval_profile(profile, p / epsilon, 0)
        stretch = model.L_rest - (model.h - y) / cos_t
        out = (model.k / cos_t) * stretch * wp / (1.0 - tan_t * wp)
    else:
        y = epsilon * eval_profile(profile, p / epsilon, 0)
        s = np.sqrt(model.L ** 2 - (model.h - y) ** 2)
        theta = np.arccos((model.h - y) / model.L)
        a_local = (model.h - y) / s
        out = model.k * (theta - model.theta_rest) * wp / (s * (1.0 + a_local * wp))
    if np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0):
        return float(out[0])
    return out


def wiggly_energy(model: BristleModel, profile: SurfaceProfile, epsilon: float, z):
    """Microscale bristle potential at root position ``z``, zeroed on the flat."""
    _require_valid_epsilon(model, profile, epsilon)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    p = _tip_abscissa(model, profile, epsilon, zs)
    y = epsilon * eval_profile(profile, p / epsilon, 0)
    if isinstance(model, VerticalBristle):
        rest = model.L_rest - model.h
        out = 0.5 * model.k * ((rest + y) ** 2 - rest ** 2)
    elif isinstance(model, SlantedBristle):
        cos_t = math.cos(model.theta)
        rest = model.L_rest - model.h / cos_t
        out = 0.5 * model.k * ((rest + y / cos_t) ** 2 - rest ** 2)
    else:
        theta = np.arccos((model.h - y) / model.L)
        out = 0.5 * model.k * (
            (theta - model.theta_rest) ** 2 - (model.theta_lim - model.theta_rest) ** 2
        )
    if np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0):
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# brushed contacts: direction-dependent rest angle
# ---------------------------------------------------------------------------

def nap_coefficients(
    mu_plus: float, theta_lim: float, theta_with: float
) -> tuple[float, float]:
    """Friction thresholds of a napped contact, stroked each way.

    A rod whose rest angle tilts by ``theta_with`` toward the stroke
    direction resists less when brushed with the nap than against it:

        rho_with    = (mu_plus / tan(theta_lim)) * (theta_lim - theta_with)
        rho_against = (mu_plus / tan(theta_lim)) * (theta_lim + theta_with)

    (unit torsional stiffness per unit hinge height).  The ratio
    ``rho_against / rho_with`` is independent of that normalisation, and
    ``theta_with = 0`` recovers the direction-symmetric contact.
    """
    if not 0.0 <= theta_with < theta_lim < 0.5 * math.pi:
        raise ParameterDomainError(
            f"need 0 <= theta_with < theta_lim < pi/2, got "
            f"theta_with={theta_with}, theta_lim={theta_lim}"
        )
    if mu_plus <= 0.0:
        raise ParameterDomainError(f"mu_plus must be positive, got {mu_plus}")
    factor = mu_plus / math.tan(theta_lim)
    return factor * (theta_lim - theta_with), factor * (theta_lim + theta_with)


def axial_tension(model: AngularBristle, rho: float) -> float:
    """Axial force in the rod while sliding at threshold ``rho``.

    Negative values mean the rod is compressed, which is how a contact
    stroked against its nap digs in.  ``rho`` should be ``rho_plus`` for
    rightward sliding or ``rho_minus`` for leftward sliding.
    """
    if not isinstance(model, AngularBristle):
        raise ParameterDomainError("axial tension is defined for angular bristles only")
    s = math.sqrt(model.L ** 2 - model.h ** 2)
    spring_part = -(model.k / model.L) * (model.theta_lim - model.theta_rest) * (model.h / s)
    return spring_part + rho * model.L / s
