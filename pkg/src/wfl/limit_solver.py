"""Quasistatic dry-friction evolution of the driven bristle state.

In the small-corrugation limit the root coordinate ``z`` follows a play
process between two moving envelopes.  With stored energy
``E(t, z) = Phi(z) - ell(t) z`` and friction thresholds
``rho_minus < 0 < rho_plus``, the state must satisfy the force inclusion
``-D_z E(t, z) in [rho_minus, rho_plus]``, which confines it to the
elastic strip

    z_minus(t) = (Phi')^{-1}(ell(t) - rho_plus),
    z_plus(t)  = (Phi')^{-1}(ell(t) - rho_minus),

and it moves only when pushed by a strip boundary.  On a time grid this is
the exact clamp recursion

    z_{n+1} = min(z_plus(t_{n+1}), max(z_minus(t_{n+1}), z_n)),

which is the catching-up scheme for the underlying sweeping process; no
further time-discretisation error enters beyond sampling the envelopes.

The driving force ``ell(t) = k_h (q(t) - L_h_rest)`` comes from a hauling
spring of stiffness ``k_h`` whose far end follows a loading program
``q(t)``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, InvalidInitialStateError

DEFAULT_GRID_POINTS = 4097  # horizon / 4096 steps


def _as_array(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


def _like_input(t, values: np.ndarray):
    if np.isscalar(t) or (isinstance(t, np.ndarray) and t.ndim == 0):
        return float(values[0])
    return values


class LoadingProgram(ABC):
    """Prescribed motion of the hauling-spring anchor on [0, horizon]."""

    @abstractmethod
    def q(self, t):
        """Anchor position at time t (scalar or array)."""

    @abstractmethod
    def qdot(self, t):
        """Anchor velocity at time t."""

    @property
    @abstractmethod
    def horizon(self) -> float:
        """End of the loading interval."""

    @property
    @abstractmethod
    def max_rate(self) -> float:
        """Supremum of |qdot| over the horizon, from the parameters."""


@dataclass(frozen=True)
class Ramp(LoadingProgram):
    """Uniform pull: q(t) = q0 + rate * t."""

    q0: float = 0.0
    rate: float = 1.0
    duration: float = 1.0

    def __post_init__(self) -> None:
        if self.duration <= 0.0 or not math.isfinite(self.duration):
            raise ConfigError(f"loading horizon must be positive, got {self.duration}")
        if not (math.isfinite(self.q0) and math.isfinite(self.rate)):
            raise ConfigError("ramp parameters must be finite")

    def q(self, t):
        ts = _as_array(t)
        return _like_input(t, self.q0 + self.rate * ts)

    def qdot(self, t):
        ts = _as_array(t)
        return _like_input(t, np.full_like(ts, self.rate))

    @property
    def horizon(self) -> float:
        return self.duration

    @property
    def max_rate(self) -> float:
        return abs(self.rate)


@dataclass(frozen=True)
class SinusoidLoading(LoadingProgram):
    """Oscillating pull: q(t) = q0 + amplitude * sin(2 pi frequency t + phase)."""

    q0: float = 0.0
    amplitude: float = 1.0
    frequency: float = 1.0
    duration: float = 1.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.duration <= 0.0 or not math.isfinite(self.duration):
            raise ConfigError(f"loading horizon must be positive, got {self.duration}")
        if self.frequency <= 0.0:
            raise ConfigError(f"frequency must be positive, got {self.frequency}")
        for name in ("q0", "amplitude", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def q(self, t):
        ts = _as_array(t)
        u = 2.0 * math.pi * self.frequency * ts + self.phase
        return _like_input(t, self.q0 + self.amplitude * np.sin(u))

    def qdot(self, t):
        ts = _as_array(t)
        u = 2.0 * math.pi * self.frequency * ts + self.phase
        rate = 2.0 * math.pi * self.frequency * self.amplitude
        return _like_input(t, rate * np.cos(u))

    @property
    def horizon(self) -> float:
        return self.duration

    @property
    def max_rate(self) -> float:
        return abs(self.amplitude) * 2.0 * math.pi * self.frequency


@dataclass(frozen=True)
class SmoothedPiecewiseLinear(LoadingProgram):
    """Piecewise-linear anchor motion with C1 corners.

    Within ``blend`` of each interior knot the velocity ramps linearly
    between the adjacent segment slopes (the cubic-Hermite smoothing of the
    position), so q is C1 and ``max |qdot|`` is still the largest segment
    slope.  Knot values outside the blend zones are matched exactly.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]
    blend: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.times) < 2 or len(self.times) != len(self.values):
            raise ConfigError("need matching times/values with at least two knots")
        diffs = np.diff(self.times)
        if np.any(diffs <= 0.0):
            raise ConfigError("knot times must be strictly increasing")
        if self.times[0] != 0.0:
            raise ConfigError("loading must start at t = 0")
        if not 0.0 < self.blend <= 0.5 * float(np.min(diffs)):
            raise ConfigError(
                "blend half-width must be positive and at most half the "
                "shortest segment"
            )

    def _slopes(self) -> np.ndarray:
        ts = np.asarray(self.times)
        vs = np.asarray(self.values)
        return np.diff(vs) / np.diff(ts)

    def q(self, t):
        ts = _as_array(t)
        knots = np.asarray(self.times)
        vals = np.asarray(self.values)
        slopes = self._slopes()
        seg = np.clip(np.searchsorted(knots, ts, side="right") - 1, 0, len(slopes) - 1)
        out = vals[seg] + slopes[seg] * (ts - knots[seg])
        # overwrite the blend zones around interior knots
        for i in range(1, len(knots) - 1):
            lo = knots[i] - self.blend
            hi = knots[i] + self.blend
            mask = (ts >= lo) & (ts <= hi)
            if not np.any(mask):
                continue
            s0, s1 = slopes[i - 1], slopes[i]
            u = ts[mask] - lo
            q_lo = vals[i] - s0 * self.blend
            out[mask] = q_lo + s0 * u + (s1 - s0) * u * u / (4.0 * self.blend)
        return _like_input(t, out)

    def qdot(self, t):
        ts = _as_array(t)
        knots = np.asarray(self.times)
        slopes = self._slopes()
        seg = np.clip(np.searchsorted(knots, ts, side="right") - 1, 0, len(slopes) - 1)
        out = slopes[seg].astype(float)
        for i in range(1, len(knots) - 1):
            lo = knots[i] - self.blend
            hi = knots[i] + self.blend
            mask = (ts >= lo) & (ts <= hi)
            if not np.any(mask):
                continue
            s0, s1 = slopes[i - 1], slopes[i]
            u = (ts[mask] - lo) / (2.0 * self.blend)
            out[mask] = s0 + (s1 - s0) * u
        return _like_input(t, out)

    @property
    def horizon(self) -> float:
        return self.times[-1]

    @property
    def max_rate(self) -> float:
        return float(np.max(np.abs(self._slopes())))


@dataclass(frozen=True)
class LimitSystem:
    """Driven dry-friction system in the small-corrugation limit.

    The default elastic energy is quadratic, ``Phi(z) = k_h z^2 / 2``,
    matching a linear hauling spring.  A different uniformly convex energy
    can be supplied through the three callables ``phi``, ``phi_prime`` and
    ``phi_prime_inv`` (all or none) together with a positive lower bound
    ``convexity`` on its second derivative.
    """

    k_h: float
    L_h_rest: float
    loading: LoadingProgram
    rho_plus: float
    rho_minus: float
    phi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    phi_prime: Optional[Callable[[np.ndarray], np.ndarray]] = None
    phi_prime_inv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    convexity: Optional[float] = None

    def __post_init__(self) -> None:
        if self.k_h <= 0.0 or not math.isfinite(self.k_h):
            raise ConfigError(f"hauling stiffness must be positive, got {self.k_h}")
        if not math.isfinite(self.L_h_rest):
            raise ConfigError("hauling spring rest length must be finite")
        if not self.rho_minus < 0.0 < self.rho_plus:
            raise ConfigError(
                f"thresholds must satisfy rho_minus < 0 < rho_plus, got "
                f"({self.rho_minus}, {self.rho_plus})"
            )
        custom = (self.phi, self.phi_prime, self.phi_prime_inv)
        if any(c is not None for c in custom):
            if any(c is None for c in custom):
                raise ConfigError(
                    "custom elastic energy needs phi, phi_prime and phi_prime_inv"
                )
            if self.convexity is None or self.convexity <= 0.0:
                raise ConfigError(
                    "custom elastic energy needs a positive convexity bound"
                )

    @property
    def quadratic(self) -> bool:
        return self.phi is None

    @property
    def uniform_convexity(self) -> float:
        return self.k_h if self.quadratic else float(self.convexity)

    def ell(self, t):
        return self.k_h * (self.loading.q(t) - self.L_h_rest)

    def ell_rate(self, t):
        return self.k_h * self.loading.qdot(t)

    @property
    def ell_lipschitz(self) -> float:
        """Lipschitz constant of the driving force ell."""
        return self.k_h * self.loading.max_rate

    def phi_value(self, z):
        if self.quadratic:
            return 0.5 * self.k_h * np.square(z)
        return self.phi(z)

    def phi_force(self, z):
        if self.quadratic:
            return self.k_h * z
        return self.phi_prime(z)

    def phi_force_inv(self, f):
        if self.quadratic:
            return f / self.k_h
        return self.phi_prime_inv(f)

    def energy(self, t, z):
        """E(t, z) = Phi(z) - ell(t) z."""
        return self.phi_value(z) - self.ell(t) * z


def elastic_strip(system: LimitSystem, t):
    """Admissible interval [z_minus(t), z_plus(t)] of the force inclusion."""
    ts = _as_array(t)
    ell = system.ell(ts)
    lower = system.phi_force_inv(ell - system.rho_plus)
    upper = system.phi_force_inv(ell - system.rho_minus)
    if np.isscalar(t) or (isinstance(t, np.ndarray) and t.ndim == 0):
        return float(lower[0]), float(upper[0])
    return lower, upper


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: states, velocities, energies, running dissipation."""

    times: np.ndarray
    states: np.ndarray
    velocities: np.ndarray
    energies: np.ndarray
    dissipation: np.ndarray

    def __post_init__(self) -> None:
        n = self.times.size
        for name in ("states", "velocities", "energies", "dissipation"):
            if getattr(self, name).size != n:
                raise ConfigError(f"trajectory field {name} has mismatched length")
        if n < 2 or np.any(np.diff(self.times) <= 0.0):
            raise ConfigError("trajectory times must be strictly increasing")

    def state_at(self, t) -> float:
        return float(np.interp(t, self.times, self.states))

    def dissipated(self, t1: float, t2: float) -> float:
        """Energy dissipated on [t1, t2], additive across adjacent windows."""
        if t1 > t2:
            raise ConfigError(f"window must have t1 <= t2, got ({t1}, {t2})")
        lo, hi = self.times[0], self.times[-1]
        if t1 < lo - 1e-12 or t2 > hi + 1e-12:
            raise ConfigError(f"window ({t1}, {t2}) outside trajectory range")
        c1 = float(np.interp(t1, self.times, self.dissipation))
        c2 = float(np.interp(t2, self.times, self.dissipation))
        return c2 - c1

    @property
    def total_dissipation(self) -> float:
        return float(self.dissipation[-1])


def default_grid(horizon: float, steps: int = DEFAULT_GRID_POINTS - 1) -> np.ndarray:
    return np.linspace(0.0, horizon, steps + 1)


def solve_limit(system: LimitSystem, z0: float, grid=None) -> Trajectory:
    """Evolve the play process from ``z0`` on a time grid.

    ``z0`` must lie inside the elastic strip at the initial time (up to a
    1e-12 slack for roundoff); otherwise the quasistatic problem has no
    solution starting there and :class:`InvalidInitialStateError` is
    raised.
    """
    if grid is None:
        grid = default_grid(system.loading.horizon)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise ConfigError("time grid must be strictly increasing with >= 2 points")
    if grid[0] < 0.0 or grid[-1] > system.loading.horizon * (1.0 + 1e-12):
        raise ConfigError("time grid must lie within the loading horizon")

    lower, upper = elastic_strip(system, grid)
    scale = max(1.0, abs(z0), float(np.max(np.abs(upper))))
    slack = 1e-12 * scale
    if not lower[0] - slack <= z0 <= upper[0] + slack:
        raise InvalidInitialStateError(
            f"initial state {z0} outside the elastic strip "
            f"[{lower[0]}, {upper[0]}] at t = {grid[0]}"
        )

    states = np.empty_like(grid)
    states[0] = min(max(z0, lower[0]), upper[0])
    z = states[0]
    for n in range(1, grid.size):
        z = min(upper[n], max(lower[n], z))
        states[n] = z

    increments = np.diff(states)
    dissipation = np.concatenate((
        [0.0],
        np.cumsum(
            system.rho_plus * np.maximum(increments, 0.0)
            + system.rho_minus * np.minimum(increments, 0.0)
        ),
    ))
    velocities = np.gradient(states, grid)
    energies = system.phi_value(states) - system.ell(grid) * states
    return Trajectory(
        times=grid,
        states=states,
        velocities=velocities,
        energies=energies,
        dissipation=dissipation,
    )


def dissipation_limit(trajectory: Trajectory, t1: float, t2: float) -> float:
    """Dissipated energy of a quasistatic trajectory over [t1, t2]."""
    return trajectory.dissipated(t1, t2)
