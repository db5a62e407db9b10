"""Command line surface: JSON config in, CSV (and optional SVG) out.

One JSON file describes the experiment; each subcommand reads the blocks
it needs, validates them strictly (unknown keys are rejected, cross-field
admissibility runs before any computation), computes in memory, and only
then writes output files.  A config problem therefore never leaves partial
results behind.

Exit codes: 0 success, 1 configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .convergence import run_sweep
from .errors import ConfigError, SolverError
from .limit_solver import (
    LimitSystem,
    Ramp,
    SinusoidLoading,
    SmoothedPiecewiseLinear,
    default_grid,
    elastic_strip,
    solve_limit,
)
from .models import (
    AngularBristle,
    SlantedBristle,
    VerticalBristle,
    axial_tension,
    coefficients,
    nap_coefficients,
    perceived_extrema,
    perceived_profile,
)
from .profiles import FourierTerm, SurfaceProfile
from .svg import line_plot
from .variational import limit_density
from .viscous_solver import IntegratorConfig, WigglySystem, integrate

# ---------------------------------------------------------------------------
# schema checking
# ---------------------------------------------------------------------------


def _fail(path: str, message: str):
    raise ConfigError(f"config {path}: {message}")


def _check_keys(obj, path, required=(), optional=()):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        _fail(path, f"unknown keys {unknown}")
    missing = sorted(set(required) - set(obj))
    if missing:
        _fail(path, f"missing required keys {missing}")


def _number(obj, key, path, default=None, positive=False, nonnegative=False):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"{key} must be a number")
    value = float(value)
    if not math.isfinite(value):
        _fail(path, f"{key} must be finite")
    if positive and value <= 0.0:
        _fail(path, f"{key} must be positive, got {value}")
    if nonnegative and value < 0.0:
        _fail(path, f"{key} must be nonnegative, got {value}")
    return value


def _integer(obj, key, path, default=None, minimum=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"{key} must be an integer")
    if minimum is not None and value < minimum:
        _fail(path, f"{key} must be >= {minimum}, got {value}")
    return value


def _boolean(obj, key, path, default=False):
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, bool):
        _fail(path, f"{key} must be true or false")
    return value


def _number_list(obj, key, path, default=None):
    if key not in obj:
        return default
    values = obj[key]
    if not isinstance(values, list) or not values:
        _fail(path, f"{key} must be a non-empty array of numbers")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            _fail(path, f"{key}[{i}] must be a number")
        out.append(float(v))
    return out


# ---------------------------------------------------------------------------
# block builders
# ---------------------------------------------------------------------------


def build_profile(block) -> SurfaceProfile:
    path = "profile"
    _check_keys(block, path, optional=("sinusoid", "terms"))
    if ("sinusoid" in block) == ("terms" in block):
        _fail(path, "give exactly one of 'sinusoid' or 'terms'")
    if "sinusoid" in block:
        sub = block["sinusoid"]
        _check_keys(sub, path + ".sinusoid", optional=("slope", "harmonic", "phase"))
        return SurfaceProfile.sinusoid(
            slope=_number(sub, "slope", path, default=0.1, positive=True),
            harmonic=_integer(sub, "harmonic", path, default=1, minimum=1),
            phase=_number(sub, "phase", path, default=0.0),
        )
    terms = []
    for i, raw in enumerate(block["terms"]):
        term_path = f"{path}.terms[{i}]"
        _check_keys(raw, term_path, required=("amplitude",), optional=("harmonic", "phase"))
        terms.append(
            FourierTerm(
                amplitude=_number(raw, "amplitude", term_path),
                harmonic=_integer(raw, "harmonic", term_path, default=1, minimum=1),
                phase=_number(raw, "phase", term_path, default=0.0),
            )
        )
    return SurfaceProfile(terms=tuple(terms))


def build_model(block):
    path = "model"
    if not isinstance(block, dict) or "kind" not in block:
        _fail(path, "needs a 'kind' of vertical, slanted or angular")
    kind = block["kind"]
    if kind == "vertical":
        _check_keys(block, path, required=("kind", "k", "L_rest", "h"))
        return VerticalBristle(
            k=_number(block, "k", path, positive=True),
            L_rest=_number(block, "L_rest", path),
            h=_number(block, "h", path, positive=True),
        )
    if kind == "slanted":
        _check_keys(block, path, required=("kind", "k", "L_rest", "h", "theta"))
        return SlantedBristle(
            k=_number(block, "k", path, positive=True),
            L_rest=_number(block, "L_rest", path),
            h=_number(block, "h", path, positive=True),
            theta=_number(block, "theta", path),
        )
    if kind == "angular":
        _check_keys(block, path, required=("kind", "k", "L", "h", "theta_rest"))
        return AngularBristle(
            k=_number(block, "k", path, positive=True),
            L=_number(block, "L", path, positive=True),
            h=_number(block, "h", path, positive=True),
            theta_rest=_number(block, "theta_rest", path),
        )
    _fail(path, f"unknown model kind {kind!r}")


def build_loading(block):
    path = "loading"
    if not isinstance(block, dict) or "kind" not in block:
        _fail(path, "needs a 'kind' of ramp, sinusoid or piecewise")
    kind = block["kind"]
    if kind == "ramp":
        _check_keys(block, path, required=("kind", "duration"), optional=("q0", "rate"))
        return Ramp(
            q0=_number(block, "q0", path, default=0.0),
            rate=_number(block, "rate", path, default=1.0),
            duration=_number(block, "duration", path, positive=True),
        )
    if kind == "sinusoid":
        _check_keys(
            block,
            path,
            required=("kind", "duration"),
            optional=("q0", "amplitude", "frequency", "phase"),
        )
        return SinusoidLoading(
            q0=_number(block, "q0", path, default=0.0),
            amplitude=_number(block, "amplitude", path, default=1.0),
            frequency=_number(block, "frequency", path, default=1.0, positive=True),
            duration=_number(block, "duration", path, positive=True),
            phase=_number(block, "phase", path, default=0.0),
        )
    if kind == "piecewise":
        _check_keys(block, path, required=("kind", "times", "values", "blend"))
        return SmoothedPiecewiseLinear(
            times=tuple(_number_list(block, "times", path)),
            values=tuple(_number_list(block, "values", path)),
            blend=_number(block, "blend", path, positive=True),
        )
    _fail(path, f"unknown loading kind {kind!r}")


def build_system(block, loading, coeffs) -> LimitSystem:
    path = "system"
    _check_keys(
        block, path, required=("k_h",), optional=("L_h_rest", "rho_plus", "rho_minus")
    )
    rho_plus = _number(block, "rho_plus", path, default=coeffs.rho_plus)
    rho_minus = _number(block, "rho_minus", path, default=coeffs.rho_minus)
    return LimitSystem(
        k_h=_number(block, "k_h", path, positive=True),
        L_h_rest=_number(block, "L_h_rest", path, default=0.0),
        loading=loading,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
    )


def build_simulation(block):
    path = "simulation"
    _check_keys(
        block,
        path,
        optional=(
            "epsilon",
            "epsilons",
            "gamma",
            "z0",
            "horizon",
            "grid_points",
            "tolerances",
            "windows",
        ),
    )
    tolerances = block.get("tolerances", {})
    _check_keys(tolerances, path + ".tolerances", optional=("rtol", "atol", "max_step"))
    config = IntegratorConfig(
        rtol=_number(tolerances, "rtol", path, default=1e-9, positive=True),
        atol=_number(tolerances, "atol", path, default=1e-11, positive=True),
        max_step=_number(tolerances, "max_step", path, default=None, positive=True),
    )
    windows = block.get("windows")
    if windows is not None:
        if not isinstance(windows, list) or not windows:
            _fail(path, "windows must be a non-empty array of [t1, t2] pairs")
        parsed = []
        for i, pair in enumerate(windows):
            if not isinstance(pair, list) or len(pair) != 2:
                _fail(path, f"windows[{i}] must be a [t1, t2] pair")
            parsed.append((float(pair[0]), float(pair[1])))
        windows = tuple(parsed)
    return {
        "epsilon": _number(block, "epsilon", path, default=None),
        "epsilons": _number_list(block, "epsilons", path, default=None),
        "gamma": _number(block, "gamma", path, default=1.0, positive=True),
        "z0": _number(block, "z0", path, default=0.0),
        "horizon": _number(block, "horizon", path, default=None, positive=True),
        "grid_points": _integer(block, "grid_points", path, default=None, minimum=2),
        "config": config,
        "windows": windows,
    }


_TOP_LEVEL_BLOCKS = (
    "profile",
    "model",
    "loading",
    "system",
    "simulation",
    "sweep_theta",
    "nap",
    "perceived",
    "k_table",
)


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc})") from exc
    _check_keys(raw, "top level", optional=_TOP_LEVEL_BLOCKS)
    return raw


def _need(raw: dict, *blocks):
    missing = sorted(b for b in blocks if b not in raw)
    if missing:
        _fail("top level", f"this command needs the blocks {missing}")
    return [raw[b] for b in blocks]


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _grid_for(loading, sim):
    horizon = sim["horizon"] if sim["horizon"] is not None else loading.horizon
    if horizon > loading.horizon * (1.0 + 1e-12):
        _fail("simulation", f"horizon {horizon} exceeds the loading duration")
    points = sim["grid_points"]
    if points is None:
        return default_grid(horizon)
    return np.linspace(0.0, horizon, points)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_coeffs(raw: dict, out: Path, svg: bool) -> None:
    profile_block, model_block = _need(raw, "profile", "model")
    profile = build_profile(profile_block)
    model = build_model(model_block)
    coeffs = coefficients(model, profile)
    mu_plus_oracle, mu_minus_oracle = perceived_extrema(profile, model.slope_factor)
    _write_csv(
        out / "coeffs.csv",
        (
            "model",
            "alpha",
            "mu_plus",
            "mu_minus",
            "rho_plus",
            "rho_minus",
            "mu_plus_oracle",
            "mu_minus_oracle",
        ),
        [
            (
                model.name,
                coeffs.alpha,
                coeffs.mu_plus,
                coeffs.mu_minus,
                coeffs.rho_plus,
                coeffs.rho_minus,
                mu_plus_oracle,
                mu_minus_oracle,
            )
        ],
    )


def _sweep_theta_bounds(kind: str, slope: float):
    if kind == "slanted":
        return 0.01, math.atan(1.0 / slope) - 0.01
    return math.atan(slope) + 0.01, math.atan(1.0 / slope) - 0.01


def cmd_sweep_theta(raw: dict, out: Path, svg: bool) -> None:
    block = raw.get("sweep_theta", {})
    path = "sweep_theta"
    _check_keys(
        block,
        path,
        required=("model",),
        optional=("count", "slope", "theta_min", "theta_max", "oracle"),
    )
    kind = block["model"]
    if kind not in ("slanted", "angular"):
        _fail(path, f"model must be 'slanted' or 'angular', got {kind!r}")
    count = _integer(block, "count", path, default=50, minimum=1)
    slope = _number(block, "slope", path, default=0.1, positive=True)
    lo, hi = _sweep_theta_bounds(kind, slope)
    lo = _number(block, "theta_min", path, default=lo)
    hi = _number(block, "theta_max", path, default=hi)
    if not 0.0 < lo < hi:
        _fail(path, f"need 0 < theta_min < theta_max, got ({lo}, {hi})")
    with_oracle = _boolean(block, "oracle", path, default=True)

    profile = SurfaceProfile.sinusoid(slope=slope)
    thetas = np.linspace(lo, hi, count + 2)[1:-1]

    rows = []
    for theta in thetas:
        theta = float(theta)
        if kind == "slanted":
            model = SlantedBristle(k=1.0, L_rest=1.0, h=0.05, theta=theta)
        else:
            model = AngularBristle(k=1.0, L=1.0, h=math.cos(theta), theta_rest=0.0)
        coeffs = coefficients(model, profile)
        row = [
            theta,
            model.slope_factor,
            coeffs.alpha,
            coeffs.mu_plus,
            coeffs.mu_minus,
            coeffs.rho_plus,
            coeffs.rho_minus,
        ]
        if with_oracle:
            row.extend(perceived_extrema(profile, model.slope_factor))
        rows.append(tuple(row))

    header = ["theta", "a", "alpha", "mu_plus", "mu_minus", "rho_plus", "rho_minus"]
    if with_oracle:
        header.extend(["mu_plus_oracle", "mu_minus_oracle"])
    _write_csv(out / "sweep_theta.csv", tuple(header), rows)

    if svg:
        line_plot(
            out / "sweep_theta.svg",
            [
                (thetas, [r[3] for r in rows], "mu_plus"),
                (thetas, [-r[4] for r in rows], "-mu_minus"),
            ],
            title=f"perceived slope extremes, {kind} model",
            xlabel="theta",
            ylabel="mu",
        )


def cmd_simulate(raw: dict, out: Path, svg: bool, epsilon=None, with_limit=False) -> None:
    profile_block, model_block, loading_block, system_block = _need(
        raw, "profile", "model", "loading", "system"
    )
    profile = build_profile(profile_block)
    model = build_model(model_block)
    loading = build_loading(loading_block)
    coeffs = coefficients(model, profile)
    system = build_system(system_block, loading, coeffs)
    sim = build_simulation(raw.get("simulation", {}))

    if epsilon is None:
        epsilon = sim["epsilon"]
    if epsilon is None:
        _fail("simulation", "simulate needs an epsilon (config key or --epsilon)")

    wiggly = WigglySystem(
        base=system, model=model, profile=profile, epsilon=float(epsilon), gamma=sim["gamma"]
    )
    grid = _grid_for(loading, sim)
    trajectory = integrate(
        wiggly, sim["z0"], horizon=float(grid[-1]), config=sim["config"], grid=grid
    )

    limit = solve_limit(system, sim["z0"], grid=grid) if with_limit else None

    _write_csv(
        out / "viscous.csv",
        ("t", "z", "zdot", "xi", "energy", "dissipation_cum", "delta_eps"),
        zip(
            trajectory.times,
            trajectory.states,
            trajectory.velocities,
            trajectory.xi,
            trajectory.energies,
            trajectory.dissipation,
            trajectory.delta,
        ),
    )
    if limit is not None:
        lower, upper = elastic_strip(system, limit.times)
        _write_csv(
            out / "limit.csv",
            ("t", "z", "z_tilde_minus", "z_tilde_plus", "dissipation_cum", "energy"),
            zip(
                limit.times,
                limit.states,
                lower,
                upper,
                limit.dissipation,
                limit.energies,
            ),
        )

    if svg:
        series = [(trajectory.times, trajectory.states, f"z_eps (eps={epsilon:g})")]
        bands = None
        if limit is not None:
            series.append((limit.times, limit.states, "z limit"))
            lower, upper = elastic_strip(system, limit.times)
            bands = [(limit.times, lower, upper, "elastic strip")]
        line_plot(
            out / "overlay.svg",
            series,
            title="driven state vs time",
            xlabel="t",
            ylabel="z",
            bands=bands,
        )


def cmd_converge(raw: dict, out: Path, svg: bool) -> None:
    profile_block, model_block, loading_block, system_block = _need(
        raw, "profile", "model", "loading", "system"
    )
    profile = build_profile(profile_block)
    model = build_model(model_block)
    loading = build_loading(loading_block)
    coeffs = coefficients(model, profile)
    system = build_system(system_block, loading, coeffs)
    sim = build_simulation(raw.get("simulation", {}))
    if not sim["epsilons"]:
        _fail("simulation", "converge needs a non-empty 'epsilons' list")

    grid = _grid_for(loading, sim)
    report = run_sweep(
        system,
        profile,
        model,
        epsilons=sim["epsilons"],
        windows=sim["windows"],
        z0=sim["z0"],
        gamma=sim["gamma"],
        config=sim["config"],
        grid=grid,
    )

    gap_names = [f"diss_gap_w{j + 1}" for j in range(len(report.windows))]
    order = "" if report.fitted_order is None else report.fitted_order
    _write_csv(
        out / "convergence.csv",
        ("epsilon", "sup_error", *gap_names, "runtime_s", "fitted_order"),
        [(*row, order) for row in report.rows],
    )

    if svg:
        line_plot(
            out / "convergence.svg",
            [(report.epsilons, report.sup_errors, "sup |z_eps - z|")],
            title="state convergence",
            xlabel="epsilon",
            ylabel="sup error",
            loglog=True,
        )


def cmd_nap(raw: dict, out: Path, svg: bool) -> None:
    block = raw.get("nap", {})
    path = "nap"
    _check_keys(
        block,
        path,
        required=("theta_lim", "theta_with"),
        optional=("mu_plus", "k", "L"),
    )
    theta_lim = _number(block, "theta_lim", path, positive=True)
    theta_with = _number(block, "theta_with", path, nonnegative=True)
    mu_plus = _number(block, "mu_plus", path, default=0.1, positive=True)
    k = _number(block, "k", path, default=1.0, positive=True)
    L = _number(block, "L", path, default=1.0, positive=True)

    rho_with, rho_against = nap_coefficients(mu_plus, theta_lim, theta_with)
    rows = []
    for direction, tilt, rho in (
        ("with", theta_with, rho_with),
        ("against", -theta_with, rho_against),
    ):
        # The rest configuration flips relative to the direction of motion;
        # that flip is what makes the two thresholds differ.
        model = AngularBristle(k=k, L=L, h=L * math.cos(theta_lim), theta_rest=tilt)
        tension = axial_tension(model, rho)
        rows.append(
            (direction, tilt, rho, tension, "true" if tension < 0.0 else "false")
        )
    _write_csv(
        out / "nap.csv",
        ("direction", "rest_tilt", "rho", "tension", "compressed"),
        rows,
    )


def cmd_perceived(raw: dict, out: Path, svg: bool) -> None:
    profile_block, model_block = _need(raw, "profile", "model")
    block = raw.get("perceived", {})
    _check_keys(block, "perceived", optional=("samples",))
    samples = _integer(block, "samples", "perceived", default=512, minimum=8)
    profile = build_profile(profile_block)
    model = build_model(model_block)
    perceived = perceived_profile(profile, model.slope_factor, samples=samples)
    _write_csv(
        out / "perceived.csv",
        ("z", "height", "slope"),
        zip(perceived.grid, perceived.heights, perceived.slopes),
    )
    if svg:
        line_plot(
            out / "perceived.svg",
            [
                (perceived.grid, perceived.heights, "height"),
                (perceived.grid, perceived.slopes, "slope"),
            ],
            title="perceived corrugation over one period",
            xlabel="z",
            ylabel="value",
        )


def cmd_k_table(raw: dict, out: Path, svg: bool) -> None:
    profile_block, model_block = _need(raw, "profile", "model")
    block = raw.get("k_table", {})
    path = "k_table"
    _check_keys(block, path, optional=("xi_min", "xi_max", "count"))
    profile = build_profile(profile_block)
    model = build_model(model_block)
    density = limit_density(model, profile)
    xi_min = _number(block, "xi_min", path, default=2.0 * density.interval.lower)
    xi_max = _number(block, "xi_max", path, default=2.0 * density.interval.upper)
    count = _integer(block, "count", path, default=201, minimum=2)
    if xi_min >= xi_max:
        _fail(path, f"need xi_min < xi_max, got ({xi_min}, {xi_max})")
    xis = np.linspace(xi_min, xi_max, count)
    values = [density.k(float(xi)) for xi in xis]
    _write_csv(out / "k_table.csv", ("xi", "K"), zip(xis, values))
    if svg:
        line_plot(
            out / "k_table.svg",
            [(xis, values, "K(xi)"), (xis, np.abs(xis), "|xi|")],
            title="mean absolute force gap",
            xlabel="xi",
            ylabel="K",
        )


_COMMANDS = {
    "coeffs": cmd_coeffs,
    "sweep-theta": cmd_sweep_theta,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "nap": cmd_nap,
    "perceived": cmd_perceived,
    "k-table": cmd_k_table,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the JSON experiment file")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--svg", action="store_true", help="also write SVG plots")

    parser = argparse.ArgumentParser(
        prog="wfl",
        description="Friction-from-corrugation toolkit: coefficients, trajectories, "
        "convergence sweeps and duality tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="friction coefficient table")
    sub.add_parser("sweep-theta", parents=[common], help="coefficient sweep over tilt angles")
    simulate = sub.add_parser("simulate", parents=[common], help="integrate trajectories")
    simulate.add_argument("--epsilon", type=float, default=None, help="corrugation scale")
    simulate.add_argument(
        "--limit", action="store_true", help="also solve the quasistatic limit"
    )
    sub.add_parser("converge", parents=[common], help="epsilon convergence sweep")
    sub.add_parser("nap", parents=[common], help="direction-dependent thresholds")
    sub.add_parser("perceived", parents=[common], help="perceived corrugation table")
    sub.add_parser("k-table", parents=[common], help="dissipation density table")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            cmd_simulate(
                raw, out, args.svg, epsilon=args.epsilon, with_limit=args.limit
            )
        else:
            _COMMANDS[args.command](raw, out, args.svg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
