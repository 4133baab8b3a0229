"""Command-line front end.

Exit codes: 0 success, 1 condition violated (``conditions`` only),
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import fields

from .errors import NumericalError, ParameterError
from .evolution import METHODS
from .experiments import (
    ExperimentConfig,
    render_csv,
    run_conditions,
    run_gap,
    run_linearity,
    run_residual,
    run_validate,
)
from .phase import ENGINES

EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

COMMANDS = {
    "gap": (run_gap, "predicted vs actual total phase and their gap"),
    "linearity": (run_linearity, "superposition overlap against the linear prediction"),
    "residual": (run_residual, "residual integrand and its running integral"),
    "validate": (run_validate, "integrator error over a step-halving ladder"),
    "conditions": (None, "traditional and modified adiabatic conditions"),
}

_FIELD_TYPES = {
    "omega0": float,
    "omega": float,
    "theta": float,
    "horizon": float,
    "horizon_periods": float,
    "samples": int,
    "step": float,
    "integrator": str,
    "renormalize_every": int,
    "engine": str,
    "gauge": str,
    "threshold": float,
    "out": str,
    "seed": int,
}


def read_config_file(path: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ParameterError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _convert(key: str, value):
    if key == "theta_deg":
        return math.radians(float(value))
    if key not in _FIELD_TYPES:
        raise ParameterError(f"unknown config key {key!r}")
    try:
        return _FIELD_TYPES[key](value)
    except ValueError as exc:
        raise ParameterError(f"bad value for {key}: {value!r}") from exc


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            values["theta" if key == "theta_deg" else key] = _convert(key, value)
    flags = {f.name: getattr(args, f.name, None) for f in fields(ExperimentConfig)}
    if args.theta_deg is not None:
        flags["theta"] = math.radians(args.theta_deg)
    for key, value in flags.items():
        if value is not None:
            values[key] = value
    # a horizon flag overrides either horizon form from the file
    if args.horizon is not None:
        values.pop("horizon_periods", None)
    if args.horizon_periods is not None:
        values.pop("horizon", None)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ParameterError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiaphase",
        description="Adiabatic phase-gap experiments for a spin-half in a rotating field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--omega0", type=float, help="level splitting (default 10)")
        p.add_argument("--omega", type=float, help="field rotation rate (default 0.01)")
        angle = p.add_mutually_exclusive_group()
        angle.add_argument("--theta", type=float, help="field tilt in radians (default pi/6)")
        angle.add_argument("--theta-deg", type=float, help="field tilt in degrees")
        span = p.add_mutually_exclusive_group()
        span.add_argument("--horizon", type=float, help="horizon in time units")
        span.add_argument("--horizon-periods", type=float, help="horizon in multiples of t0 = 2 pi/omega")
        p.add_argument("--samples", type=int, help="number of grid points (>= 16)")
        p.add_argument("--step", type=float, help="integrator step (default 2e-3)")
        p.add_argument("--integrator", choices=METHODS)
        p.add_argument("--renormalize-every", type=int, help="renormalize the state every N steps")
        p.add_argument("--engine", choices=ENGINES)
        p.add_argument("--gauge", choices=("analytic", "transport"))
        p.add_argument("--threshold", type=float, help="ratio counted as 'much smaller' (default 0.01)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--config", help="flat 'key = value' file; flags override it")
        p.add_argument("--seed", type=int)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
        if args.command == "conditions":
            text, report = run_conditions(config)
            _emit(text, config.out)
            ok = report.traditional_satisfied and report.modified_satisfied
            return EXIT_OK if ok else EXIT_VIOLATED
        table = COMMANDS[args.command][0](config)
        _emit(render_csv(table, args.command, config), config.out)
    except ParameterError as exc:
        print(f"adiaphase: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"adiaphase: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
