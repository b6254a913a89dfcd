"""Command-line interface.

Usage:
    daycare-sir simulate --a 0.4 --output traj.csv
    daycare-sir optimize --r0 9.5
    daycare-sir sweep --output grid.csv
    daycare-sir table --format json

Exit codes: 0 success, 1 numerical failure, 2 invalid flags or input.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .analysis import (
    CellError,
    StaffingParams,
    disease_table,
    optimize_attendance,
    staff_savings,
    sweep,
)
from .model import (
    DEFAULT_DT,
    DiseaseParams,
    NotConvergedError,
    ScenarioConfig,
    attack_rate,
    simulate,
)
from .numerics import NumericsError

PROG = "daycare-sir"
fmt = sio.format_number


class UsageError(Exception):
    """Flag validation failure; mapped to exit code 2."""


def _population_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=0.1, help="recovery rate per day (default: %(default)s)")
    p.add_argument("--n", type=float, default=100.0, help="number of children (default: %(default)s)")
    p.add_argument("--s0", type=float, default=0.99, help="initial susceptible fraction (default: %(default)s)")
    p.add_argument("--i0", type=float, default=0.01, help="initial infected fraction (default: %(default)s)")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=[f.value for f in sio.OutputFormat], default="csv",
                   help="output format (default: %(default)s)")
    p.add_argument("--output", "-o", type=Path, default=None,
                   help="output file (default: standard output)")


def _staffing_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratio", type=float, default=6.0,
                   help="children per teacher (default: %(default)s)")
    p.add_argument("--open-days-fraction", type=float, default=5 / 7,
                   help="fraction of days the centre is open (default: 5/7)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Attendance-modified SIR model: home time, optimal attendance and staffing savings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the outbreak for one attendance rate")
    p.add_argument("--a", type=float, required=True, help="attendance rate of infected children, in [0, 1]")
    p.add_argument("--beta", type=float, default=0.5, help="infection rate per day (default: %(default)s)")
    _population_flags(p)
    p.add_argument("--t-end", type=float, default=None,
                   help="final time in days (default: until I < 1e-6 N, capped at 10/gamma ln(N/1e-6))")
    p.add_argument("--dt", type=float, default=DEFAULT_DT, help="RK4 step in days (default: %(default)s)")
    _output_flags(p)

    p = sub.add_parser("optimize", help="attendance rate maximizing total home time")
    p.add_argument("--r0", type=float, default=None,
                   help="basic reproduction number; overrides --beta (default: beta/gamma = 5)")
    p.add_argument("--beta", type=float, default=0.5, help="infection rate per day (default: %(default)s)")
    _population_flags(p)
    _staffing_flags(p)
    _output_flags(p)

    p = sub.add_parser("sweep", help="home time over an (a, R0) grid plus the optimal-attendance ridge")
    p.add_argument("--a-min", type=float, default=0.01, help="smallest attendance rate (default: %(default)s)")
    p.add_argument("--a-max", type=float, default=1.0, help="largest attendance rate (default: %(default)s)")
    p.add_argument("--a-steps", type=int, default=100, help="number of attendance values (default: %(default)s)")
    p.add_argument("--r0-min", type=float, default=1.0, help="smallest R0 (default: %(default)s)")
    p.add_argument("--r0-max", type=float, default=18.0, help="largest R0 (default: %(default)s)")
    p.add_argument("--r0-steps", type=int, default=171, help="number of R0 values (default: %(default)s)")
    _population_flags(p)
    _output_flags(p)

    p = sub.add_parser("table", help="optimal attendance and savings for a disease catalog")
    p.add_argument("--catalog", type=Path, default=None,
                   help="catalog CSV (default: shipped four-disease catalog)")
    p.add_argument("--n", type=float, default=100.0, help="number of children (default: %(default)s)")
    p.add_argument("--s0", type=float, default=0.99, help="initial susceptible fraction (default: %(default)s)")
    p.add_argument("--i0", type=float, default=0.01, help="initial infected fraction (default: %(default)s)")
    _staffing_flags(p)
    _output_flags(p)
    return parser


def _require(ok: bool, flag: str, message: str) -> None:
    if not ok:
        raise UsageError(f"{flag}: {message}")


def _positive(value: float, flag: str) -> None:
    _require(math.isfinite(value) and value > 0, flag, f"must be a positive number, got {value}")


def _initial_fractions(args) -> tuple[float, float, float]:
    _require(0 <= args.s0 <= 1, "--s0", f"must lie in [0, 1], got {args.s0}")
    _require(0 <= args.i0 <= 1, "--i0", f"must lie in [0, 1], got {args.i0}")
    r0_frac = 1.0 - args.s0 - args.i0
    _require(r0_frac >= -1e-12, "--i0", f"--s0 + --i0 must not exceed 1, got {args.s0 + args.i0}")
    # rounding residue of 1 - s0 - i0 is not a recovered population
    if abs(r0_frac) < 1e-12:
        r0_frac = 0.0
    return args.s0, args.i0, r0_frac


def _staffing(args) -> StaffingParams:
    _require(args.ratio >= 1, "--ratio", f"must be >= 1, got {args.ratio}")
    _require(0 < args.open_days_fraction <= 1, "--open-days-fraction",
             f"must lie in (0, 1], got {args.open_days_fraction}")
    return StaffingParams(args.ratio, args.open_days_fraction)


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def run_simulate(args) -> int:
    _require(0 <= args.a <= 1, "--a", f"must lie in [0, 1], got {args.a}")
    _positive(args.beta, "--beta")
    _positive(args.gamma, "--gamma")
    _positive(args.n, "--n")
    _positive(args.dt, "--dt")
    if args.t_end is not None:
        _positive(args.t_end, "--t-end")
    s0, i0, r0_frac = _initial_fractions(args)

    params = DiseaseParams(args.beta, args.gamma)
    config = ScenarioConfig(args.a, args.n, s0, i0, r0_frac)
    traj = simulate(params, config, t_end=args.t_end, dt=args.dt)
    with _sink(args.output) as sink:
        sio.write_trajectory(traj, args.format, sink)
    try:
        rate = fmt(attack_rate(traj))
    except NotConvergedError as exc:
        print(f"{PROG} simulate: warning: {exc}", file=sys.stderr)
        rate = "nan"
    summary = f"a={fmt(args.a)} Th_end={fmt(traj.th_cum[-1])} attack_rate={rate}"
    # keep stdout parseable when the trajectory itself goes there
    print(summary, file=sys.stdout if args.output is not None else sys.stderr)
    return 0


def run_optimize(args) -> int:
    _positive(args.gamma, "--gamma")
    _positive(args.n, "--n")
    if args.r0 is not None:
        _positive(args.r0, "--r0")
        params = DiseaseParams.from_r0(args.r0, args.gamma)
    else:
        _positive(args.beta, "--beta")
        params = DiseaseParams(args.beta, args.gamma)
    s0, _, r0_frac = _initial_fractions(args)
    staffing = _staffing(args)

    result = optimize_attendance(params, args.n, s0, r0_frac)
    savings = staff_savings(result.th_star, staffing)
    r0_basic = args.r0 if args.r0 is not None else params.r0_basic
    summary = f"a_star={fmt(result.a_star)} Th_star={fmt(result.th_star)} savings={fmt(savings)}"
    if args.output is not None:
        with _sink(args.output) as sink:
            sio.write_optimization(result, savings, args.format, sink, r0_basic)
        print(summary)
    elif args.format == sio.OutputFormat.JSON.value:
        sio.write_optimization(result, savings, args.format, sys.stdout, r0_basic)
    else:
        print(summary)
    return 0


def run_sweep(args) -> int:
    _require(0 < args.a_min <= 1, "--a-min", f"must lie in (0, 1], got {args.a_min}")
    _require(0 < args.a_max <= 1, "--a-max", f"must lie in (0, 1], got {args.a_max}")
    _require(args.a_min <= args.a_max, "--a-min", f"must not exceed --a-max ({args.a_min} > {args.a_max})")
    _require(args.a_steps >= 1, "--a-steps", f"must be >= 1, got {args.a_steps}")
    _positive(args.r0_min, "--r0-min")
    _positive(args.r0_max, "--r0-max")
    _require(args.r0_min <= args.r0_max, "--r0-min",
             f"must not exceed --r0-max ({args.r0_min} > {args.r0_max})")
    _require(args.r0_steps >= 1, "--r0-steps", f"must be >= 1, got {args.r0_steps}")
    _positive(args.gamma, "--gamma")
    _positive(args.n, "--n")
    s0, _, r0_frac = _initial_fractions(args)

    a_values = np.linspace(args.a_min, args.a_max, args.a_steps)
    r0_values = np.linspace(args.r0_min, args.r0_max, args.r0_steps)
    grid = sweep(a_values, r0_values, args.gamma, args.n, s0, r0_frac)
    with _sink(args.output) as sink:
        sio.write_sweep(grid, args.format, sink)
    return 0


def run_table(args) -> int:
    _positive(args.n, "--n")
    s0, _, r0_frac = _initial_fractions(args)
    staffing = _staffing(args)
    if args.catalog is None:
        entries = sio.default_catalog()
    else:
        try:
            with open(args.catalog, encoding="utf-8") as fh:
                entries = sio.read_disease_catalog(fh)
        except OSError as exc:
            raise UsageError(f"--catalog: cannot read {args.catalog}: {exc.strerror}") from None
        except sio.CatalogError as exc:
            raise UsageError(f"--catalog: {args.catalog}: {exc}") from None
    rows = disease_table(entries, args.n, s0, r0_frac, staffing)
    with _sink(args.output) as sink:
        sio.write_table(rows, args.format, sink)
    return 0


COMMANDS = {
    "simulate": run_simulate,
    "optimize": run_optimize,
    "sweep": run_sweep,
    "table": run_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, CellError) as exc:
        print(f"{parser.prog} {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
