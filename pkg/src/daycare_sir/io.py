"""CSV and JSON serialization of trajectories, sweeps, tables and disease catalogs.

CSV numbers use 10 significant digits. JSON numbers use the shortest exact
float representation, so JSON artifacts read back bit-identically.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from importlib import resources
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .analysis import DiseaseEntry, OptimizationResult, SweepGrid, TableRow
from .model import DiseaseParams, ScenarioConfig, Trajectory

TRAJECTORY_COLUMNS = ("t", "S", "I", "R", "I_a", "I_h", "T_h_cum")
SWEEP_COLUMNS = ("a", "R0", "Th_inf")
RIDGE_COLUMNS = ("R0", "a_star", "Th_star")
TABLE_COLUMNS = ("name", "r0_used", "a_star", "Th_star", "savings")
CATALOG_COLUMNS = ("name", "r0_low", "r0_high", "r0_used", "gamma")


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


class CatalogError(ValueError):
    """Malformed or invalid disease catalog, with its location."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


def format_number(x: float) -> str:
    """10 significant digits, no locale, ``-0`` printed as ``0``."""
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.10g}"


def _csv_writer(sink):
    return csv.writer(sink, lineterminator="\n")


def _dump_json(obj, sink):
    json.dump(obj, sink, allow_nan=False)
    sink.write("\n")


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


# -- trajectories -------------------------------------------------------------

def write_trajectory(traj: Trajectory, format: OutputFormat, sink: TextIO) -> None:
    if len(traj) == 0:
        raise ValueError("cannot write an empty trajectory")
    format = OutputFormat(format)
    columns = (traj.t, traj.s, traj.i, traj.r, traj.i_attending, traj.i_home, traj.th_cum)
    if format is OutputFormat.CSV:
        writer = _csv_writer(sink)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in zip(*columns):
            writer.writerow([format_number(v) for v in row])
        return
    p, c = traj.params, traj.config
    doc = {
        "meta": {
            "params": {"beta": p.beta, "gamma": p.gamma},
            "config": {
                "attendance": c.attendance, "population": c.population,
                "s0": c.s0, "i0": c.i0, "r0_frac": c.r0_frac,
            },
        },
    }
    for name, values in zip(TRAJECTORY_COLUMNS, columns):
        doc[name] = _floats(values)
    _dump_json(doc, sink)


def read_trajectory(source: TextIO) -> Trajectory:
    """Inverse of :func:`write_trajectory` for the JSON format."""
    doc = json.load(source)
    meta = doc["meta"]
    return Trajectory(
        t=np.asarray(doc["t"], dtype=float),
        s=np.asarray(doc["S"], dtype=float),
        i=np.asarray(doc["I"], dtype=float),
        r=np.asarray(doc["R"], dtype=float),
        th_cum=np.asarray(doc["T_h_cum"], dtype=float),
        params=DiseaseParams(**meta["params"]),
        config=ScenarioConfig(**meta["config"]),
    )


# -- sweeps -------------------------------------------------------------------

def write_sweep(grid: SweepGrid, format: OutputFormat, sink: TextIO) -> None:
    """Long-form ``a,R0,Th_inf`` rows, a blank line, then ``R0,a_star,Th_star`` ridge rows.

    Rows are grouped by ``R0`` with ``a`` ascending inside each group.
    """
    format = OutputFormat(format)
    if format is OutputFormat.CSV:
        writer = _csv_writer(sink)
        writer.writerow(SWEEP_COLUMNS)
        for j, r0 in enumerate(grid.r0_values):
            for i, a in enumerate(grid.a_values):
                writer.writerow([format_number(a), format_number(r0), format_number(grid.th_matrix[i, j])])
        sink.write("\n")
        writer.writerow(RIDGE_COLUMNS)
        for r0, a_star, th_star in zip(grid.r0_values, grid.ridge, grid.ridge_th):
            writer.writerow([format_number(r0), format_number(a_star), format_number(th_star)])
        return
    doc = {
        "meta": {
            "gamma": grid.gamma, "population": grid.population,
            "s0": grid.s0, "r0_frac": grid.r0_frac,
        },
        "a_values": _floats(grid.a_values),
        "r0_values": _floats(grid.r0_values),
        "th_matrix": [_floats(row) for row in grid.th_matrix],
        "ridge": {"a_star": _floats(grid.ridge), "Th_star": _floats(grid.ridge_th)},
    }
    _dump_json(doc, sink)


def read_sweep(source: TextIO) -> SweepGrid:
    """Inverse of :func:`write_sweep` for the JSON format."""
    doc = json.load(source)
    a_values = np.asarray(doc["a_values"], dtype=float)
    r0_values = np.asarray(doc["r0_values"], dtype=float)
    th = np.asarray(doc["th_matrix"], dtype=float).reshape(a_values.size, r0_values.size)
    return SweepGrid(
        a_values=a_values,
        r0_values=r0_values,
        th_matrix=th,
        ridge=np.asarray(doc["ridge"]["a_star"], dtype=float),
        ridge_th=np.asarray(doc["ridge"]["Th_star"], dtype=float),
        **doc["meta"],
    )


# -- optimization results and disease tables ----------------------------------

def write_optimization(
    result: OptimizationResult,
    savings: float,
    format: OutputFormat,
    sink: TextIO,
    r0_basic: Optional[float] = None,
) -> None:
    format = OutputFormat(format)
    if format is OutputFormat.CSV:
        writer = _csv_writer(sink)
        writer.writerow(("R0", "a_star", "Th_star", "savings", "evaluations", "tolerance"))
        writer.writerow([
            "" if r0_basic is None else format_number(r0_basic),
            format_number(result.a_star), format_number(result.th_star),
            format_number(savings), str(result.evaluations), format_number(result.tolerance_used),
        ])
        return
    _dump_json({
        "R0": r0_basic,
        "a_star": result.a_star,
        "Th_star": result.th_star,
        "savings": savings,
        "evaluations": result.evaluations,
        "tolerance": result.tolerance_used,
    }, sink)


def write_table(rows: Sequence[TableRow], format: OutputFormat, sink: TextIO) -> None:
    format = OutputFormat(format)
    if format is OutputFormat.CSV:
        writer = _csv_writer(sink)
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow([
                row.name, format_number(row.r0_used), format_number(row.a_star),
                format_number(row.th_star), format_number(row.savings),
            ])
        return
    _dump_json([
        {"name": row.name, "r0_used": row.r0_used, "a_star": row.a_star,
         "Th_star": row.th_star, "savings": row.savings}
        for row in rows
    ], sink)


# -- disease catalogs ---------------------------------------------------------

def _parse_float(text, line, field, required=True):
    text = text.strip()
    if not text:
        if required:
            raise CatalogError("missing value", line, field)
        return None
    try:
        value = float(text)
    except ValueError:
        raise CatalogError(f"not a number: {text!r}", line, field) from None
    if not math.isfinite(value):
        raise CatalogError(f"not finite: {text!r}", line, field)
    return value


def read_disease_catalog(source: TextIO) -> list[DiseaseEntry]:
    """Parse a catalog: one ``name,r0_low,r0_high,r0_used,gamma`` record per line.

    ``r0_used`` may be blank, in which case it defaults to the midpoint of
    the range. A header row starting with ``name``, blank lines and lines
    starting with ``#`` are skipped.
    """
    entries = []
    for lineno, raw in enumerate(source, start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        try:
            (fields,) = csv.reader([raw], skipinitialspace=True)
        except csv.Error as exc:
            raise CatalogError(str(exc), lineno) from None
        fields = [f.strip() for f in fields]
        if fields and fields[0].lower() == "name":
            continue
        if len(fields) != len(CATALOG_COLUMNS):
            raise CatalogError(f"expected {len(CATALOG_COLUMNS)} fields, got {len(fields)}", lineno)
        name = fields[0]
        if not name:
            raise CatalogError("missing value", lineno, "name")
        r0_low = _parse_float(fields[1], lineno, "r0_low")
        r0_high = _parse_float(fields[2], lineno, "r0_high")
        r0_used = _parse_float(fields[3], lineno, "r0_used", required=False)
        gamma = _parse_float(fields[4], lineno, "gamma")
        if not r0_low > 0:
            raise CatalogError(f"r0_low must be positive, got {r0_low}", lineno, "r0_low")
        if r0_low > r0_high:
            raise CatalogError(f"r0_low {r0_low} exceeds r0_high {r0_high}", lineno, "r0_high")
        if r0_used is not None and not r0_low <= r0_used <= r0_high:
            raise CatalogError(
                f"r0_used {r0_used} outside [{r0_low}, {r0_high}]", lineno, "r0_used"
            )
        if not gamma > 0:
            raise CatalogError(f"gamma must be positive, got {gamma}", lineno, "gamma")
        entries.append(DiseaseEntry(name, r0_low, r0_high, r0_used, gamma))
    return entries


def write_disease_catalog(entries: Iterable[DiseaseEntry], sink: TextIO) -> None:
    writer = _csv_writer(sink)
    writer.writerow(CATALOG_COLUMNS)
    for e in entries:
        writer.writerow([e.name, repr(float(e.r0_low)), repr(float(e.r0_high)),
                         repr(float(e.r0_used)), repr(float(e.gamma))])


def default_catalog() -> list[DiseaseEntry]:
    """The shipped four-disease catalog."""
    path = resources.files("daycare_sir").joinpath("data/diseases.csv")
    with path.open("r", encoding="utf-8") as fh:
        return read_disease_catalog(fh)
