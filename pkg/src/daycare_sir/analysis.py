"""Final size, long-run home time, optimal attendance and staffing savings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import DiseaseParams
from .numerics import (
    BRANCH_CLAMP,
    INV_E,
    BracketedInterval,
    DomainError,
    NumericsError,
    SolverSettings,
    lambert_w0,
    maximize_scalar,
)

SEARCH_INTERVAL = BracketedInterval(1e-4, 1.0)
# below this distance from -1/e the Lambert route loses about half its digits
_BRANCH_FALLBACK = 1e-6


class CellError(NumericsError):
    """Failure while evaluating one sweep cell or one table row."""


@dataclass(frozen=True)
class OptimizationResult:
    a_star: float
    th_star: float
    evaluations: int
    tolerance_used: float


@dataclass(frozen=True)
class StaffingParams:
    """Children per teacher and the fraction of days the centre is open."""

    children_per_teacher: float = 6.0
    open_days_fraction: float = 5.0 / 7.0

    def __post_init__(self):
        if not self.children_per_teacher >= 1:
            raise ValueError(f"children_per_teacher must be >= 1, got {self.children_per_teacher}")
        if not 0 < self.open_days_fraction <= 1:
            raise ValueError(f"open_days_fraction must lie in (0, 1], got {self.open_days_fraction}")


@dataclass(frozen=True)
class DiseaseEntry:
    name: str
    r0_low: float
    r0_high: float
    r0_used: Optional[float] = None
    gamma: float = 0.1

    def __post_init__(self):
        if self.r0_used is None:
            object.__setattr__(self, "r0_used", 0.5 * (self.r0_low + self.r0_high))
        if not 0 < self.r0_low <= self.r0_used <= self.r0_high:
            raise ValueError(
                f"{self.name}: need 0 < r0_low <= r0_used <= r0_high, got "
                f"r0_low={self.r0_low}, r0_used={self.r0_used}, r0_high={self.r0_high}"
            )
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"{self.name}: gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class TableRow:
    name: str
    r0_used: float
    a_star: float
    th_star: float
    savings: float


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """``th_matrix[i, j]`` is the home time at ``a_values[i]`` and ``r0_values[j]``.

    ``ridge[j]`` / ``ridge_th[j]`` hold the optimal attendance and its home
    time for each ``r0_values[j]``, searched within the span of ``a_values``.
    """

    a_values: np.ndarray
    r0_values: np.ndarray
    th_matrix: np.ndarray
    ridge: np.ndarray
    ridge_th: np.ndarray
    gamma: float = 0.1
    population: float = 100.0
    s0: float = 0.99
    r0_frac: float = 0.0


def _final_size_implicit(x, s0, r0_frac, tol=1e-15):
    # g(r) = 1 - r - s0 exp(-x (r - r0)) is concave with g(r0) >= 0 > g(1)
    lo, hi = r0_frac, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 1.0 - mid - s0 * math.exp(-x * (mid - r0_frac)) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def final_size(a: float, r0_basic: float, s0: float = 0.99, r0_frac: float = 0.0) -> float:
    """Long-run recovered fraction ``r_inf``.

    ``r_inf = 1 + W0(-s0 x exp(-x (1 - r0_frac))) / x`` with ``x = a R0``.
    At ``a = 0`` nobody is infected beyond the seed, so ``r_inf = 1 - s0``.
    Close to the branch point ``-1/e`` the implicit relation
    ``1 - r = s0 exp(-x (r - r0_frac))`` is bisected instead.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"attendance must lie in [0, 1], got {a}")
    if not r0_basic > 0:
        raise ValueError(f"basic reproduction number must be positive, got {r0_basic}")
    if a == 0.0:
        return 1.0 - s0
    x = a * r0_basic
    arg = -s0 * x * math.exp(-x * (1.0 - r0_frac))
    if arg < -INV_E - BRANCH_CLAMP:
        raise DomainError(
            f"final-size argument {arg!r} below -1/e for a={a}, R0={r0_basic}, s0={s0}, r0_frac={r0_frac}"
        )
    if arg + INV_E < _BRANCH_FALLBACK:
        return _final_size_implicit(x, s0, r0_frac)
    r_inf = 1.0 + lambert_w0(arg) / x
    return min(max(r_inf, r0_frac), 1.0)


def th_infinity(
    a: float,
    params: DiseaseParams,
    population: float = 100.0,
    s0: float = 0.99,
    r0_frac: float = 0.0,
) -> float:
    """Total child-days spent at home over the outbreak, ``(1 - a) N r_inf / gamma``."""
    if a == 1.0:
        return 0.0
    r_inf = final_size(a, params.r0_basic, s0, r0_frac)
    return (1.0 - a) * population * r_inf / params.gamma


def optimize_attendance(
    params: DiseaseParams,
    population: float = 100.0,
    s0: float = 0.99,
    r0_frac: float = 0.0,
    settings: SolverSettings = SolverSettings(),
    interval: BracketedInterval = SEARCH_INTERVAL,
) -> OptimizationResult:
    """Attendance rate maximizing :func:`th_infinity`, by golden-section search."""
    count = 0

    def objective(a):
        nonlocal count
        count += 1
        return th_infinity(a, params, population, s0, r0_frac)

    a_star, th_star = maximize_scalar(objective, interval, settings)
    return OptimizationResult(a_star, th_star, count, settings.tolerance)


def staff_savings(th_inf: float, staffing: StaffingParams = StaffingParams()) -> float:
    """Teacher working days saved by ``th_inf`` child-days at home."""
    if th_inf < 0:
        raise ValueError(f"home time must be non-negative, got {th_inf}")
    return th_inf / staffing.children_per_teacher * staffing.open_days_fraction


def sweep(
    a_values: Sequence[float],
    r0_values: Sequence[float],
    gamma: float = 0.1,
    population: float = 100.0,
    s0: float = 0.99,
    r0_frac: float = 0.0,
    settings: SolverSettings = SolverSettings(),
) -> SweepGrid:
    """Tabulate :func:`th_infinity` over an ``(a, R0)`` lattice plus the ridge.

    The ridge search for each ``R0`` is confined to ``[a_values[0], a_values[-1]]``;
    a single-point ``a_values`` makes that point the ridge.
    """
    a_arr = np.asarray(a_values, dtype=float)
    r0_arr = np.asarray(r0_values, dtype=float)
    if a_arr.ndim != 1 or r0_arr.ndim != 1 or a_arr.size == 0 or r0_arr.size == 0:
        raise ValueError("a_values and r0_values must be non-empty 1-d sequences")
    if np.any(np.diff(a_arr) < 0) or np.any(np.diff(r0_arr) < 0):
        raise ValueError("a_values and r0_values must be sorted ascending")
    if a_arr[0] <= 0 or a_arr[-1] > 1:
        raise ValueError("a_values must lie in (0, 1]")
    if r0_arr[0] <= 0:
        raise ValueError("r0_values must be positive")

    th = np.empty((a_arr.size, r0_arr.size))
    ridge = np.empty(r0_arr.size)
    ridge_th = np.empty(r0_arr.size)
    span = BracketedInterval(a_arr[0], a_arr[-1]) if a_arr[-1] > a_arr[0] else None
    for j, r0 in enumerate(r0_arr):
        params = DiseaseParams.from_r0(float(r0), gamma)
        for i, a in enumerate(a_arr):
            try:
                th[i, j] = th_infinity(float(a), params, population, s0, r0_frac)
            except NumericsError as exc:
                raise CellError(f"sweep cell a={a}, R0={r0} failed: {exc}") from exc
        try:
            if span is None:
                ridge[j] = a_arr[0]
                ridge_th[j] = th[0, j]
            else:
                opt = optimize_attendance(params, population, s0, r0_frac, settings, span)
                ridge[j], ridge_th[j] = opt.a_star, opt.th_star
        except NumericsError as exc:
            raise CellError(f"ridge search at R0={r0} failed: {exc}") from exc
    return SweepGrid(a_arr, r0_arr, th, ridge, ridge_th, gamma, population, s0, r0_frac)


def disease_table(
    entries: Sequence[DiseaseEntry],
    population: float = 100.0,
    s0: float = 0.99,
    r0_frac: float = 0.0,
    staffing: StaffingParams = StaffingParams(),
    settings: SolverSettings = SolverSettings(),
) -> list[TableRow]:
    rows = []
    for entry in entries:
        try:
            params = DiseaseParams.from_r0(entry.r0_used, entry.gamma)
            opt = optimize_attendance(params, population, s0, r0_frac, settings)
        except (NumericsError, ValueError) as exc:
            raise CellError(f"{entry.name}: {exc}") from exc
        rows.append(TableRow(entry.name, entry.r0_used, opt.a_star, opt.th_star,
                             staff_savings(opt.th_star, staffing)))
    return rows
