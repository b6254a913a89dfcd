"""Scalar numerical kernels.

Principal-branch Lambert W, golden-section maximization and a classical
fixed-step RK4 integrator. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

INV_E = math.exp(-1.0)
BRANCH_CLAMP = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NumericsError(Exception):
    """Base class for failures raised by the numerical kernels."""


class DomainError(NumericsError, ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(NumericsError, RuntimeError):
    """Iteration did not reach the requested tolerance."""


class StepSizeUnderflow(NumericsError, RuntimeError):
    """Step halving went below the smallest usable step."""


@dataclass(frozen=True)
class BracketedInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = 1e-8
    max_iterations: int = 200

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations}")


def _halley(z, w, max_iterations=60):
    for _ in range(max_iterations):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            return w
    return w


def lambert_w0(z: float) -> float:
    """Principal branch of the Lambert W function for real ``z >= -1/e``.

    Solves ``w * exp(w) = z`` by Halley iteration. The starting point is a
    series in ``p = sqrt(2 (e z + 1))`` near the branch point, ``log1p(z)`` in
    the middle range and ``log z - log log z`` for large ``z``.

    Arguments within ``BRANCH_CLAMP`` below ``-1/e`` are clamped to the branch
    point, where the result is exactly ``-1``.

    Raises
    ------
    DomainError
        If ``z`` is NaN or lies more than ``BRANCH_CLAMP`` below ``-1/e``.
    """
    z = float(z)
    if math.isnan(z):
        raise DomainError("lambert_w0 is undefined for NaN")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        if z > 0:
            return math.inf
        raise DomainError("lambert_w0 argument -inf is below the branch point -1/e")
    if z <= -INV_E:
        if z < -INV_E - BRANCH_CLAMP:
            raise DomainError(f"lambert_w0 argument {z!r} is below the branch point -1/e")
        return -1.0

    if z < -0.25:
        p = math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif z < 3.0:
        w = math.log1p(z)
    else:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    w = _halley(z, w)
    # floating point can nudge the branch-point neighbourhood just past -1
    return max(w, -1.0)


def maximize_scalar(
    f: Callable[[float], float],
    interval: BracketedInterval,
    settings: SolverSettings = SolverSettings(),
) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal ``f``.

    Returns ``(x_star, f(x_star))`` where ``x_star`` is the midpoint of the
    final bracket, whose half-width is at most ``settings.tolerance``.
    """
    lo, hi = interval.lo, interval.hi
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(settings.max_iterations):
        if hi - lo <= 2.0 * settings.tolerance:
            x_star = 0.5 * (lo + hi)
            return x_star, f(x_star)
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    raise ConvergenceError(
        f"golden-section search did not shrink [{interval.lo}, {interval.hi}] "
        f"below {settings.tolerance} in {settings.max_iterations} iterations"
    )


def _rk4(rhs, y0, t_end, dt, stop):
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    y = [float(v) for v in y0]
    ts = [0.0]
    ys = [y]
    if stop is not None and stop(y):
        return ts, ys
    for k in range(1, n_steps + 1):
        t_next = t_end if k == n_steps else k * dt
        h = t_next - ts[-1]
        h2 = 0.5 * h
        k1 = rhs(y)
        k2 = rhs([a + h2 * b for a, b in zip(y, k1)])
        k3 = rhs([a + h2 * b for a, b in zip(y, k2)])
        k4 = rhs([a + h * b for a, b in zip(y, k3)])
        y = [
            a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
        ]
        ts.append(t_next)
        ys.append(y)
        if stop is not None and stop(y):
            break
    return ts, ys


def integrate_ode(
    rhs: Callable[[Sequence[float]], Sequence[float]],
    y0: Sequence[float],
    t_end: float,
    dt: float = 0.01,
    *,
    settings: Optional[SolverSettings] = None,
    stop: Optional[Callable[[Sequence[float]], bool]] = None,
    min_dt: float = 1e-9,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the autonomous system ``y' = rhs(y)`` from ``t = 0`` with RK4.

    Parameters
    ----------
    rhs : callable
        Maps a state sequence to its derivative (same length).
    y0 : sequence of float
        Initial state.
    t_end : float
        Final time. The last step is shortened to land on it exactly.
    dt : float
        Step size.
    settings : SolverSettings, optional
        When given, ``dt`` is halved until halving it again moves the end
        state by less than ``settings.tolerance`` (max norm), at most
        ``settings.max_iterations`` times.
    stop : callable, optional
        Predicate on the state checked after every step; integration ends at
        the first step where it returns True.

    Returns
    -------
    t : ndarray, shape (n,)
    y : ndarray, shape (n, len(y0))
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not all(math.isfinite(v) for v in y0):
        raise ValueError("initial state must be finite")

    ts, ys = _rk4(rhs, y0, t_end, dt, stop)
    if settings is not None:
        # the refinement runs share the coarse run's stopping time
        horizon = ts[-1]
        for _ in range(settings.max_iterations):
            if horizon == 0.0:
                break
            dt *= 0.5
            if dt < min_dt:
                raise StepSizeUnderflow(f"step size fell below {min_dt} before reaching tolerance")
            fine_ts, fine_ys = _rk4(rhs, y0, horizon, dt, None)
            change = max(abs(a - b) for a, b in zip(ys[-1], fine_ys[-1]))
            ts, ys = fine_ts, fine_ys
            if change < settings.tolerance:
                break
        else:
            raise ConvergenceError(
                f"step halving did not settle within {settings.max_iterations} refinements"
            )
    return np.asarray(ts), np.asarray(ys, dtype=float)
