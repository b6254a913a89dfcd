"""SIR dynamics where only attending infected children transmit.

A fraction ``a`` of the infected attend and infect others; the remaining
``1 - a`` stay home. The cumulative home time ``T_h(t) = (1 - a) * int_0^t I``
is carried as a fourth state variable so it is integrated at the same order
as the populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import NumericsError, SolverSettings, integrate_ode

EXTINCTION_FRACTION = 1e-6
DEFAULT_DT = 0.01


class NotConvergedError(NumericsError):
    """Trajectory ended while the outbreak was still active."""


@dataclass(frozen=True)
class DiseaseParams:
    """Infection rate ``beta`` and recovery rate ``gamma``, both per day."""

    beta: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")

    @classmethod
    def from_r0(cls, r0_basic: float, gamma: float = 0.1) -> "DiseaseParams":
        if not (math.isfinite(r0_basic) and r0_basic > 0):
            raise ValueError(f"basic reproduction number must be positive, got {r0_basic}")
        return cls(beta=r0_basic * gamma, gamma=gamma)

    @property
    def r0_basic(self) -> float:
        return self.beta / self.gamma


@dataclass(frozen=True)
class ScenarioConfig:
    """Population size, initial fractions and attendance rate.

    Defaults mirror the reference outbreak: 100 children, one of them infected.
    """

    attendance: float
    population: float = 100.0
    s0: float = 0.99
    i0: float = 0.01
    r0_frac: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.population) and self.population > 0):
            raise ValueError(f"population must be positive, got {self.population}")
        for name in ("s0", "i0", "r0_frac"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a non-negative fraction, got {value}")
        if abs(self.s0 + self.i0 + self.r0_frac - 1.0) > 1e-12:
            raise ValueError(
                f"initial fractions must sum to 1, got s0+i0+r0_frac = "
                f"{self.s0 + self.i0 + self.r0_frac!r}"
            )
        if not 0.0 <= self.attendance <= 1.0:
            raise ValueError(f"attendance must lie in [0, 1], got {self.attendance}")


@dataclass(frozen=True)
class PopulationState:
    t: float
    s: float
    i: float
    r: float
    th_cum: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution, stored column-wise.

    ``samples`` materialises the rows as :class:`PopulationState` objects.
    """

    t: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    th_cum: np.ndarray
    params: DiseaseParams
    config: ScenarioConfig

    def __len__(self):
        return len(self.t)

    @property
    def i_attending(self) -> np.ndarray:
        return self.config.attendance * self.i

    @property
    def i_home(self) -> np.ndarray:
        return (1.0 - self.config.attendance) * self.i

    @property
    def samples(self) -> list[PopulationState]:
        return [
            PopulationState(float(t), float(s), float(i), float(r), float(h))
            for t, s, i, r, h in zip(self.t, self.s, self.i, self.r, self.th_cum)
        ]

    @property
    def final(self) -> PopulationState:
        return PopulationState(
            float(self.t[-1]), float(self.s[-1]), float(self.i[-1]),
            float(self.r[-1]), float(self.th_cum[-1]),
        )


def sir_rhs(state: PopulationState, params: DiseaseParams, config: ScenarioConfig) -> tuple[float, float, float]:
    """Derivatives ``(dS, dI, dR)`` at ``state``."""
    infection = config.attendance * params.beta / config.population * state.i * state.s
    recovery = params.gamma * state.i
    return -infection, infection - recovery, recovery


def default_horizon(params: DiseaseParams, config: ScenarioConfig) -> float:
    """Hard cap on integration time, ``10 / gamma * ln(N / 1e-6)``."""
    return 10.0 / params.gamma * math.log(config.population / EXTINCTION_FRACTION)


def simulate(
    params: DiseaseParams,
    config: ScenarioConfig,
    t_end: Optional[float] = None,
    dt: float = DEFAULT_DT,
    settings: Optional[SolverSettings] = None,
) -> Trajectory:
    """Integrate the outbreak from its initial fractions.

    With ``t_end=None`` integration stops once ``I < 1e-6 N`` while falling,
    or at :func:`default_horizon`, whichever comes first. An explicit
    ``t_end`` integrates over exactly ``[0, t_end]``.

    ``settings`` switches on step-halving refinement, see
    :func:`~daycare_sir.numerics.integrate_ode`.
    """
    n = config.population
    a = config.attendance
    rate = a * params.beta / n
    gamma = params.gamma
    home = 1.0 - a

    def rhs(y):
        s, i = y[0], y[1]
        infection = rate * i * s
        recovery = gamma * i
        return (-infection, infection - recovery, recovery, home * i)

    stop = None
    if t_end is None:
        t_end = default_horizon(params, config)
        threshold = EXTINCTION_FRACTION * n

        def stop(y):
            return y[1] < threshold and (y[1] == 0.0 or rate * y[0] <= gamma)

    y0 = (config.s0 * n, config.i0 * n, config.r0_frac * n, 0.0)
    t, y = integrate_ode(rhs, y0, t_end, dt, settings=settings, stop=stop)
    return Trajectory(
        t=t, s=y[:, 0], i=y[:, 1], r=y[:, 2], th_cum=y[:, 3],
        params=params, config=config,
    )


def attack_rate(traj: Trajectory) -> float:
    """Terminal recovered fraction ``R(t_end) / N``.

    Raises
    ------
    NotConvergedError
        If the terminal infected count is still ``>= 1e-6 N``.
    """
    n = traj.config.population
    i_end = float(traj.i[-1])
    if i_end >= EXTINCTION_FRACTION * n:
        raise NotConvergedError(
            f"outbreak still active at t={float(traj.t[-1])}: I={i_end} >= {EXTINCTION_FRACTION}*N"
        )
    return float(traj.r[-1]) / n
