"""Attendance-modified SIR model of illness spread in a daycare centre."""

from .analysis import (
    DiseaseEntry,
    OptimizationResult,
    StaffingParams,
    SweepGrid,
    TableRow,
    disease_table,
    final_size,
    optimize_attendance,
    staff_savings,
    sweep,
    th_infinity,
)
from .model import (
    DiseaseParams,
    PopulationState,
    ScenarioConfig,
    Trajectory,
    attack_rate,
    simulate,
    sir_rhs,
)
from .numerics import (
    BracketedInterval,
    SolverSettings,
    integrate_ode,
    lambert_w0,
    maximize_scalar,
)

__version__ = "0.1.0"
