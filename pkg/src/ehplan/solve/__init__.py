"""Solve paths: monolithic MILP, Benders decomposition, and an exhaustive
reference for tiny instances."""

from .audit import AuditFlag, relaxation_audit
from .backend import BackendError, HighsBackend, SolveResult, SolverBackend, default_backend
from .benders import FormulationError, benders_solve, cut_violations
from .monolithic import solve_monolithic
from .oracle import OracleResult, OracleSizeError, brute_force_oracle, brute_force_search
from .result import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    TIME_LIMIT,
    BendersCut,
    BendersLog,
    PlanSolution,
    SolverFailure,
)

__all__ = [
    "AuditFlag", "BackendError", "BendersCut", "BendersLog", "FormulationError", "HighsBackend",
    "INFEASIBLE", "ITERATION_LIMIT", "OPTIMAL", "OracleResult", "OracleSizeError", "PlanSolution",
    "SolveResult", "SolverBackend", "SolverFailure", "TIME_LIMIT", "benders_solve",
    "brute_force_oracle", "brute_force_search", "cut_violations", "default_backend",
    "relaxation_audit", "solve_monolithic",
]
