"""Result containers shared by the solve paths."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..model.types import CostBreakdown, OperationSchedule, PlanDecision

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"
TIME_LIMIT = "time-limit"


class SolverFailure(RuntimeError):
    """The backend stopped without a usable answer."""


@dataclass
class PlanSolution:
    status: str
    plan: PlanDecision | None = None
    schedule: OperationSchedule | None = None
    costs: CostBreakdown | None = None
    gap: float | None = None
    method: str = ""
    zeta: float | None = None
    runtime: float = 0.0
    hint: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def objective(self) -> float | None:
        return None if self.costs is None else self.costs.objective

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    @classmethod
    def infeasible(cls, hint: str, method: str) -> "PlanSolution":
        return cls(INFEASIBLE, method=method, hint=hint)


@dataclass(frozen=True)
class BendersCut:
    """``theta[scenario] >= constant + coef @ x`` (optimality) or
    ``0 >= constant + coef @ x`` (feasibility), with ``x`` the stacked
    first-stage vector ``(u, z_res, z_ess)``."""

    kind: str
    scenario: int
    constant: float
    coef: np.ndarray

    def value(self, x: np.ndarray) -> float:
        return float(self.constant + self.coef @ x)


@dataclass
class BendersLog:
    iterations: list[dict] = field(default_factory=list)
    cuts: list[BendersCut] = field(default_factory=list)
    fallback: bool = False

    COLUMNS = ("iteration", "lb", "ub", "gap", "cuts", "master_ms", "sub_ms")

    def record(self, **row) -> None:
        self.iterations.append({k: row[k] for k in self.COLUMNS})

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([r["lb"] for r in self.iterations])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([r["ub"] for r in self.iterations])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.COLUMNS, lineterminator="\n")
            w.writeheader()
            for row in self.iterations:
                w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in row.items()})
