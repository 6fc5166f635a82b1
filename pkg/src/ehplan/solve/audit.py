"""Check that a relaxed storage dispatch never charges and discharges at once."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model.types import EhInstance, OperationSchedule
from ..risk import RiskConfig

OVERLAP_TOL = 1e-6


@dataclass(frozen=True)
class AuditFlag:
    scenario: int
    step: int
    option: int
    p_ch: float
    p_dis: float

    @property
    def overlap(self) -> float:
        return self.p_ch * self.p_dis


def schedule_overlaps(schedule: OperationSchedule, tol: float = OVERLAP_TOL) -> list[AuditFlag]:
    prod = schedule.p_ch * schedule.p_dis
    return [
        AuditFlag(int(s), int(t), int(n), float(schedule.p_ch[s, t, n]), float(schedule.p_dis[s, t, n]))
        for s, t, n in np.argwhere(prod > tol)
    ]


def relaxation_audit(instance: EhInstance, risk: RiskConfig, solution, tol: float = OVERLAP_TOL) -> list[AuditFlag]:
    """Flags for every (scenario, step, storage) with simultaneous charge
    and discharge in ``solution``. An empty list means the dispatch also
    satisfies the exclusive-mode rows of the integer model."""
    schedule = getattr(solution, "schedule", solution)
    if schedule is None:
        return []
    return schedule_overlaps(schedule, tol)
