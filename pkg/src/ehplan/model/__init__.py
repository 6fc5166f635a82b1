"""Energy hub domain types, MILP formulation, cost evaluation and validation."""

from .build import PlanningMilp, build_milp, census, input_map
from .evaluate import evaluate_costs, investment_cost, scenario_costs
from .physics import annualization_coefficient, pv_power_max, res_availability, wind_power_max
from .solution import read_plan, read_schedule, read_zeta
from .types import (
    CostBreakdown,
    DeviceKind,
    DeviceOption,
    EhInstance,
    EssKind,
    EssModuleSpec,
    InfeasibleModelError,
    ModelError,
    OperationSchedule,
    PlanDecision,
    ResKind,
    ResModuleSpec,
    Scenario,
)
from .validate import LABELS, Violation, validate_schedule

__all__ = [
    "CostBreakdown", "DeviceKind", "DeviceOption", "EhInstance", "EssKind", "EssModuleSpec",
    "InfeasibleModelError", "LABELS", "ModelError", "OperationSchedule", "PlanDecision",
    "PlanningMilp", "ResKind", "ResModuleSpec", "Scenario", "Violation",
    "annualization_coefficient", "build_milp", "census", "evaluate_costs", "input_map",
    "investment_cost", "pv_power_max", "read_plan", "read_schedule", "read_zeta",
    "res_availability", "scenario_costs", "validate_schedule", "wind_power_max",
]
