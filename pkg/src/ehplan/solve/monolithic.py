"""Solve the planning MILP as one problem."""

from __future__ import annotations

import logging
import time

import numpy as np

from ..model import (
    EhInstance,
    InfeasibleModelError,
    build_milp,
    evaluate_costs,
    read_plan,
    read_schedule,
    read_zeta,
)
from ..model.build import PlanningMilp
from ..risk import RiskConfig
from . import backend as bk
from .result import INFEASIBLE, OPTIMAL, TIME_LIMIT, PlanSolution, SolverFailure

log = logging.getLogger(__name__)


def polish(pm: PlanningMilp, x: np.ndarray, backend) -> np.ndarray:
    """Fix integer columns at their rounded values and re-solve the LP so
    continuous values are consistent with exact integers."""
    prob = pm.problem
    ints = prob.integrality.astype(bool)
    if not ints.any():
        return x
    fixed = np.round(x[ints])
    lb, ub = prob.lb.copy(), prob.ub.copy()
    lb[ints] = fixed
    ub[ints] = fixed
    res = backend.solve(prob, relax=True, lb=lb, ub=ub)
    if res.status != bk.OPTIMAL:
        log.warning("polish LP returned %s; keeping raw MILP point", res.status)
        return x
    return res.x


def solve_monolithic(instance: EhInstance, risk: RiskConfig, gap: float = 1e-4,
                     time_limit: float | None = None, backend=None) -> PlanSolution:
    """Build and solve the full MILP, then recompute costs from the point."""
    backend = backend or bk.default_backend()
    t0 = time.perf_counter()
    try:
        pm = build_milp(instance, risk)
    except InfeasibleModelError as exc:
        return PlanSolution.infeasible(str(exc), "monolithic")
    try:
        res = backend.solve(pm.problem, gap=gap, time_limit=time_limit)
    except bk.BackendError as exc:
        raise SolverFailure(str(exc)) from exc
    if res.status == bk.INFEASIBLE:
        return PlanSolution.infeasible(f"backend reports infeasible: {res.message}", "monolithic")
    if not res.has_solution:
        raise SolverFailure(f"backend status {res.status}: {res.message}")
    x = polish(pm, res.x, backend)
    plan = read_plan(pm, x)
    schedule = read_schedule(pm, instance, x)
    costs = evaluate_costs(instance, plan, schedule, risk.alpha, risk.beta)
    achieved = None
    if res.dual_bound is not None:
        achieved = max(0.0, (costs.objective - res.dual_bound) / max(abs(costs.objective), 1e-12))
    status = OPTIMAL if res.status == bk.OPTIMAL else TIME_LIMIT
    return PlanSolution(
        status=status,
        plan=plan,
        schedule=schedule,
        costs=costs,
        gap=achieved,
        method="monolithic",
        zeta=read_zeta(pm, x),
        runtime=time.perf_counter() - t0,
    )
