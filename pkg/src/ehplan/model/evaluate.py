"""Recompute cost components from a plan and a dispatch schedule."""

from __future__ import annotations

import numpy as np

from ..risk import LossDistribution, cvar, empirical_var
from .build import investment_coefficients
from .types import CostBreakdown, EhInstance, ModelError, OperationSchedule, PlanDecision

_POWER_FIELDS = ("p_in", "hub_out", "p_res", "p_ch", "p_dis", "soc", "shed")


def check_shapes(instance: EhInstance, plan: PlanDecision, schedule: OperationSchedule) -> None:
    S, T = len(instance.scenarios), instance.steps
    D, M, N = len(instance.devices), len(instance.res_options), len(instance.ess_options)
    if plan.u.shape != (D,) or plan.z_res.shape != (M,) or plan.z_ess.shape != (N,):
        raise ModelError("plan does not match the instance option sets")
    expected = {
        "p_in": (S, T, D, 2), "hub_out": (S, T, 3), "p_res": (S, T, M), "p_ch": (S, T, N),
        "p_dis": (S, T, N), "soc": (S, T + 1, N), "v_ch": (S, T, N), "v_dis": (S, T, N),
        "shed": (S, T, 3),
    }
    for name, shape in expected.items():
        got = getattr(schedule, name).shape
        if got != shape:
            raise ModelError(f"schedule.{name} has shape {got}, expected {shape}")


def investment_cost(instance: EhInstance, plan: PlanDecision) -> float:
    c_dev, c_res, c_ess = investment_coefficients(instance)
    return float(c_dev @ plan.u + c_res @ plan.z_res + c_ess @ plan.z_ess)


def scenario_costs(instance: EhInstance, schedule: OperationSchedule) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Daily trading, maintenance and shedding cost of every scenario."""
    dt = instance.dt
    price = np.stack([sc.price_e for sc in instance.scenarios])  # (S, T)
    grid_e = schedule.p_in[..., 0].sum(axis=2)
    gas = schedule.p_in[..., 1].sum(axis=(1, 2))
    tc = dt * ((price * grid_e).sum(axis=1) + instance.gas_price * gas)

    lam_dev = np.array([d.maintenance_rate for d in instance.devices])
    lam_res = np.array([o.maintenance_rate for o in instance.res_options])
    lam_ess = np.array([o.maintenance_rate for o in instance.ess_options])
    throughput = schedule.p_in.sum(axis=(1, 3))  # (S, D)
    mileage = (schedule.p_ch + schedule.p_dis).sum(axis=1)  # (S, N)
    mc = dt * (throughput @ lam_dev + schedule.p_res.sum(axis=1) @ lam_res + mileage @ lam_ess)

    lc = dt * (schedule.shed.sum(axis=1) @ np.array(instance.shed_cost))
    return tc, mc, lc


def evaluate_costs(instance: EhInstance, plan: PlanDecision, schedule: OperationSchedule,
                   alpha: float, beta: float) -> CostBreakdown:
    """Full cost breakdown of a plan and its dispatch.

    Per-scenario components are daily; expected operation cost, VaR, CVaR
    and the objective are scaled by ``instance.days_per_year``.
    """
    check_shapes(instance, plan, schedule)
    for name in _POWER_FIELDS:
        arr = getattr(schedule, name)
        if arr.size and arr.min() < 0:
            raise ModelError(f"negative value in schedule.{name}: {arr.min()!r}")
    ic = investment_cost(instance, plan)
    tc, mc, lc = scenario_costs(instance, schedule)
    probs = instance.probs
    days = instance.days_per_year
    loss = LossDistribution(days * (tc + mc + lc), probs)
    oc = float(probs @ loss.losses)
    var_a = empirical_var(loss, alpha)
    cvar_a = cvar(loss, alpha)
    obj = ic + (1.0 - beta) * oc + beta * cvar_a
    return CostBreakdown(
        ic=ic, tc=tc, mc=mc, lc=lc, probs=probs, days_per_year=days,
        oc_expected=oc, var_alpha=var_a, cvar_alpha=cvar_a, objective=obj,
        alpha=alpha, beta=beta,
    )
