"""Map a solver's primal vector back onto domain objects."""

from __future__ import annotations

import numpy as np

from .build import PlanningMilp
from .types import EhInstance, OperationSchedule, PlanDecision

# solver noise below this magnitude is snapped to zero
CLEAN_TOL = 1e-7


def _clean(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a[np.abs(a) < CLEAN_TOL] = 0.0
    return np.maximum(a, 0.0)


def read_plan(pm: PlanningMilp, x: np.ndarray) -> PlanDecision:
    blk = pm.problem.blocks
    return PlanDecision(
        u=np.round(x[blk["u"]]).astype(int),
        z_res=np.round(x[blk["z_res"]]).astype(int),
        z_ess=np.round(x[blk["z_ess"]]).astype(int),
    )


def read_schedule(pm: PlanningMilp, instance: EhInstance, x: np.ndarray) -> OperationSchedule:
    blk = pm.problem.blocks
    sched = OperationSchedule.zeros(instance)
    imap = pm.imap
    vals = _clean(x[blk["p_in"]])  # (S, T, K)
    for k in range(imap.size):
        sched.p_in[:, :, imap.device[k], imap.carrier[k]] = vals[:, :, k]
    sched.hub_out = _clean(x[blk["hub_out"]])
    sched.p_res = _clean(x[blk["p_res"]])
    sched.p_ch = _clean(x[blk["p_ch"]])
    sched.p_dis = _clean(x[blk["p_dis"]])
    sched.soc = _clean(x[blk["soc"]])
    sched.shed = _clean(x[blk["shed"]])
    if "v_ch" in blk:
        sched.v_ch = np.round(x[blk["v_ch"]])
        sched.v_dis = np.round(x[blk["v_dis"]])
    else:
        sched.set_state_flags()
    return sched


def read_zeta(pm: PlanningMilp, x: np.ndarray) -> float:
    return float(x[pm.risk_terms.zeta])
