"""Check a plan and dispatch schedule against every model constraint.

Each reported :class:`Violation` carries the constraint family name and the
numeric label of the constraint group it belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .build import availability, big_m
from .evaluate import check_shapes
from .types import DeviceKind, EhInstance, OperationSchedule, PlanDecision, ResKind

TOL = 1e-6

# constraint family -> group label
LABELS = {
    "invest_min": "13",
    "module_count": "14",
    "wt_avail": "15",
    "pv_avail": "17",
    "ess_exclusive": "19",
    "ess_ch_bigm": "20a",
    "ess_ch_cap": "20b",
    "ess_dis_bigm": "21a",
    "ess_dis_cap": "21b",
    "ess_soc_cap": "22",
    "ess_dynamics": "23",
    "ess_cyclic": "24",
    "hub_coupling": "25",
    "dev_input_e": "26",
    "dev_input_g": "27",
    "shed_bounds": "28",
    "res_penetration": "29",
    "balance_e": "30",
    "balance_h": "31",
    "balance_c": "32",
    "nonnegative": "nonneg",
}


@dataclass(frozen=True)
class Violation:
    constraint: str
    scenario: int | None
    step: int | None
    option: int | None
    residual: float

    @property
    def eq(self) -> str:
        return LABELS[self.constraint]

    def __str__(self):
        where = ", ".join(
            f"{k}={v}" for k, v in (("s", self.scenario), ("t", self.step), ("opt", self.option)) if v is not None
        )
        return f"[{self.eq}] {self.constraint} ({where}) residual={self.residual:.3g}"


class _Report:
    def __init__(self, tol: float):
        self.tol = tol
        self.items: list[Violation] = []

    def excess(self, name: str, amount: np.ndarray, axes=("scenario", "step", "option")) -> None:
        """Record every entry where ``amount`` (a positive-is-bad residual)
        exceeds the tolerance."""
        amount = np.asarray(amount, dtype=float)
        for pos in np.argwhere(amount > self.tol):
            fields = dict.fromkeys(("scenario", "step", "option"))
            for ax, p in zip(axes, pos):
                fields[ax] = int(p)
            self.items.append(Violation(name, residual=float(amount[tuple(pos)]), **fields))


def validate_schedule(instance: EhInstance, plan: PlanDecision, schedule: OperationSchedule,
                      tol: float = TOL) -> list[Violation]:
    """Return all constraint violations larger than ``tol`` (MW or MWh)."""
    check_shapes(instance, plan, schedule)
    rep = _Report(tol)
    S, T = len(instance.scenarios), instance.steps
    u, z_res, z_ess = plan.u.astype(float), plan.z_res.astype(float), plan.z_ess.astype(float)

    for kind in (DeviceKind.CCHP, DeviceKind.TX):
        cols = instance.devices_of(kind)
        rep.excess("invest_min", np.array([1.0 - u[cols].sum()]), axes=("option",))
    bad_u = np.maximum(-u, u - 1) + (np.abs(u - np.round(u)) > 0)
    rep.excess("module_count", bad_u, axes=("option",))
    caps = np.array([o.max_modules for o in instance.res_options] + [o.max_modules for o in instance.ess_options], dtype=float)
    z_all = np.r_[z_res, z_ess]
    rep.excess("module_count", np.maximum(-z_all, z_all - caps), axes=("option",))

    for name in ("p_in", "hub_out", "p_res", "p_ch", "p_dis", "shed"):
        arr = getattr(schedule, name)
        rep.excess("nonnegative", -arr.reshape(S, T, -1))

    # renewables
    avail = availability(instance)
    for m, opt in enumerate(instance.res_options):
        name = "wt_avail" if opt.kind is ResKind.WT else "pv_avail"
        rep.excess(name, (schedule.p_res[:, :, m] - z_res[m] * avail[:, :, m]), axes=("scenario", "step"))

    # storage
    ess = instance.ess_options
    if ess:
        v_ch, v_dis = schedule.v_ch, schedule.v_dis
        not_binary = (np.abs(v_ch - np.round(v_ch)) > tol) | (np.abs(v_dis - np.round(v_dis)) > tol)
        rep.excess("ess_exclusive", v_ch + v_dis - 1.0 + not_binary * 1.0)
        m_ch, m_dis = big_m(instance)
        pch = np.array([o.max_charge_power for o in ess])
        pdis = np.array([o.max_discharge_power for o in ess])
        emod = np.array([o.energy_per_module for o in ess])
        eta_ch = np.array([o.eta_ch for o in ess])
        eta_dis = np.array([o.eta_dis for o in ess])
        rep.excess("ess_ch_bigm", schedule.p_ch - m_ch * v_ch)
        rep.excess("ess_ch_cap", schedule.p_ch - pch * z_ess)
        rep.excess("ess_dis_bigm", schedule.p_dis - m_dis * v_dis)
        rep.excess("ess_dis_cap", schedule.p_dis - pdis * z_ess)
        rep.excess("ess_soc_cap", np.maximum(schedule.soc - emod * z_ess, -schedule.soc))
        dt = instance.dt
        drift = schedule.soc[:, 1:] - schedule.soc[:, :-1] - (schedule.p_ch * eta_ch - schedule.p_dis / eta_dis) * dt
        rep.excess("ess_dynamics", np.abs(drift))
        rep.excess("ess_cyclic", np.abs(schedule.soc[:, 0] - schedule.soc[:, T]), axes=("scenario", "option"))

    # converters
    coup = np.stack([d.coupling_matrix for d in instance.devices])  # (D, 3, 2)
    out = np.einsum("dro,stdo->str", coup, schedule.p_in)
    rep.excess("hub_coupling", np.abs(schedule.hub_out - out))
    rating = np.array([d.max_input for d in instance.devices])  # (D, 2)
    over = schedule.p_in - rating[None, None] * u[None, None, :, None]
    rep.excess("dev_input_e", over[..., 0])
    rep.excess("dev_input_g", over[..., 1])

    loads = np.stack([sc.loads for sc in instance.scenarios])
    rep.excess("shed_bounds", schedule.shed - loads)

    if instance.res_options:
        sigma = instance.res_penetration_cap
        rated = np.array([o.rated_power for o in instance.res_options])
        res_cap = rated @ z_res
        total = rating[:, 0] @ u + res_cap
        rep.excess("res_penetration", np.array([res_cap - sigma * total]), axes=("option",))

    # balances
    for r, name in enumerate(("balance_e", "balance_h", "balance_c")):
        supply = schedule.hub_out[:, :, r] + schedule.shed[:, :, r]
        if r == 0:
            supply = supply + schedule.p_res.sum(axis=2)
        demand = loads[:, :, r].copy()
        for n, o in enumerate(ess):
            if o.carrier == r:
                supply = supply + schedule.p_dis[:, :, n]
                demand = demand + schedule.p_ch[:, :, n]
        gap = demand - supply
        rep.excess(name, np.abs(gap) if r == 0 else gap, axes=("scenario", "step"))
    return rep.items

