"""Exhaustive reference solver for tiny instances.

Shares no formulation code with :mod:`ehplan.model.build`: each scenario's
dispatch is written out here as its own dense LP. For every admissible
first-stage assignment the scenario LPs are solved with storage free to
charge and discharge; any scenario where a unit does both in one step is
re-solved under every maximal charge-or-discharge pattern. Because the
objective is nondecreasing in each scenario loss, minimizing the scenarios
separately yields the optimum for that assignment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..model.evaluate import evaluate_costs
from ..model.physics import annualization_coefficient, res_availability
from ..model.types import DeviceKind, EhInstance, InfeasibleModelError, OperationSchedule, PlanDecision, Scenario
from ..risk import RiskConfig

MAX_ASSIGNMENTS = 1_000_000
_OVERLAP_TOL = 1e-9


class OracleSizeError(ValueError):
    """The instance is too large to enumerate."""


@dataclass
class OracleResult:
    objective: float
    plan: PlanDecision | None
    schedule: OperationSchedule | None
    candidates: int = 0
    lp_solves: int = 0


def _first_stage_candidates(instance: EhInstance):
    devs = instance.devices
    need = [instance.devices_of(DeviceKind.CCHP), instance.devices_of(DeviceKind.TX)]
    sigma = instance.res_penetration_cap
    e_rating = np.array([d.max_input_e for d in devs])
    rated = np.array([o.rated_power for o in instance.res_options])
    z_res_ranges = [range(o.max_modules + 1) for o in instance.res_options]
    z_ess_ranges = [range(o.max_modules + 1) for o in instance.ess_options]
    for bits in itertools.product((0, 1), repeat=len(devs)):
        u = np.array(bits, dtype=int)
        if any(u[idx].sum() < 1 for idx in need):
            continue
        cap = sigma * float(e_rating @ u)
        for z_res in itertools.product(*z_res_ranges):
            zr = np.array(z_res, dtype=int)
            if rated.size and (1 - sigma) * float(rated @ zr) > cap + 1e-9:
                continue
            for z_ess in itertools.product(*z_ess_ranges):
                yield PlanDecision(u=u, z_res=zr, z_ess=np.array(z_ess, dtype=int))


def enumeration_size(instance: EhInstance) -> int:
    """Upper bound on the LPs the oracle may solve."""
    n_u = 2 ** len(instance.devices)
    n_z = math.prod(o.max_modules + 1 for o in (*instance.res_options, *instance.ess_options))
    n_ess = sum(1 for _ in instance.ess_options)
    S, T = len(instance.scenarios), instance.steps
    return n_u * n_z * (S + S * 2 ** (T * n_ess) if n_ess else S)


def _investment(instance: EhInstance, plan: PlanDecision) -> float:
    dr = instance.discount_rate
    total = sum(annualization_coefficient(dr, d.lifetime_years) * d.capacity_mw * d.invest_cost * x
                for d, x in zip(instance.devices, plan.u))
    for opts, z in ((instance.res_options, plan.z_res), (instance.ess_options, plan.z_ess)):
        total += sum(annualization_coefficient(dr, o.lifetime_years) * o.invest_cost * n for o, n in zip(opts, z))
    return float(total)


class _ScenarioLP:
    """Dense dispatch LP for one scenario and one first-stage assignment."""

    def __init__(self, instance: EhInstance, plan: PlanDecision, sc: Scenario):
        T, dt = sc.steps, instance.dt
        self.T = T
        cols = []  # (name, t, payload, lo, hi, cost)
        inputs = [(d, k, rating) for d, opt in enumerate(instance.devices) if plan.u[d]
                  for k, rating in enumerate(opt.max_input) if rating > 0]
        self.inputs = inputs
        self.res_idx = [m for m, z in enumerate(plan.z_res) if z > 0]
        self.ess_idx = [n for n, z in enumerate(plan.z_ess) if z > 0]
        loads = sc.loads
        for t in range(T):
            for j, (d, k, rating) in enumerate(inputs):
                opt = instance.devices[d]
                price = sc.price_e[t] if k == 0 else instance.gas_price
                cols.append(("in", t, j, 0.0, rating, (price + opt.maintenance_rate) * dt))
            for m in self.res_idx:
                o = instance.res_options[m]
                cap = plan.z_res[m] * res_availability(o, sc)[t]
                cols.append(("res", t, m, 0.0, cap, o.maintenance_rate * dt))
            for n in self.ess_idx:
                o = instance.ess_options[n]
                cols.append(("ch", t, n, 0.0, plan.z_ess[n] * o.max_charge_power, o.maintenance_rate * dt))
                cols.append(("dis", t, n, 0.0, plan.z_ess[n] * o.max_discharge_power, o.maintenance_rate * dt))
            for r in range(3):
                cols.append(("shed", t, r, 0.0, loads[t, r], instance.shed_cost[r] * dt))
        for t in range(T + 1):
            for n in self.ess_idx:
                o = instance.ess_options[n]
                cols.append(("soc", t, n, 0.0, plan.z_ess[n] * o.energy_per_module, 0.0))
        self.cols = cols
        self.pos = {(c[0], c[1], c[2]): i for i, c in enumerate(cols)}
        nv = len(cols)
        self.c = np.array([c[5] for c in cols])
        self.bounds = np.array([(c[3], c[4]) for c in cols])

        a_eq, b_eq, a_ub, b_ub = [], [], [], []
        for t in range(T):
            for r in range(3):
                row = np.zeros(nv)
                for j, (d, k, _) in enumerate(inputs):
                    row[self.pos["in", t, j]] += instance.devices[d].coupling_matrix[r, k]
                row[self.pos["shed", t, r]] = 1.0
                if r == 0:
                    for m in self.res_idx:
                        row[self.pos["res", t, m]] = 1.0
                for n in self.ess_idx:
                    if instance.ess_options[n].carrier == r:
                        row[self.pos["dis", t, n]] = 1.0
                        row[self.pos["ch", t, n]] = -1.0
                if r == 0:
                    a_eq.append(row)
                    b_eq.append(loads[t, r])
                else:
                    a_ub.append(-row)
                    b_ub.append(-loads[t, r])
            for n in self.ess_idx:
                o = instance.ess_options[n]
                row = np.zeros(nv)
                row[self.pos["soc", t + 1, n]] = 1.0
                row[self.pos["soc", t, n]] = -1.0
                row[self.pos["ch", t, n]] = -o.eta_ch * dt
                row[self.pos["dis", t, n]] = dt / o.eta_dis
                a_eq.append(row)
                b_eq.append(0.0)
        for n in self.ess_idx:
            row = np.zeros(nv)
            row[self.pos["soc", 0, n]] = 1.0
            row[self.pos["soc", T, n]] = -1.0
            a_eq.append(row)
            b_eq.append(0.0)
        self.a_eq, self.b_eq = np.array(a_eq), np.array(b_eq)
        self.a_ub = np.array(a_ub) if a_ub else None
        self.b_ub = np.array(b_ub) if b_ub else None

    def solve(self, pattern: dict[int, np.ndarray] | None = None):
        """Minimize the daily loss; ``pattern[n][t]`` True forbids discharge,
        False forbids charge."""
        bounds = self.bounds.copy()
        for n, charge in (pattern or {}).items():
            for t in range(self.T):
                bounds[self.pos["dis" if charge[t] else "ch", t, n], 1] = 0.0
        res = linprog(self.c, A_ub=self.a_ub, b_ub=self.b_ub, A_eq=self.a_eq, b_eq=self.b_eq,
                      bounds=bounds, method="highs")
        if res.status != 0:
            return math.inf, None
        return float(res.fun), res.x

    def overlapping(self, x: np.ndarray) -> bool:
        for t in range(self.T):
            for n in self.ess_idx:
                if x[self.pos["ch", t, n]] * x[self.pos["dis", t, n]] > _OVERLAP_TOL:
                    return True
        return False

    def write(self, sched: OperationSchedule, s: int, x: np.ndarray) -> None:
        x = np.where(np.abs(x) < 1e-10, 0.0, np.maximum(x, 0.0))
        for (kind, t, key), i in self.pos.items():
            if kind == "in":
                d, k, _ = self.inputs[key]
                sched.p_in[s, t, d, k] = x[i]
            elif kind == "res":
                sched.p_res[s, t, key] = x[i]
            elif kind == "ch":
                sched.p_ch[s, t, key] = x[i]
            elif kind == "dis":
                sched.p_dis[s, t, key] = x[i]
            elif kind == "soc":
                sched.soc[s, t, key] = x[i]
            else:
                sched.shed[s, t, key] = x[i]


def _best_dispatch(lp: _ScenarioLP) -> tuple[float, np.ndarray, int]:
    val, x = lp.solve()
    solves = 1
    if x is None or not lp.overlapping(x):
        return val, x, solves
    best, best_x = math.inf, None
    patterns = itertools.product(*[list(itertools.product((True, False), repeat=lp.T)) for _ in lp.ess_idx])
    for combo in patterns:
        pat = {n: np.array(p) for n, p in zip(lp.ess_idx, combo)}
        v, xx = lp.solve(pat)
        solves += 1
        if v < best:
            best, best_x = v, xx
    return best, best_x, solves


def brute_force_search(instance: EhInstance, risk: RiskConfig) -> OracleResult:
    """Enumerate every admissible first-stage assignment; see module docs."""
    size = enumeration_size(instance)
    if size > MAX_ASSIGNMENTS:
        raise OracleSizeError(f"{size} assignments exceed the {MAX_ASSIGNMENTS} budget")
    try:
        instance.check_buildable()
    except InfeasibleModelError:
        return OracleResult(math.inf, None, None)
    nonneg = instance.gas_price >= 0 and all(np.all(sc.price_e >= 0) for sc in instance.scenarios)
    cands = sorted(_first_stage_candidates(instance), key=lambda p: _investment(instance, p))
    best = OracleResult(math.inf, None, None)
    solves = 0
    for count, plan in enumerate(cands, 1):
        if nonneg and _investment(instance, plan) >= best.objective:
            best.candidates = count - 1
            break
        sched = OperationSchedule.zeros(instance)
        for s, sc in enumerate(instance.scenarios):
            lp = _ScenarioLP(instance, plan, sc)
            _, x, n = _best_dispatch(lp)
            solves += n
            lp.write(sched, s, x)
        sched.recompute_hub_output(instance)
        sched.set_state_flags()
        costs = evaluate_costs(instance, plan, sched, risk.alpha, risk.beta)
        if costs.objective < best.objective:
            best = OracleResult(costs.objective, plan, sched)
        best.candidates = count
    best.lp_solves = solves
    return best


def brute_force_oracle(instance: EhInstance, risk: RiskConfig) -> float:
    return brute_force_search(instance, risk).objective
