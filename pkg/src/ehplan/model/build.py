"""Translate an :class:`EhInstance` into a :class:`~ehplan.milp.MilpProblem`.

Variable census (``S`` scenarios, ``T`` steps, ``D`` device options,
``K`` device inputs with a positive rating, ``M`` RES options, ``N`` ESS
options)::

    u D, z_res M, z_ess N                       first stage
    p_in S*T*K, hub_out 3*S*T, p_res S*T*M
    p_ch, p_dis, v_ch, v_dis  S*T*N each
    soc S*(T+1)*N, shed 3*S*T
    cvar_zeta 1, cvar_excess S

Row census::

    invest_min        one per required kind present (CCHP, TX)
    res_avail         S*T*M
    ess_exclusive     S*T*N
    ess_ch_bigm, ess_ch_cap, ess_dis_bigm, ess_dis_cap   S*T*N each
    ess_soc_cap       S*(T+1)*N
    ess_dynamics      S*T*N
    ess_cyclic        S*N
    hub_coupling      3*S*T
    dev_input_cap     S*T*K
    res_penetration   1 if M > 0
    balance_e         S*T   (equality)
    balance_h, balance_c  S*T each (supply >= demand)
    cvar_excess       S

Shedding bounds ``0 <= shed <= load`` are carried as variable bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..milp import BINARY, EQ, GE, INTEGER, LE, LinExpr, MilpBuilder, MilpProblem
from ..risk import RiskConfig, RiskTerms, emit_risk_terms
from .physics import annualization_coefficient, res_availability
from .types import DeviceKind, EhInstance, ModelError


@dataclass(frozen=True)
class InputMap:
    """Device inputs that carry a nonzero rating, in column order."""

    device: np.ndarray  # (K,) device index
    carrier: np.ndarray  # (K,) 0 = electricity, 1 = gas
    rating: np.ndarray  # (K,) max input MW
    coupling: np.ndarray  # (3, K) output per unit input
    maintenance: np.ndarray  # (K,)

    @property
    def size(self) -> int:
        return len(self.device)


def input_map(instance: EhInstance) -> InputMap:
    dev, car, rat, coup, lam = [], [], [], [], []
    for d, opt in enumerate(instance.devices):
        for k, rating in enumerate(opt.max_input):
            if rating > 0:
                dev.append(d)
                car.append(k)
                rat.append(rating)
                coup.append(opt.coupling_matrix[:, k])
                lam.append(opt.maintenance_rate)
    coup_arr = np.array(coup, dtype=float).T if coup else np.zeros((3, 0))
    return InputMap(np.array(dev, dtype=int), np.array(car, dtype=int), np.array(rat, dtype=float),
                    coup_arr, np.array(lam, dtype=float))


def availability(instance: EhInstance) -> np.ndarray:
    """Per-module RES availability, shape ``(S, T, M)``."""
    S, T, M = len(instance.scenarios), instance.steps, len(instance.res_options)
    out = np.zeros((S, T, M))
    for s, sc in enumerate(instance.scenarios):
        for m, opt in enumerate(instance.res_options):
            out[s, :, m] = res_availability(opt, sc)
    return out


def investment_coefficients(instance: EhInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annualized investment per unit of ``u``, ``z_res`` and ``z_ess``."""
    dr = instance.discount_rate
    dev = np.array([annualization_coefficient(dr, d.lifetime_years) * d.investment for d in instance.devices])
    res = np.array([annualization_coefficient(dr, o.lifetime_years) * o.invest_cost for o in instance.res_options])
    ess = np.array([annualization_coefficient(dr, o.lifetime_years) * o.invest_cost for o in instance.ess_options])
    return dev, res, ess


def big_m(instance: EhInstance) -> tuple[np.ndarray, np.ndarray]:
    """Tightest valid constants for the charge/discharge indicator rows."""
    ch = np.array([o.max_modules * o.max_charge_power for o in instance.ess_options])
    dis = np.array([o.max_modules * o.max_discharge_power for o in instance.ess_options])
    return ch, dis


def operation_cost_weights(instance: EhInstance, imap: InputMap | None = None) -> dict[str, np.ndarray]:
    """Per-MW-step cost weights of each operation variable, split into the
    trading, maintenance and shedding components."""
    imap = imap or input_map(instance)
    dt = instance.dt
    S, T = len(instance.scenarios), instance.steps
    price = np.stack([sc.price_e for sc in instance.scenarios])  # (S, T)
    trade_in = np.zeros((S, T, imap.size))
    e_cols = imap.carrier == 0
    trade_in[:, :, e_cols] = price[:, :, None]
    trade_in[:, :, ~e_cols] = instance.gas_price
    return {
        "trade_in": trade_in * dt,
        "maint_in": np.broadcast_to(imap.maintenance * dt, (S, T, imap.size)),
        "maint_res": np.array([o.maintenance_rate for o in instance.res_options]) * dt,
        "maint_ess": np.array([o.maintenance_rate for o in instance.ess_options]) * dt,
        "shed": np.array(instance.shed_cost) * dt,
    }


@dataclass
class PlanningMilp:
    """A built problem plus the bookkeeping needed to read solutions back."""

    problem: MilpProblem
    imap: InputMap
    risk: RiskConfig
    risk_terms: RiskTerms
    loss_exprs: list[LinExpr]
    relaxed_ess: bool


def build_milp(instance: EhInstance, risk: RiskConfig, *, relax_ess_binaries: bool = False) -> PlanningMilp:
    """Assemble the full investment and multi-scenario operation problem.

    With ``relax_ess_binaries`` the charge/discharge indicators and their
    Big-M rows are omitted, leaving the per-module power ratings as the only
    bound on storage power.
    """
    instance.check_buildable()
    check_instance_units(instance)
    imap = input_map(instance)
    S, T = len(instance.scenarios), instance.steps
    D, K = len(instance.devices), imap.size
    M, N = len(instance.res_options), len(instance.ess_options)
    dt = instance.dt
    avail = availability(instance)
    loads = np.stack([sc.loads for sc in instance.scenarios])  # (S, T, 3)
    ess = instance.ess_options
    zmax_res = np.array([o.max_modules for o in instance.res_options], dtype=float)
    zmax_ess = np.array([o.max_modules for o in ess], dtype=float)
    pch = np.array([o.max_charge_power for o in ess])
    pdis = np.array([o.max_discharge_power for o in ess])
    emod = np.array([o.energy_per_module for o in ess])
    eta_ch = np.array([o.eta_ch for o in ess])
    eta_dis = np.array([o.eta_dis for o in ess])
    bigm_ch, bigm_dis = big_m(instance)

    b = MilpBuilder()
    u = b.add_vars("u", (D,), 0, 1, BINARY)
    z_res = b.add_vars("z_res", (M,), 0, zmax_res, INTEGER)
    z_ess = b.add_vars("z_ess", (N,), 0, zmax_ess, INTEGER)
    p_in = b.add_vars("p_in", (S, T, K), 0, imap.rating)
    hub = b.add_vars("hub_out", (S, T, 3), 0)
    p_res = b.add_vars("p_res", (S, T, M), 0, avail * zmax_res)
    p_ch = b.add_vars("p_ch", (S, T, N), 0, pch * zmax_ess)
    p_dis = b.add_vars("p_dis", (S, T, N), 0, pdis * zmax_ess)
    soc = b.add_vars("soc", (S, T + 1, N), 0, emod * zmax_ess)
    if not relax_ess_binaries:
        v_ch = b.add_vars("v_ch", (S, T, N), 0, 1, BINARY)
        v_dis = b.add_vars("v_dis", (S, T, N), 0, 1, BINARY)
    shed = b.add_vars("shed", (S, T, 3), 0, loads)

    # at least one CCHP and one transformer
    for kind in (DeviceKind.CCHP, DeviceKind.TX):
        cols = np.array(instance.devices_of(kind))
        b.add_rows("invest_min", [(cols[None, :], 1.0)], GE, 1.0, shape=(1,))

    if M:
        b.add_rows("res_avail", [(p_res, 1.0), (np.broadcast_to(z_res, p_res.shape), -avail)], LE, 0.0)
    if N:
        zb = np.broadcast_to(z_ess, p_ch.shape)
        if not relax_ess_binaries:
            b.add_rows("ess_exclusive", [(v_ch, 1.0), (v_dis, 1.0)], LE, 1.0)
            b.add_rows("ess_ch_bigm", [(p_ch, 1.0), (v_ch, -np.broadcast_to(bigm_ch, p_ch.shape))], LE, 0.0)
        b.add_rows("ess_ch_cap", [(p_ch, 1.0), (zb, -np.broadcast_to(pch, p_ch.shape))], LE, 0.0)
        if not relax_ess_binaries:
            b.add_rows("ess_dis_bigm", [(p_dis, 1.0), (v_dis, -np.broadcast_to(bigm_dis, p_dis.shape))], LE, 0.0)
        b.add_rows("ess_dis_cap", [(p_dis, 1.0), (zb, -np.broadcast_to(pdis, p_dis.shape))], LE, 0.0)
        b.add_rows("ess_soc_cap", [(soc, 1.0), (np.broadcast_to(z_ess, soc.shape), -np.broadcast_to(emod, soc.shape))], LE, 0.0)
        b.add_rows(
            "ess_dynamics",
            [
                (soc[:, 1:, :], 1.0),
                (soc[:, :-1, :], -1.0),
                (p_ch, -np.broadcast_to(eta_ch * dt, p_ch.shape)),
                (p_dis, np.broadcast_to(dt / eta_dis, p_dis.shape)),
            ],
            EQ,
            0.0,
        )
        b.add_rows("ess_cyclic", [(soc[:, 0, :], 1.0), (soc[:, T, :], -1.0)], EQ, 0.0)

    # converter outputs from inputs
    coup = np.broadcast_to(imap.coupling[None, None, :, :], (S, T, 3, K))
    b.add_rows("hub_coupling", [(hub, 1.0), (np.broadcast_to(p_in[:, :, None, :], (S, T, 3, K)), -coup)], EQ, 0.0)
    if K:
        ub_u = np.broadcast_to(u[imap.device], p_in.shape)
        b.add_rows("dev_input_cap", [(p_in, 1.0), (ub_u, -np.broadcast_to(imap.rating, p_in.shape))], LE, 0.0)

    if M:
        sigma = instance.res_penetration_cap
        rated = np.array([o.rated_power for o in instance.res_options])
        e_rating = np.zeros(D)
        np.add.at(e_rating, imap.device[imap.carrier == 0], imap.rating[imap.carrier == 0])
        b.add_rows(
            "res_penetration",
            [(z_res[None, :], ((1 - sigma) * rated)[None, :]), (u[None, :], (-sigma * e_rating)[None, :])],
            LE,
            0.0,
            shape=(1,),
        )

    # balances: converter output + RES + discharge + shedding vs load + charge
    for r, tag, sense in ((0, "balance_e", EQ), (1, "balance_h", GE), (2, "balance_c", GE)):
        terms = [(hub[:, :, r], 1.0), (shed[:, :, r], 1.0)]
        if r == 0 and M:
            terms.append((p_res, 1.0))
        sel = [n for n, o in enumerate(ess) if o.carrier == r]
        if sel:
            terms.append((p_dis[:, :, sel], 1.0))
            terms.append((p_ch[:, :, sel], -1.0))
        b.add_rows(tag, terms, sense, loads[:, :, r], shape=(S, T))

    # investment
    c_dev, c_res, c_ess = investment_coefficients(instance)
    b.add_objective(u, c_dev)
    b.add_objective(z_res, c_res)
    b.add_objective(z_ess, c_ess)

    w = operation_cost_weights(instance, imap)
    loss_exprs = []
    for s in range(S):
        parts = [
            (p_in[s], w["trade_in"][s] + w["maint_in"][s]),
            (p_res[s], np.broadcast_to(w["maint_res"], (T, M))),
            (p_ch[s], np.broadcast_to(w["maint_ess"], (T, N))),
            (p_dis[s], np.broadcast_to(w["maint_ess"], (T, N))),
            (shed[s], np.broadcast_to(w["shed"], (T, 3))),
        ]
        idx = np.concatenate([p.reshape(-1) for p, _ in parts])
        coef = np.concatenate([np.asarray(c).reshape(-1) for _, c in parts])
        keep = coef != 0
        loss_exprs.append(LinExpr(idx[keep], coef[keep]))

    # losses are nonnegative unless some tariff is negative
    zeta_lb = 0.0 if all(np.all(sc.price_e >= 0) for sc in instance.scenarios) else -np.inf
    terms = emit_risk_terms(b, loss_exprs, instance.probs, risk, weight=instance.days_per_year, zeta_lb=zeta_lb)
    return PlanningMilp(b.build(), imap, risk, terms, loss_exprs, relax_ess_binaries)


def census(S: int, T: int, D: int, K: int, M: int, N: int, *, has_cchp=True, has_tx=True) -> tuple[int, int]:
    """Closed-form variable and row counts of :func:`build_milp`."""
    n_vars = D + M + N + S * T * K + 3 * S * T + S * T * M + 4 * S * T * N + S * (T + 1) * N + 3 * S * T + 1 + S
    n_rows = int(has_cchp) + int(has_tx)
    n_rows += S * T * M + 6 * S * T * N + S * (T + 1) * N + S * N + 3 * S * T + S * T * K
    n_rows += (1 if M else 0) + 3 * S * T + S
    return n_vars, n_rows


def check_instance_units(instance: EhInstance) -> None:
    """Reject instances whose magnitudes suggest a unit mix-up (kW vs MW,
    RMB/kWh vs RMB/MWh)."""
    if instance.gas_price and instance.gas_price < 10:
        raise ModelError("gas price looks like RMB/kWh or RMB/m3; expected RMB/MWh")
    if any(0 < m < 10 for m in instance.shed_cost):
        raise ModelError("shedding cost looks like RMB/kWh; expected RMB/MWh")
