import numpy as np
import pytest

from ehplan.generators import random_instance
from ehplan.model import LABELS, validate_schedule
from ehplan.risk import RiskConfig
from ehplan.solve import solve_monolithic


def swing(sc):
    from dataclasses import replace

    return replace(sc, price_e=np.array([100.0, 3000.0, 100.0, 3000.0]))


def solved_storage_instance():
    from conftest import basic_devices, scenario
    from ehplan.generators import ess_module, pv_module, wind_module
    from ehplan.model import EhInstance

    inst = EhInstance(
        devices=basic_devices(),
        res_options=(wind_module(3), pv_module(3)),
        ess_options=(ess_module("BESS", 3), ess_module("HESS", 3), ess_module("CESS", 3)),
        scenarios=(swing(scenario(4, 0.6)), swing(scenario(4, 0.4, e=2.0, h=1.0, c=1.0))),
        dt=1.0,
    )
    sol = solve_monolithic(inst, RiskConfig(0.9, 0.5))
    # storage is used, so the storage rows are exercised
    assert sol.plan.z_ess.sum() > 0
    return inst, sol


@pytest.fixture(scope="module")
def solved():
    return solved_storage_instance()


@pytest.mark.parametrize("seed", range(10))
def test_solver_output_is_clean(seed):
    inst = random_instance(seed)
    sol = solve_monolithic(inst, RiskConfig(0.9, 0.5))
    assert validate_schedule(inst, sol.plan, sol.schedule) == []


def test_fixture_clean(solved):
    inst, sol = solved
    assert validate_schedule(inst, sol.plan, sol.schedule) == []


def _first(arr):
    return tuple(np.argwhere(arr > 1e-3)[0])


def _ch_step(sched, n):
    s, t = np.argwhere(sched.p_ch[:, :, n] > 1e-3)[0]
    return s, t


def seed_19(inst, plan, sch):
    sch.v_ch[0, 0, 0] = sch.v_dis[0, 0, 0] = 1.0


def seed_20a(inst, plan, sch):
    n = int(np.flatnonzero(plan.z_ess)[0])
    s, t = _ch_step(sch, n)
    sch.v_ch[s, t, n] = 0.0


def seed_20b(inst, plan, sch):
    n = int(np.flatnonzero(plan.z_ess)[0])
    s, t = _ch_step(sch, n)
    sch.p_ch[s, t, n] = inst.ess_options[n].max_charge_power * plan.z_ess[n] + 0.5
    sch.v_ch[s, t, n] = 1.0


def seed_21a(inst, plan, sch):
    n = int(np.flatnonzero(plan.z_ess)[0])
    s, t = np.argwhere(sch.p_dis[:, :, n] > 1e-3)[0]
    sch.v_dis[s, t, n] = 0.0


def seed_21b(inst, plan, sch):
    n = int(np.flatnonzero(plan.z_ess)[0])
    s, t = np.argwhere(sch.p_dis[:, :, n] > 1e-3)[0]
    sch.p_dis[s, t, n] = inst.ess_options[n].max_discharge_power * plan.z_ess[n] + 0.5
    sch.v_dis[s, t, n] = 1.0


def seed_22(inst, plan, sch):
    n = int(np.flatnonzero(plan.z_ess)[0])
    sch.soc[0, 2, n] = inst.ess_options[n].energy_per_module * plan.z_ess[n] + 1.0


def seed_23(inst, plan, sch):
    sch.soc[0, 2, 0] += 0.25


def seed_24(inst, plan, sch):
    sch.soc[0, -1, 0] += 0.25


def seed_25(inst, plan, sch):
    sch.hub_out[0, 0, 1] += 0.1


def seed_26(inst, plan, sch):
    d = int(np.argmax([dv.max_input[0] for dv in inst.devices]))
    sch.p_in[0, 0, d, 0] = inst.devices[d].max_input[0] + 1.0


def seed_27(inst, plan, sch):
    d = int(np.argmax([dv.max_input[1] for dv in inst.devices]))
    sch.p_in[0, 0, d, 1] = inst.devices[d].max_input[1] + 1.0


def seed_28(inst, plan, sch):
    sch.shed[0, 0, 0] = inst.scenarios[0].load_e[0] + 1.0


def seed_29(inst, plan, sch):
    pass  # handled with a modified plan below


def seed_30(inst, plan, sch):
    sch.shed[0, 1, 0] += 0.1


def seed_31(inst, plan, sch):
    sch.hub_out[0, 1, 1] -= 0.1


def seed_32(inst, plan, sch):
    sch.hub_out[0, 1, 2] -= 0.1


SEEDS = {
    "19": seed_19, "20a": seed_20a, "20b": seed_20b, "21a": seed_21a, "21b": seed_21b,
    "22": seed_22, "23": seed_23, "24": seed_24, "25": seed_25, "26": seed_26, "27": seed_27,
    "28": seed_28, "30": seed_30, "31": seed_31, "32": seed_32,
}


@pytest.mark.parametrize("label", sorted(SEEDS))
def test_seeded_violation_detected(solved, label):
    inst, sol = solved
    sch = sol.schedule.copy()
    SEEDS[label](inst, sol.plan, sch)
    report = validate_schedule(inst, sol.plan, sch)
    assert report, label
    assert label in {v.eq for v in report}


def test_single_exclusivity_violation(solved):
    inst, sol = solved
    sch = sol.schedule.copy()
    n = int(np.flatnonzero(sol.plan.z_ess == 0)[0]) if (sol.plan.z_ess == 0).any() else 0
    sch.v_ch[0, 0, n] = sch.v_dis[0, 0, n] = 1.0
    report = validate_schedule(inst, sol.plan, sch)
    assert [v.eq for v in report] == ["19"]


def test_cyclic_violation_labels(solved):
    inst, sol = solved
    sch = sol.schedule.copy()
    sch.soc[0, -1, 0] += 0.25
    assert "24" in {v.eq for v in validate_schedule(inst, sol.plan, sch)}


def test_penetration_violation(solved):
    from ehplan.model import PlanDecision

    inst, sol = solved
    plan = PlanDecision(u=sol.plan.u, z_res=[3, 3], z_ess=sol.plan.z_ess)
    from dataclasses import replace

    tight = replace(inst, res_penetration_cap=0.01)
    report = validate_schedule(tight, plan, sol.schedule)
    assert "29" in {v.eq for v in report}


def test_labels_cover_operating_rows():
    wanted = {"19", "20a", "20b", "21a", "21b", "22", "23", "24", "25", "26", "27", "28", "29", "30", "31", "32"}
    assert wanted <= set(LABELS.values())


def test_violation_text(solved):
    inst, sol = solved
    sch = sol.schedule.copy()
    sch.shed[0, 1, 0] += 0.1
    v = validate_schedule(inst, sol.plan, sch)[0]
    assert str(v).startswith("[30] balance_e (s=0, t=1)")
