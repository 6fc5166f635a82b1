import numpy as np
import pytest

from ehplan.generators import random_instance
from ehplan.milp import GE, MilpBuilder
from ehplan.model import EhInstance, OperationSchedule, PlanDecision
from ehplan.risk import RiskConfig
from ehplan.solve import (
    INFEASIBLE,
    OPTIMAL,
    OracleSizeError,
    benders_solve,
    brute_force_oracle,
    brute_force_search,
    cut_violations,
    default_backend,
    relaxation_audit,
    solve_monolithic,
)
from ehplan.solve.benders import phase_one

from conftest import basic_devices, scenario

RISK = RiskConfig(0.9, 0.5)


@pytest.mark.parametrize("seed", [0, 3, 7, 11])
def test_oracle_matches_monolithic(seed):
    inst = random_instance(seed)
    mono = solve_monolithic(inst, RISK, gap=1e-7)
    oracle = brute_force_search(inst, RISK)
    assert oracle.objective == pytest.approx(mono.objective, rel=1e-4)
    assert oracle.lp_solves > 0


@pytest.mark.parametrize("seed", [1, 4, 9, 15])
def test_benders_matches_monolithic(seed):
    inst = random_instance(seed)
    mono = solve_monolithic(inst, RISK, gap=1e-7)
    sol, blog = benders_solve(inst, RISK, gap=1e-6)
    assert sol.status == OPTIMAL and not blog.fallback
    assert sol.objective == pytest.approx(mono.objective, rel=2e-4)
    assert relaxation_audit(inst, RISK, sol) == []
    assert cut_violations(inst, blog, sol.plan) == []


def test_bounds_are_monotone_and_bracket(small_instance):
    sol, blog = benders_solve(small_instance, RISK, gap=1e-6)
    lb, ub = blog.lower_bounds, blog.upper_bounds
    assert np.all(np.diff(lb) >= -1e-6 * abs(lb[-1]))
    assert np.all(np.diff(ub[np.isfinite(ub)]) <= 1e-9)
    assert lb[-1] <= sol.objective * (1 + 1e-9)
    assert sol.objective == pytest.approx(ub[-1], rel=1e-6)
    mono = solve_monolithic(small_instance, RISK, gap=1e-7)
    assert lb[-1] <= mono.objective * (1 + 1e-6)


def test_cuts_underestimate_elsewhere(small_instance):
    _, blog = benders_solve(small_instance, RISK, gap=1e-6)
    for z in ([0, 0], [3, 3], [1, 2]):
        plan = PlanDecision(u=[1, 1, 1, 1], z_res=z, z_ess=z[::-1])
        assert cut_violations(small_instance, blog, plan) == []


def test_single_scenario_converges():
    inst = EhInstance(basic_devices(), (), (), (scenario(6),), dt=4.0)
    sol, blog = benders_solve(inst, RiskConfig(0.95, 0.9), gap=1e-6)
    mono = solve_monolithic(inst, RiskConfig(0.95, 0.9), gap=1e-7)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(mono.objective, rel=1e-6)


def test_missing_cchp_is_infeasible_without_iterations():
    inst = EhInstance(basic_devices()[1:], (), (), (scenario(),))
    sol, blog = benders_solve(inst, RISK)
    assert sol.status == INFEASIBLE and "CCHP" in sol.hint
    assert blog.iterations == [] and blog.cuts == []
    assert solve_monolithic(inst, RISK).status == INFEASIBLE
    assert brute_force_oracle(inst, RISK) == float("inf")


def test_max_iter_validated(small_instance):
    with pytest.raises(ValueError):
        benders_solve(small_instance, RISK, max_iter=0)


def test_audit_flags_overlap(small_instance):
    sched = OperationSchedule.zeros(small_instance)
    assert relaxation_audit(small_instance, RISK, sched) == []
    sched.p_ch[1, 2, 0] = 0.5
    sched.p_dis[1, 2, 0] = 0.25
    flags = relaxation_audit(small_instance, RISK, sched)
    assert len(flags) == 1
    f = flags[0]
    assert (f.scenario, f.step, f.option) == (1, 2, 0) and f.overlap == pytest.approx(0.125)


def test_phase_one_cut():
    # x + y >= 2 with y <= 0.5; fixing x = 1 is short by 0.5
    b = MilpBuilder()
    x = b.add_vars("x", (1,), 0, 5)
    y = b.add_vars("y", (1,), 0, 0.5)
    b.add_rows("need", [(x, 1.0), (y, 1.0)], GE, 2.0)
    prob = b.build()
    lb, ub = prob.lb.copy(), prob.ub.copy()
    lb[x] = ub[x] = 1.0
    assert default_backend().solve(prob, relax=True, lb=lb, ub=ub).status == "infeasible"
    w, g = phase_one(prob, lb, ub, x, default_backend())
    assert w == pytest.approx(0.5)
    assert g == pytest.approx([-1.0])
    # the cut w + g (x - 1) <= 0 admits exactly x >= 1.5
    assert w + g[0] * (1.5 - 1.0) == pytest.approx(0.0)


def test_oracle_refuses_large_instances():
    with pytest.raises(OracleSizeError):
        brute_force_oracle(random_instance(0, "medium"), RISK)


def test_backend_duals():
    b = MilpBuilder()
    x = b.add_vars("x", (2,), 0, 10)
    b.add_rows("floor", [(x[None, :], np.array([[1.0, 1.0]]))], GE, 3.0, shape=(1,))
    b.add_objective(x, np.array([1.0, 2.0]))
    prob = b.build()
    res = default_backend().solve(prob, relax=True)
    assert res.objective == pytest.approx(3.0)
    assert res.row_duals[0] == pytest.approx(1.0)
    # fixing the dearer column at 1 raises the cost at rate 2 - 1
    lb, ub = prob.lb.copy(), prob.ub.copy()
    lb[x[1]] = ub[x[1]] = 1.0
    fixed = default_backend().solve(prob, relax=True, lb=lb, ub=ub)
    assert fixed.objective == pytest.approx(4.0)
    assert fixed.col_duals[x[1]] == pytest.approx(1.0)


def test_benders_log_csv(tmp_path, small_instance):
    _, blog = benders_solve(small_instance, RISK)
    path = tmp_path / "log.csv"
    blog.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,lb,ub,gap,cuts,master_ms,sub_ms"
    assert len(lines) == len(blog.iterations) + 1
