"""Multi-cut Benders decomposition of the planning problem.

The master problem carries the investment decisions, one recourse value
``theta_s`` per scenario and the CVaR threshold and excess variables, so
the risk measure is assembled in the master from the ``theta`` values.
Each subproblem is the single-scenario operation LP with storage mode
indicators relaxed and the investment columns fixed; reduced costs of
the fixed columns give the cut slopes.
"""

from __future__ import annotations

import logging
import math
import time

import numpy as np
from scipy import sparse

from ..milp import BINARY, GE, INTEGER, LE, LinExpr, MilpBuilder, MilpProblem
from ..model import (
    DeviceKind,
    EhInstance,
    InfeasibleModelError,
    build_milp,
    evaluate_costs,
    read_schedule,
)
from ..model.build import PlanningMilp, input_map, investment_coefficients
from ..model.types import OperationSchedule, PlanDecision
from ..risk import RiskConfig, emit_risk_terms, risk_objective
from . import backend as bk
from .audit import relaxation_audit
from .monolithic import solve_monolithic
from .result import ITERATION_LIMIT, OPTIMAL, BendersCut, BendersLog, PlanSolution, SolverFailure

log = logging.getLogger(__name__)

OPTIMALITY = "optimality"
FEASIBILITY = "feasibility"
CUT_TOL = 1e-9
STALL_ROUNDS = 10


class FormulationError(RuntimeError):
    """A subproblem came back unbounded, which the model rules out."""


def recourse_lower_bound(instance: EhInstance) -> np.ndarray:
    """Per-scenario daily loss bound, zero unless some tariff is negative."""
    imap = input_map(instance)
    e_rating = imap.rating[imap.carrier == 0].sum()
    return np.array([instance.dt * e_rating * np.minimum(sc.price_e, 0.0).sum() for sc in instance.scenarios])


class _Master:
    """Base investment problem plus the accumulated cut rows, each stored
    sparsely as ``theta_s - coef @ x_fs >= constant``."""

    def __init__(self, base: MilpProblem, n_fs: int, theta: np.ndarray):
        self.base = base
        self.n_fs = n_fs
        self.theta = theta
        self._coef: list[np.ndarray] = []
        self._theta_col: list[int] = []  # -1 for feasibility cuts
        self._rhs: list[float] = []
        self._cache: MilpProblem | None = None

    def problem(self) -> MilpProblem:
        n = len(self._rhs)
        if not n:
            return self.base
        if self._cache is not None and self._cache.n_rows == self.base.n_rows + n:
            return self._cache
        fs = np.arange(self.n_fs)
        rows, cols, vals = [], [], []
        for i, (coef, col) in enumerate(zip(self._coef, self._theta_col)):
            nz = np.flatnonzero(coef)
            rows.append(np.full(nz.size + (col >= 0), i))
            cols.append(np.r_[fs[nz], [col] if col >= 0 else []])
            vals.append(np.r_[-coef[nz], [1.0] if col >= 0 else []])
        extra = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols).astype(int))),
                                  shape=(n, self.base.n_vars))
        self._cache = MilpProblem(
            lb=self.base.lb, ub=self.base.ub, vtype=self.base.vtype,
            A=sparse.vstack([self.base.A, extra]).tocsr(),
            sense=np.r_[self.base.sense, np.full(n, GE)],
            rhs=np.r_[self.base.rhs, self._rhs],
            c=self.base.c, c0=self.base.c0,
            row_tags=np.r_[self.base.row_tags, np.full(n, "benders_cut", dtype=object)],
            blocks=self.base.blocks,
        )
        return self._cache

    def add(self, cut: BendersCut) -> None:
        self._coef.append(np.asarray(cut.coef, dtype=float))
        self._theta_col.append(int(self.theta[cut.scenario]) if cut.kind == OPTIMALITY else -1)
        self._rhs.append(cut.constant)


def _build_master(instance: EhInstance, risk: RiskConfig, theta_lb: np.ndarray) -> _Master:
    D, M, N = len(instance.devices), len(instance.res_options), len(instance.ess_options)
    S = len(instance.scenarios)
    b = MilpBuilder()
    u = b.add_vars("u", (D,), 0, 1, BINARY)
    z_res = b.add_vars("z_res", (M,), 0, np.array([o.max_modules for o in instance.res_options], dtype=float), INTEGER)
    z_ess = b.add_vars("z_ess", (N,), 0, np.array([o.max_modules for o in instance.ess_options], dtype=float), INTEGER)
    theta = b.add_vars("theta", (S,), theta_lb)
    for kind in (DeviceKind.CCHP, DeviceKind.TX):
        cols = np.array(instance.devices_of(kind))
        b.add_rows("invest_min", [(cols[None, :], 1.0)], GE, 1.0, shape=(1,))
    if M:
        imap = input_map(instance)
        sigma = instance.res_penetration_cap
        rated = np.array([o.rated_power for o in instance.res_options])
        e_rating = np.zeros(D)
        np.add.at(e_rating, imap.device[imap.carrier == 0], imap.rating[imap.carrier == 0])
        b.add_rows("res_penetration", [(z_res[None, :], ((1 - sigma) * rated)[None, :]),
                                       (u[None, :], (-sigma * e_rating)[None, :])], LE, 0.0, shape=(1,))
    c_dev, c_res, c_ess = investment_coefficients(instance)
    b.add_objective(u, c_dev)
    b.add_objective(z_res, c_res)
    b.add_objective(z_ess, c_ess)
    losses = [LinExpr(np.array([theta[s]]), np.array([1.0])) for s in range(S)]
    zeta_lb = float(theta_lb.min()) if theta_lb.min() >= 0 else -np.inf
    emit_risk_terms(b, losses, instance.probs, risk, weight=instance.days_per_year, zeta_lb=zeta_lb)
    return _Master(b.build(), D + M + N, theta)


class _Subproblem:
    """Operation LP of one scenario with the investment columns fixable."""

    def __init__(self, instance: EhInstance, s: int, backend):
        single = instance.with_scenarios([instance.scenarios[s].with_prob(1.0)])
        self.instance = single
        self.pm: PlanningMilp = build_milp(single, RiskConfig(alpha=0.0, beta=0.0), relax_ess_binaries=True)
        blk = self.pm.problem.blocks
        self.fs = np.concatenate([blk["u"], blk["z_res"], blk["z_ess"]])
        self.days = instance.days_per_year
        self.backend = backend

    def solve(self, x_fs: np.ndarray):
        prob = self.pm.problem
        lb, ub = prob.lb.copy(), prob.ub.copy()
        lb[self.fs] = x_fs
        ub[self.fs] = x_fs
        res = self.backend.solve(prob, relax=True, lb=lb, ub=ub)
        if res.status == bk.UNBOUNDED:
            raise FormulationError("operation subproblem is unbounded")
        if res.status == bk.INFEASIBLE:
            return None, phase_one(prob, lb, ub, self.fs, self.backend)
        if res.status != bk.OPTIMAL:
            raise SolverFailure(f"subproblem status {res.status}: {res.message}")
        c_fs = prob.c[self.fs]
        q = (res.objective - float(c_fs @ x_fs)) / self.days
        g = (res.col_duals[self.fs] - c_fs) / self.days
        return (q, g, res.x), None


def phase_one(problem: MilpProblem, lb: np.ndarray, ub: np.ndarray, fixed: np.ndarray, backend) -> tuple[float, np.ndarray]:
    """Infeasibility measure and its slope in the fixed columns.

    Solves ``min sum(slack)`` over the rows relaxed by elastic slacks; the
    returned pair ``(w, g)`` yields the cut ``w + g @ (x - x_hat) <= 0``.
    """
    m, n = problem.n_rows, problem.n_vars
    eye = sparse.identity(m, format="csr")
    A = sparse.hstack([problem.A, eye, -eye]).tocsr()
    aug = MilpProblem(
        lb=np.r_[lb, np.zeros(2 * m)],
        ub=np.r_[ub, np.full(2 * m, np.inf)],
        vtype=np.r_[problem.vtype, np.full(2 * m, "C")],
        A=A, sense=problem.sense, rhs=problem.rhs,
        c=np.r_[np.zeros(n), np.ones(2 * m)],
    )
    res = backend.solve(aug, relax=True)
    if res.status != bk.OPTIMAL:
        raise SolverFailure(f"phase-one status {res.status}: {res.message}")
    return res.objective, res.col_duals[fixed]


def _stack(plan_x: np.ndarray, D: int, M: int) -> PlanDecision:
    r = np.round(plan_x).astype(int)
    return PlanDecision(u=r[:D], z_res=r[D:D + M], z_ess=r[D + M:])


def benders_solve(instance: EhInstance, risk: RiskConfig, gap: float = 1e-4, max_iter: int = 200,
                  backend=None, theta_lb: np.ndarray | None = None,
                  time_limit: float | None = None, lp_warmup: int = 100) -> tuple[PlanSolution, BendersLog]:
    """Solve by multi-cut Benders; falls back to the monolithic model when
    the relaxed storage dispatch is not mode-exclusive.

    Up to ``lp_warmup`` rounds on the relaxed master seed the cut pool
    before the integer master is solved.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    backend = backend or bk.default_backend()
    t_start = time.perf_counter()
    blog = BendersLog()
    try:
        instance.check_buildable()
    except InfeasibleModelError as exc:
        return PlanSolution.infeasible(str(exc), "benders"), blog

    S = len(instance.scenarios)
    D, M = len(instance.devices), len(instance.res_options)
    days = instance.days_per_year
    theta_lb = recourse_lower_bound(instance) if theta_lb is None else np.broadcast_to(theta_lb, (S,)).astype(float)
    master = _build_master(instance, risk, theta_lb)
    subs = [_Subproblem(instance, s, backend) for s in range(S)]
    c_fs = master.base.c[: master.n_fs]
    probs = instance.probs

    def cut_round(x: np.ndarray, theta_hat: np.ndarray):
        """Solve every subproblem at ``x``; keep only cuts that separate the
        master point."""
        q = np.empty(S)
        points = []
        feasible = True
        added = 0
        for s, sub in enumerate(subs):
            opt, feas = sub.solve(x)
            if opt is None:
                w, g = feas
                cut = BendersCut(FEASIBILITY, s, w - float(g @ x), g)
                feasible = False
            else:
                q[s], g, xs = opt
                points.append(xs)
                cut = BendersCut(OPTIMALITY, s, q[s] - float(g @ x), g)
                if q[s] - theta_hat[s] <= CUT_TOL * max(abs(q[s]), 1.0):
                    continue
            master.add(cut)
            blog.cuts.append(cut)
            added += 1
        return q, points, feasible, added

    # Kelley iterations on the relaxed master: cheap cuts before branching,
    # stopped once the relaxed bound stalls
    lp_bounds: list[float] = []
    for k in range(lp_warmup):
        res = backend.solve(master.problem(), relax=True)
        if res.status != bk.OPTIMAL:
            break
        lp_bounds.append(res.objective)
        if k >= STALL_ROUNDS and lp_bounds[-1] - lp_bounds[-1 - STALL_ROUNDS] <= 0.01 * gap * abs(lp_bounds[-1]):
            break
        x_lp = res.x[: master.n_fs]
        q, _, feasible, added = cut_round(x_lp, res.x[master.theta])
        if not added:
            break
        if feasible:
            ub_lp = float(c_fs @ x_lp) + days * risk_objective(q, probs, risk)
            log.debug("benders lp round=%d lb=%.6g ub=%.6g", k, res.objective, ub_lp)
            if ub_lp - res.objective <= 0.1 * gap * max(abs(ub_lp), 1e-12):
                break
        if time_limit is not None and time.perf_counter() - t_start > time_limit:
            break

    lb_best, ub_best = -math.inf, math.inf
    cur_gap = math.inf
    best_x, best_points = None, None
    status = ITERATION_LIMIT
    for it in range(1, max_iter + 1):
        t0 = time.perf_counter()
        # loose masters while the bounds are far apart; the dual bound
        # stays valid whatever gap the master is solved to
        master_gap = min(max(gap * 0.1, cur_gap * 0.1), 0.01)
        res = backend.solve(master.problem(), gap=master_gap)
        t_master = time.perf_counter() - t0
        if res.status == bk.INFEASIBLE:
            return PlanSolution.infeasible("investment constraints admit no plan", "benders"), blog
        if not res.has_solution:
            raise SolverFailure(f"master status {res.status}: {res.message}")
        bound = res.dual_bound if res.dual_bound is not None else res.objective
        lb_best = max(lb_best, bound)
        x_hat = np.round(res.x[: master.n_fs])

        t0 = time.perf_counter()
        q, points, feasible, n_cuts = cut_round(x_hat, res.x[master.theta])
        t_sub = time.perf_counter() - t0

        if feasible:
            ub_it = float(c_fs @ x_hat) + days * risk_objective(q, probs, risk)
            if ub_it < ub_best:
                ub_best, best_x, best_points = ub_it, x_hat, points
        cur_gap = (ub_best - lb_best) / max(abs(ub_best), 1e-12) if math.isfinite(ub_best) else math.inf
        blog.record(iteration=it, lb=lb_best, ub=ub_best, gap=cur_gap, cuts=n_cuts,
                    master_ms=1e3 * t_master, sub_ms=1e3 * t_sub)
        log.debug("benders it=%d lb=%.6g ub=%.6g gap=%.3g", it, lb_best, ub_best, cur_gap)
        if cur_gap <= gap:
            status = OPTIMAL
            break
        if time_limit is not None and time.perf_counter() - t_start > time_limit:
            break

    if best_x is None:
        raise SolverFailure("no feasible investment found within the iteration budget")
    plan = _stack(best_x, D, M)
    schedule = OperationSchedule.zeros(instance)
    for s, (sub, xs) in enumerate(zip(subs, best_points)):
        part = read_schedule(sub.pm, sub.instance, xs)
        for name in ("p_in", "hub_out", "p_res", "p_ch", "p_dis", "soc", "v_ch", "v_dis", "shed"):
            getattr(schedule, name)[s] = getattr(part, name)[0]
    solution = PlanSolution(
        status=status, plan=plan, schedule=schedule,
        costs=evaluate_costs(instance, plan, schedule, risk.alpha, risk.beta),
        gap=blog.iterations[-1]["gap"], method="benders",
        runtime=time.perf_counter() - t_start,
    )
    flags = relaxation_audit(instance, risk, solution)
    if flags:
        log.warning("relaxed dispatch overlaps in %d steps; re-solving monolithically", len(flags))
        blog.fallback = True
        mono = solve_monolithic(instance, risk, gap=gap, backend=backend)
        mono.method = "benders->monolithic"
        mono.notes.append(f"relaxation audit flagged {len(flags)} steps")
        mono.runtime = time.perf_counter() - t_start
        return mono, blog
    return solution, blog


def cut_violations(instance: EhInstance, blog: BendersLog, plan: PlanDecision, backend=None,
                   tol: float = 1e-6) -> list[tuple[int, float]]:
    """Optimality cuts that overestimate the true recourse at ``plan``.

    Returns ``(cut index, excess)`` pairs; an empty list means every cut is
    a valid under-estimator there.
    """
    backend = backend or bk.default_backend()
    x = np.r_[plan.u, plan.z_res, plan.z_ess].astype(float)
    S = len(instance.scenarios)
    q = np.empty(S)
    for s in range(S):
        opt, _ = _Subproblem(instance, s, backend).solve(x)
        q[s] = math.inf if opt is None else opt[0]
    bad = []
    for i, cut in enumerate(blog.cuts):
        if cut.kind != OPTIMALITY:
            continue
        excess = cut.value(x) - q[cut.scenario]
        if excess > tol * max(1.0, abs(q[cut.scenario])):
            bad.append((i, excess))
    return bad
