"""Solver backends.

A backend takes a :class:`~ehplan.milp.MilpProblem` and returns a
:class:`SolveResult`. LP solves also report dual multipliers: ``row_duals``
are derivatives of the optimal value with respect to each row's right-hand
side, and ``col_duals`` are reduced costs (derivatives with respect to an
active variable bound).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from ..milp import EQ, GE, LE, MilpProblem

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"
ERROR = "error"


class BackendError(RuntimeError):
    pass


@dataclass
class SolveResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    dual_bound: float | None = None
    gap: float | None = None
    row_duals: np.ndarray | None = None
    col_duals: np.ndarray | None = None
    runtime: float = 0.0
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def has_solution(self) -> bool:
        return self.x is not None


class SolverBackend(Protocol):
    name: str
    supports_milp: bool
    supports_duals: bool
    thread_safe: bool

    def solve(self, problem: MilpProblem, *, relax: bool = False, gap: float = 1e-4,
              time_limit: float | None = None, lb: np.ndarray | None = None,
              ub: np.ndarray | None = None) -> SolveResult: ...


class HighsBackend:
    """HiGHS through :mod:`scipy.optimize`.

    MILPs go through :func:`scipy.optimize.milp`; pure LPs (or relaxations)
    through :func:`scipy.optimize.linprog`, which exposes duals.
    """

    name = "highs"
    supports_milp = True
    supports_duals = True
    thread_safe = True  # every call builds its own HiGHS instance

    def __init__(self, presolve: bool = True):
        self.presolve = presolve

    def solve(self, problem, *, relax=False, gap=1e-4, time_limit=None, lb=None, ub=None):
        lb = problem.lb if lb is None else lb
        ub = problem.ub if ub is None else ub
        integral = problem.integrality.astype(bool) & (lb != ub)
        if relax or not integral.any():
            return self._solve_lp(problem, lb, ub, time_limit)
        return self._solve_milp(problem, lb, ub, gap, time_limit)

    def _solve_milp(self, problem, lb, ub, gap, time_limit):
        lo, hi = problem.row_bounds()
        opts = {"mip_rel_gap": gap, "presolve": self.presolve, "disp": False}
        if time_limit is not None:
            opts["time_limit"] = float(time_limit)
        cons = [LinearConstraint(problem.A, lo, hi)] if problem.n_rows else []
        t0 = time.perf_counter()
        try:
            res = milp(problem.c, constraints=cons, integrality=problem.integrality,
                       bounds=Bounds(lb, ub), options=opts)
        except Exception as exc:  # scipy raises ValueError on malformed input
            raise BackendError(f"HiGHS MILP failed: {exc}") from exc
        dt = time.perf_counter() - t0
        if res.status == 2:
            return SolveResult(INFEASIBLE, runtime=dt, message=res.message)
        if res.status == 3:
            return SolveResult(UNBOUNDED, runtime=dt, message=res.message)
        if res.x is None:
            status = LIMIT if res.status == 1 else ERROR
            return SolveResult(status, runtime=dt, message=res.message)
        status = OPTIMAL if res.status == 0 else LIMIT
        dual_bound = getattr(res, "mip_dual_bound", None)
        return SolveResult(
            status,
            x=np.asarray(res.x),
            objective=float(res.fun) + problem.c0,
            dual_bound=None if dual_bound is None else float(dual_bound) + problem.c0,
            gap=getattr(res, "mip_gap", None),
            runtime=dt,
            message=res.message,
        )

    def _solve_lp(self, problem, lb, ub, time_limit):
        A = problem.A
        le = problem.sense == LE
        ge = problem.sense == GE
        eq = problem.sense == EQ
        ineq = le | ge
        sign = np.where(ge, -1.0, 1.0)
        A_ub = A[ineq].multiply(sign[ineq][:, None]).tocsr() if ineq.any() else None
        b_ub = (problem.rhs * sign)[ineq] if ineq.any() else None
        A_eq = A[eq] if eq.any() else None
        b_eq = problem.rhs[eq] if eq.any() else None
        opts = {"presolve": self.presolve}
        if time_limit is not None:
            opts["time_limit"] = float(time_limit)
        t0 = time.perf_counter()
        try:
            res = linprog(problem.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                          bounds=np.column_stack([lb, ub]), method="highs", options=opts)
        except Exception as exc:
            raise BackendError(f"HiGHS LP failed: {exc}") from exc
        dt = time.perf_counter() - t0
        if res.status == 2:
            return SolveResult(INFEASIBLE, runtime=dt, message=res.message)
        if res.status == 3:
            return SolveResult(UNBOUNDED, runtime=dt, message=res.message)
        if res.status != 0:
            return SolveResult(LIMIT if res.status == 1 else ERROR, runtime=dt, message=res.message)
        row_duals = np.zeros(problem.n_rows)
        if ineq.any():
            row_duals[ineq] = res.ineqlin.marginals * sign[ineq]
        if eq.any():
            row_duals[eq] = res.eqlin.marginals
        col_duals = np.asarray(res.lower.marginals) + np.asarray(res.upper.marginals)
        obj = float(res.fun) + problem.c0
        return SolveResult(OPTIMAL, x=np.asarray(res.x), objective=obj, dual_bound=obj, gap=0.0,
                           row_duals=row_duals, col_duals=col_duals, runtime=dt, message=res.message)


def default_backend() -> SolverBackend:
    return HighsBackend()
