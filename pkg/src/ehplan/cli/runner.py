"""Experiment orchestration behind the command-line verbs."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..model import EhInstance, evaluate_costs, validate_schedule
from ..risk import RiskConfig
from ..scenarios import (
    ReductionTrace,
    ScenarioSet,
    YearSeries,
    backward_reduce,
    deviation_report,
    kmeans_reduce,
    slice_days,
)
from ..solve import (
    BendersLog,
    PlanSolution,
    benders_solve,
    brute_force_search,
    relaxation_audit,
    solve_monolithic,
)
from ..solve.result import INFEASIBLE, OPTIMAL
from . import report
from .catalog import Catalog, build_instance, load_catalog
from .config import ConfigError, RunConfig
from .yeardata import ingest_year, synth_year, write_year

log = logging.getLogger(__name__)

HOURLY_SHED = ("shed_e_mw", "shed_h_mw", "shed_c_mw")
HOURLY_TRADE = ("grid_e_mw", "gas_mw")


class InfeasibleRun(RuntimeError):
    def __init__(self, hint: str):
        super().__init__(hint)
        self.hint = hint


@dataclass
class RunOutcome:
    outdir: Path
    outputs: list[Path] = field(default_factory=list)
    solutions: dict[str, PlanSolution] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def load_year(cfg: RunConfig) -> YearSeries:
    if cfg.year_path:
        return ingest_year(cfg.year_path, cfg.steps_per_day)
    return synth_year(cfg.synth_seed, cfg.synth_profile, tariff_peak=cfg.tariff_peak,
                      tariff_valley=cfg.tariff_valley)


def reduce_set(cfg: RunConfig, full: ScenarioSet, method: str | None = None,
               target: int | None = None) -> tuple[ScenarioSet, ReductionTrace | None]:
    method = method or cfg.reduction_method
    target = min(target or cfg.reduction_target, len(full))
    if method == "none":
        return full, None
    if method == "backward":
        return backward_reduce(full, target, normalize=cfg.normalize_features)
    return kmeans_reduce(full, target, seed=cfg.reduction_seed, normalize=cfg.normalize_features), None


def solve_instance(instance: EhInstance, cfg: RunConfig, risk: RiskConfig) -> tuple[PlanSolution, BendersLog | None]:
    if cfg.solve_method == "monolithic":
        return solve_monolithic(instance, risk, gap=cfg.gap, time_limit=cfg.time_limit), None
    if cfg.solve_method == "benders":
        return benders_solve(instance, risk, gap=cfg.gap, max_iter=cfg.max_iter, time_limit=cfg.time_limit,
                             lp_warmup=cfg.lp_warmup)
    found = brute_force_search(instance, risk)
    if found.plan is None:
        return PlanSolution.infeasible("no admissible investment", "oracle"), None
    costs = evaluate_costs(instance, found.plan, found.schedule, risk.alpha, risk.beta)
    return PlanSolution(OPTIMAL, found.plan, found.schedule, costs, gap=0.0, method="oracle"), None


def _checked(instance: EhInstance, sol: PlanSolution) -> PlanSolution:
    if sol.status == INFEASIBLE:
        raise InfeasibleRun(sol.hint or "problem is infeasible")
    violations = validate_schedule(instance, sol.plan, sol.schedule)
    if violations:
        sol.notes.append(f"{len(violations)} validation findings, first: {violations[0]}")
        log.warning("solution has %d validation findings", len(violations))
    return sol


def _emit_cell(outdir: Path, instance: EhInstance, sol: PlanSolution, blog: BendersLog | None, label: str) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "costs": outdir / "costs.csv",
        "plan": outdir / "plan.csv",
        "selection": outdir / "selection.csv",
        "hourly": outdir / "hourly.csv",
        "solution": outdir / "solution.npz",
    }
    report.write_cost_table(paths["costs"], {label: sol.costs})
    report.write_plan_table(paths["plan"], {label: (instance, sol.plan)})
    report.write_selection(paths["selection"], instance, sol.plan)
    report.write_hourly(paths["hourly"], {label: report.expected_hourly(instance, sol.schedule)},
                        HOURLY_SHED + HOURLY_TRADE)
    report.write_solution(paths["solution"], sol.plan, sol.schedule)
    out = list(paths.values())
    if blog is not None and blog.iterations:
        blog.to_csv(outdir / "benders_log.csv")
        out.append(outdir / "benders_log.csv")
    return out


def _write_set(path: Path, sset: ScenarioSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "origin", "prob"])
        for i, (o, p) in enumerate(zip(sset.origins, sset.probs)):
            w.writerow([i, "" if o is None else o, repr(float(p))])


def _status_row(sol: PlanSolution) -> dict:
    return {"status": sol.status, "method": sol.method, "gap": sol.gap, "objective": sol.objective,
            "runtime_s": round(sol.runtime, 3), "notes": sol.notes}


def _prepare(cfg: RunConfig) -> tuple[ScenarioSet, ScenarioSet, ReductionTrace | None, Catalog]:
    full = slice_days(load_year(cfg))
    reduced, trace = reduce_set(cfg, full)
    return full, reduced, trace, load_catalog(cfg)


def run_plan(cfg: RunConfig) -> RunOutcome:
    outdir = Path(cfg.output_dir)
    _, reduced, trace, catalog = _prepare(cfg)
    instance = build_instance(cfg, catalog, reduced)
    sol, blog = solve_instance(instance, cfg, RiskConfig(cfg.alpha, cfg.beta))
    outcome = RunOutcome(outdir)
    if sol.status == INFEASIBLE:
        outdir.mkdir(parents=True, exist_ok=True)
        report.write_manifest(outdir, "plan", cfg.to_dict(), [], {"result": _status_row(sol)})
        raise InfeasibleRun(sol.hint)
    _checked(instance, sol)
    outcome.outputs = _emit_cell(outdir, instance, sol, blog, cfg.case)
    if trace is not None:
        trace.to_csv(outdir / "reduction_trace.csv")
        outcome.outputs.append(outdir / "reduction_trace.csv")
    outcome.solutions[cfg.case] = sol
    report.write_manifest(outdir, "plan", cfg.to_dict(), outcome.outputs, {"result": _status_row(sol)})
    return outcome


def run_sweep(cfg: RunConfig) -> RunOutcome:
    """alpha x beta grid over one reduced scenario set."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _, reduced, _, catalog = _prepare(cfg)
    instance = build_instance(cfg, catalog, reduced)
    outcome = RunOutcome(outdir)
    grid: dict[tuple[float, float], float | None] = {}
    costs, plans, hourly, status = {}, {}, {}, []
    for a in cfg.sweep_alphas:
        for b in cfg.sweep_betas:
            label = f"a{a:g}_b{b:g}"
            cell_cfg = cfg.replace(alpha=a, beta=b, output_dir=str(outdir / label))
            try:
                sol, blog = solve_instance(instance, cell_cfg, RiskConfig(a, b))
                _checked(instance, sol)
            except Exception as exc:  # a failed cell must not stop the sweep
                log.error("sweep cell %s failed: %s", label, exc)
                grid[a, b] = None
                outcome.failures[label] = f"{type(exc).__name__}: {exc}"
                status.append([label, a, b, "failed", str(exc)])
                continue
            cell_out = _emit_cell(outdir / label, instance, sol, blog, label)
            report.write_manifest(outdir / label, "plan", cell_cfg.to_dict(), cell_out, {"result": _status_row(sol)})
            outcome.outputs += cell_out + [outdir / label / "manifest.json"]
            outcome.solutions[label] = sol
            grid[a, b] = sol.costs.ic
            costs[label] = sol.costs
            plans[label] = (instance, sol.plan)
            hourly[label] = report.expected_hourly(instance, sol.schedule)
            status.append([label, a, b, sol.status, ""])
    files = {name: outdir / f"{name}.csv" for name in ("investment_grid", "sweep_costs", "sweep_plans", "shedding", "sweep_status")}
    report.write_investment_grid(files["investment_grid"], grid)
    report.write_cost_table(files["sweep_costs"], costs)
    report.write_plan_table(files["sweep_plans"], plans)
    report.write_hourly(files["shedding"], hourly, HOURLY_SHED)
    with open(files["sweep_status"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "alpha", "beta", "status", "message"])
        w.writerows(status)
    outcome.outputs += list(files.values())
    report.write_manifest(outdir, "sweep", cfg.to_dict(), outcome.outputs, {"failures": outcome.failures})
    return outcome


def run_cases(cfg: RunConfig, cases=("case1", "case2", "case3", "case4")) -> RunOutcome:
    """The four candidate-set presets on one reduced scenario set."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _, reduced, _, catalog = _prepare(cfg)
    risk = RiskConfig(cfg.alpha, cfg.beta)
    outcome = RunOutcome(outdir)
    costs, plans, hourly = {}, {}, {}
    for case in cases:
        instance = build_instance(cfg, catalog, reduced, case)
        sol, blog = solve_instance(instance, cfg, risk)
        _checked(instance, sol)
        cell_cfg = cfg.replace(case=case, output_dir=str(outdir / case))
        cell_out = _emit_cell(outdir / case, instance, sol, blog, case)
        report.write_manifest(outdir / case, "plan", cell_cfg.to_dict(), cell_out, {"result": _status_row(sol)})
        outcome.outputs += cell_out + [outdir / case / "manifest.json"]
        outcome.solutions[case] = sol
        costs[case] = sol.costs
        plans[case] = (instance, sol.plan)
        hourly[case] = report.expected_hourly(instance, sol.schedule)
    files = {name: outdir / f"{name}.csv" for name in ("case_costs", "case_plans", "trading")}
    report.write_cost_table(files["case_costs"], costs)
    report.write_plan_table(files["case_plans"], plans)
    report.write_hourly(files["trading"], hourly, HOURLY_TRADE)
    outcome.outputs += list(files.values())
    report.write_manifest(outdir, "cases", cfg.to_dict(), outcome.outputs)
    return outcome


def run_ladder(cfg: RunConfig) -> RunOutcome:
    """Deviation of reduced-set results from the full-year result at each
    target count, for each reduction method."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    full = slice_days(load_year(cfg))
    catalog = load_catalog(cfg)
    risk = RiskConfig(cfg.alpha, cfg.beta)
    outcome = RunOutcome(outdir)
    inst_full = build_instance(cfg, catalog, full)
    full_sol, _ = solve_instance(inst_full, cfg, risk)
    _checked(inst_full, full_sol)
    outcome.solutions["full"] = full_sol
    rows, costs = [], {f"full{len(full)}": full_sol.costs}
    for method in cfg.ladder_methods:
        for target in cfg.ladder_targets:
            reduced, _ = reduce_set(cfg, full, method, target)
            inst = build_instance(cfg, catalog, reduced)
            sol, _ = solve_instance(inst, cfg, risk)
            _checked(inst, sol)
            label = f"{method}{target}"
            outcome.solutions[label] = sol
            costs[label] = sol.costs
            rows.append((method, target, deviation_report(full_sol.costs, sol.costs)))
    summary = {}
    for method in cfg.ladder_methods:
        summary[method] = {str(n): abs(d["Total"]) for m, n, d in rows if m == method}
    files = {"deviation": outdir / "deviation.csv", "ladder_costs": outdir / "ladder_costs.csv"}
    report.write_deviation_table(files["deviation"], rows)
    report.write_cost_table(files["ladder_costs"], costs)
    outcome.outputs += list(files.values())
    outcome.summary = {"abs_total_deviation_pct": summary}
    report.write_manifest(outdir, "ladder", cfg.to_dict(), outcome.outputs, outcome.summary)
    return outcome


def run_reduce(cfg: RunConfig) -> RunOutcome:
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    full = slice_days(load_year(cfg))
    reduced, trace = reduce_set(cfg, full)
    outcome = RunOutcome(outdir)
    set_path = outdir / "reduced_set.csv"
    _write_set(set_path, reduced)
    series_path = outdir / "reduced_series.csv"
    with open(series_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "hour", "load_e_mw", "load_h_mw", "load_c_mw", "wind_mps",
                    "irradiance_wpm2", "price_e_rmb_per_mwh"])
        for i, sc in enumerate(reduced.scenarios):
            for t in range(sc.steps):
                w.writerow([i, t, *(f"{getattr(sc, k)[t]:.6f}" for k in
                                    ("load_e", "load_h", "load_c", "wind_speed", "irradiance", "price_e"))])
    outcome.outputs = [set_path, series_path]
    if trace is not None:
        trace.to_csv(outdir / "reduction_trace.csv")
        outcome.outputs.append(outdir / "reduction_trace.csv")
    report.write_manifest(outdir, "reduce", cfg.to_dict(), outcome.outputs)
    return outcome


def run_synth(cfg: RunConfig, path: Path) -> Path:
    year = synth_year(cfg.synth_seed, cfg.synth_profile, tariff_peak=cfg.tariff_peak,
                      tariff_valley=cfg.tariff_valley)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_year(year, path)
    return path


def run_audit(run_dir: Path, solution: Path | None = None) -> tuple[list, list]:
    """Re-validate a stored solution against the instance its manifest
    describes. Returns ``(violations, overlap flags)``."""
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigError(f"no manifest in {run_dir}")
    manifest = json.loads(manifest_path.read_text())
    from .config import config_from_mapping

    cfg = config_from_mapping(manifest["config"]).validate()
    _, reduced, _, catalog = _prepare(cfg)
    instance = build_instance(cfg, catalog, reduced)
    plan, schedule = report.read_solution(solution or run_dir / "solution.npz")
    violations = validate_schedule(instance, plan, schedule)
    flags = relaxation_audit(instance, RiskConfig(cfg.alpha, cfg.beta), schedule)
    with open(run_dir / "audit.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "constraint", "eq", "scenario", "step", "option", "amount"])
        for v in violations:
            w.writerow(["violation", v.constraint, v.eq, v.scenario, v.step, v.option, f"{v.residual:.6g}"])
        for f in flags:
            w.writerow(["overlap", "ess_exclusive", "19", f.scenario, f.step, f.option, f"{f.overlap:.6g}"])
    return violations, flags


def objective_table(outcome: RunOutcome) -> dict[str, float]:
    return {k: float(s.objective) for k, s in outcome.solutions.items() if s.objective is not None}


__all__ = [
    "InfeasibleRun", "RunOutcome", "load_year", "objective_table", "reduce_set", "run_audit",
    "run_cases", "run_ladder", "run_plan", "run_reduce", "run_sweep", "run_synth", "solve_instance",
]
