"""CSV report writers and the run manifest.

Money columns are in units of 10^4 RMB with two decimals.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from ..model import CostBreakdown, DeviceKind, EhInstance, OperationSchedule, PlanDecision, ResKind
from ..scenarios import DEVIATION_COMPONENTS, KERNEL_BACKEND

COST_ROWS = ("IC", "TC", "MC", "LC", "VaR", "CVaR", "Total")
COST_LABELS = {
    "IC": "investment_cost",
    "TC": "trading_cost",
    "MC": "maintenance_cost",
    "LC": "load_shedding_cost",
    "VaR": "var",
    "CVaR": "cvar",
    "Total": "total_cost",
}


def money(x: float) -> str:
    return f"{x / 1e4:.2f}"


def _writer(path: Path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_cost_table(path: Path, columns: dict[str, CostBreakdown]) -> None:
    """Components as rows, one column per run label."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["component_1e4_rmb", *columns])
        comps = {k: c.components() for k, c in columns.items()}
        for row in COST_ROWS:
            w.writerow([COST_LABELS[row], *(money(comps[k][row]) for k in columns)])


def plan_capacities(instance: EhInstance, plan: PlanDecision) -> dict[str, float]:
    """Installed amount per family: MW for converters and WT, MWh for
    storage, m^2 for PV."""
    out: dict[str, float] = {}
    for kind in DeviceKind:
        out[f"{kind.value}_mw"] = float(sum(d.capacity_mw for d, x in zip(instance.devices, plan.u) if x and d.kind is kind))
    for o, z in zip(instance.res_options, plan.z_res):
        if o.kind is ResKind.WT:
            out[f"{o.name}_mw"] = out.get(f"{o.name}_mw", 0.0) + z * o.rated_power
        else:
            out[f"{o.name}_m2"] = out.get(f"{o.name}_m2", 0.0) + z * o.panel_area
        out[f"{o.name}_modules"] = out.get(f"{o.name}_modules", 0.0) + z
    for o, z in zip(instance.ess_options, plan.z_ess):
        out[f"{o.name}_mwh"] = out.get(f"{o.name}_mwh", 0.0) + z * o.energy_per_module
    return out


def write_plan_table(path: Path, columns: dict[str, tuple[EhInstance, PlanDecision]]) -> None:
    caps = {k: plan_capacities(inst, plan) for k, (inst, plan) in columns.items()}
    rows = list(dict.fromkeys(r for c in caps.values() for r in c))
    fh, w = _writer(path)
    with fh:
        w.writerow(["item", *columns])
        for r in rows:
            w.writerow([r, *(f"{caps[k].get(r, 0.0):.4f}" for k in columns)])


def write_selection(path: Path, instance: EhInstance, plan: PlanDecision) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(["family", "option", "value"])
        for d, x in zip(instance.devices, plan.u):
            w.writerow([d.kind.value, d.capacity_id, int(x)])
        for o, z in zip(instance.res_options, plan.z_res):
            w.writerow([o.kind.value, o.name, int(z)])
        for o, z in zip(instance.ess_options, plan.z_ess):
            w.writerow([o.kind.value, o.name, int(z)])


def expected_hourly(instance: EhInstance, schedule: OperationSchedule) -> dict[str, np.ndarray]:
    """Probability-weighted hourly series used by the figure CSVs."""
    p = instance.probs
    return {
        "shed_e_mw": p @ schedule.shed[:, :, 0],
        "shed_h_mw": p @ schedule.shed[:, :, 1],
        "shed_c_mw": p @ schedule.shed[:, :, 2],
        "grid_e_mw": p @ schedule.p_in[:, :, :, 0].sum(axis=2),
        "gas_mw": p @ schedule.p_in[:, :, :, 1].sum(axis=2),
    }


def write_hourly(path: Path, series: dict[str, dict[str, np.ndarray]], keys: tuple[str, ...]) -> None:
    """Long-format hourly table: one row per (label, hour)."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["label", "hour", *keys])
        for label, s in series.items():
            for t in range(len(s[keys[0]])):
                w.writerow([label, t, *(f"{s[k][t]:.6f}" for k in keys)])


def write_investment_grid(path: Path, grid: dict[tuple[float, float], float | None]) -> None:
    alphas = sorted({a for a, _ in grid})
    betas = sorted({b for _, b in grid})
    fh, w = _writer(path)
    with fh:
        w.writerow(["alpha\\beta", *(f"{b:g}" for b in betas)])
        for a in alphas:
            w.writerow([f"{a:g}", *("" if grid.get((a, b)) is None else money(grid[a, b]) for b in betas)])


def fmt_pct(v: float | str) -> str:
    return v if isinstance(v, str) else f"{v:+.2f}%"


def write_deviation_table(path: Path, rows: list[tuple[str, int, dict]]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(["method", "scenarios", *DEVIATION_COMPONENTS])
        for method, n, dev in rows:
            w.writerow([method, n, *(fmt_pct(dev[c]) for c in DEVIATION_COMPONENTS)])


def write_solution(path: Path, plan: PlanDecision, schedule: OperationSchedule) -> None:
    np.savez_compressed(
        path, u=plan.u, z_res=plan.z_res, z_ess=plan.z_ess,
        **{k: getattr(schedule, k) for k in ("p_in", "hub_out", "p_res", "p_ch", "p_dis", "soc", "v_ch", "v_dis", "shed")},
    )


def read_solution(path: Path) -> tuple[PlanDecision, OperationSchedule]:
    with np.load(path) as z:
        plan = PlanDecision(u=z["u"], z_res=z["z_res"], z_ess=z["z_ess"])
        sched = OperationSchedule(**{k: z[k] for k in ("p_in", "hub_out", "p_res", "p_ch", "p_dis", "soc", "v_ch", "v_dis", "shed")})
    return plan, sched


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def versions() -> dict[str, str]:
    import numpy
    import scipy

    from .. import __version__

    return {"ehplan": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "kernels": KERNEL_BACKEND}


def write_manifest(outdir: Path, verb: str, config: dict, outputs: list[Path], extra: dict | None = None) -> Path:
    """JSON manifest: verb, full config echo, seeds, versions and output digests."""
    manifest = {
        "verb": verb,
        "config": config,
        "seeds": {k: config[k] for k in ("synth_seed", "reduction_seed") if k in config},
        "versions": versions(),
        "outputs": {str(p.relative_to(outdir)): _sha256(p) for p in sorted(outputs) if p.is_file()},
    }
    if extra:
        manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
