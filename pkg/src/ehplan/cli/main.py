"""``ehplan`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 infeasible
(or audit findings), 5 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from ..model import ModelError
from ..scenarios import ReductionError
from ..solve import BackendError, SolverFailure
from . import runner
from .config import ConfigError, RunConfig, load_config
from .yeardata import DataError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4, 5

log = logging.getLogger("ehplan")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file (or a run manifest)")
    g = p.add_argument_group("config overrides")
    for f in fields(RunConfig):
        g.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None, metavar=f.name.upper())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ehplan", description="Energy hub capacity planning under CVaR risk")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, text in (
        ("plan", "single planning solve"),
        ("sweep", "alpha x beta grid"),
        ("cases", "the four candidate-set presets"),
        ("ladder", "reduced-set fidelity against the full year"),
        ("reduce", "scenario reduction only"),
    ):
        _add_config_flags(sub.add_parser(verb, help=text))
    p = sub.add_parser("synth", help="write a synthetic year CSV")
    _add_config_flags(p)
    p.add_argument("out", help="destination CSV")
    p = sub.add_parser("audit", help="re-validate a stored solution")
    p.add_argument("run_dir", help="directory holding manifest.json and solution.npz")
    p.add_argument("--solution", help="solution file to audit instead of RUN_DIR/solution.npz")
    return ap


def _overrides(args: argparse.Namespace) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(RunConfig) if getattr(args, f.name, None) is not None}


def dispatch(args: argparse.Namespace) -> int:
    if args.verb == "audit":
        violations, flags = runner.run_audit(Path(args.run_dir), Path(args.solution) if args.solution else None)
        for v in violations:
            print(v)
        for f in flags:
            print(f"overlap scenario={f.scenario} step={f.step} option={f.option} amount={f.overlap:.3g}")
        print(f"{len(violations)} violations, {len(flags)} overlap flags")
        return EXIT_INFEASIBLE if violations or flags else EXIT_OK
    cfg = load_config(args.config, _overrides(args))
    if args.verb == "synth":
        print(runner.run_synth(cfg, Path(args.out)))
        return EXIT_OK
    run = {"plan": runner.run_plan, "sweep": runner.run_sweep, "cases": runner.run_cases,
           "ladder": runner.run_ladder, "reduce": runner.run_reduce}[args.verb]
    outcome = run(cfg)
    for label, obj in runner.objective_table(outcome).items():
        print(f"{label}: objective {obj / 1e4:.2f} x10^4 RMB")
    for label, msg in outcome.failures.items():
        print(f"{label}: FAILED {msg}", file=sys.stderr)
    print(f"outputs in {outcome.outdir}")
    return EXIT_SOLVER if outcome.failures else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ReductionError, ModelError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except runner.InfeasibleRun as exc:
        print(f"infeasible: {exc.hint}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverFailure, BackendError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
