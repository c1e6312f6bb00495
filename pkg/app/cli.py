# app/cli.py
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from app.io import ResultFile, load_instance, read_schedule, schedule_rows, write_result, write_trace_csv
from config.presets import PRESETS, with_overrides
from config.settings import SETTINGS
from evaluators.analytic_check import analytic_single_epoch_T
from evaluators.grid_oracle import OracleConfig, grid_min_energy
from evaluators.schedule_check import validate_schedule
from model.timeline import cumulative_data, cumulative_energy
from pipelines.scheduler import solve_min_energy_schedule, solve_min_time
from utils.common import fmt_float
from utils.errors import InstanceParseError, SchedulingError, ValidationFailed
from utils.trace import TraceRecorder

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

VERBS = ("solve", "min-energy", "validate", "oracle", "trace")

EXIT_OK = 0
EXIT_INFEASIBLE = 3


@dataclass
class RunConfig:
    verb: str
    instance_path: Path
    output_path: Optional[Path] = None
    preset: str = "default"
    overrides: Dict[str, object] = field(default_factory=dict)
    deadline: Optional[float] = None
    schedule_path: Optional[Path] = None
    grid_step: Optional[float] = None
    trace_enabled: bool = False
    timing: bool = True

    def __post_init__(self):
        if self.verb not in VERBS:
            raise InstanceParseError(f"unknown verb {self.verb!r}")
        if self.verb == "min-energy" and self.deadline is None:
            raise InstanceParseError("min-energy requires --deadline")
        if self.verb == "validate" and self.schedule_path is None:
            raise InstanceParseError("validate requires --schedule")
        if self.preset not in PRESETS:
            raise InstanceParseError(f"unknown preset {self.preset!r}")
        if self.verb == "trace":
            self.trace_enabled = True

    @property
    def trace_path(self) -> Path:
        if self.output_path is not None:
            return self.output_path.with_suffix(".trace.csv")
        return Path("ehsched_trace.csv")


def _solver_config(cfg: RunConfig):
    return with_overrides(PRESETS[cfg.preset](), **cfg.overrides)


def _run_solve(cfg: RunConfig) -> int:
    loaded = load_instance(cfg.instance_path)
    recorder = TraceRecorder() if cfg.trace_enabled else None
    schedule, report = solve_min_time(loaded.timeline, _solver_config(cfg), trace=recorder)
    if not cfg.timing:
        report = report.model_copy(update={"wall_time_s": None})

    print(f"\nCompletion time T: {fmt_float(schedule.T)} s")
    print(f"Consumed energy:   {fmt_float(schedule.consumed_energy)} J")
    print(f"Bisections: {report.bisections} (bound {report.bisection_bound}) | "
          f"SUMT iterations per deadline: {report.sumt_iterations[-1]} (bound {report.sumt_iteration_bound})")
    print("\nTrace:")
    for step in report.steps:
        print("  ", step)

    if cfg.output_path is not None:
        write_result(cfg.output_path, ResultFile(
            verb=cfg.verb,
            T=schedule.T,
            consumed_energy=schedule.consumed_energy,
            feasible=report.feasible,
            bandwidth_hz=loaded.bandwidth_hz,
            schedule=schedule_rows(schedule, loaded.bandwidth_hz),
            report=report.model_dump(mode="json"),
        ))
    if recorder is not None:
        write_trace_csv(cfg.trace_path, recorder.rows)
    return EXIT_OK


def _run_min_energy(cfg: RunConfig) -> int:
    loaded = load_instance(cfg.instance_path)
    recorder = TraceRecorder() if cfg.trace_enabled else None
    solver_cfg = _solver_config(cfg)
    schedule, res, wall = solve_min_energy_schedule(loaded.timeline, cfg.deadline, solver_cfg, trace=recorder)

    print(f"\nDeadline T: {fmt_float(res.T)} s | feasible: {res.feasible}")
    print(f"Minimum energy: {fmt_float(res.energy)} J | max violation: {res.max_violation:.3e}")
    print(f"SUMT iterations: {res.sumt_iters} | Newton steps: {sum(res.newton_steps)}")

    if cfg.output_path is not None:
        write_result(cfg.output_path, ResultFile(
            verb=cfg.verb,
            T=res.T,
            consumed_energy=schedule.consumed_energy,
            feasible=res.feasible,
            bandwidth_hz=loaded.bandwidth_hz,
            schedule=schedule_rows(schedule, loaded.bandwidth_hz),
            report={
                "sumt_iterations": res.sumt_iters,
                "newton_steps": res.newton_steps,
                "mu0": res.mu0,
                "mu_final": res.mu_final,
                "max_violation": res.max_violation,
                "hessian_dim": int(res.r.size),
                "wall_time_s": wall if cfg.timing else None,
            },
        ))
    if recorder is not None:
        write_trace_csv(cfg.trace_path, recorder.rows)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def _run_validate(cfg: RunConfig) -> int:
    loaded = load_instance(cfg.instance_path)
    schedule = read_schedule(cfg.schedule_path)
    tl = loaded.timeline
    feas_tol = _solver_config(cfg).sumt.feas_tol
    scale = max(1.0, cumulative_data(tl, schedule.T), cumulative_energy(tl, schedule.T))
    report = validate_schedule(tl, schedule, feas_tol * scale)

    print(f"\nSchedule {cfg.schedule_path}: {'PASS' if report['passed'] else 'FAIL'} "
          f"(max violation {report['max_violation']:.3e}, tol {feas_tol * scale:.3e})")
    for v in report["violations"]:
        print(" -", v)
    if cfg.output_path is not None:
        cfg.output_path.write_text(json.dumps(
            {k: report[k] for k in ("passed", "max_violation", "completion_mismatch", "violations")},
            indent=2, sort_keys=True,
        ) + "\n")
    if not report["passed"]:
        first = report["violations"][0]
        raise ValidationFailed(f"{cfg.schedule_path}: {len(report['violations'])} violation(s), first: {first}")
    return EXIT_OK


def _run_oracle(cfg: RunConfig) -> int:
    loaded = load_instance(cfg.instance_path)
    tl = loaded.timeline
    if cfg.deadline is not None:
        oracle_cfg = OracleConfig(grid_resolution=cfg.grid_step or SETTINGS.GRID_STEP)
        best = grid_min_energy(tl, cfg.deadline, oracle_cfg)
        out = {"kind": "grid_min_energy", "T": cfg.deadline, "rates": best.rates.tolist(),
               "energy": best.energy, "slack": best.slack}
        print(f"\nGrid optimum at T={fmt_float(cfg.deadline)}: rates={best.rates.tolist()} "
              f"energy={fmt_float(best.energy)} J")
    elif tl.epoch_count == 1:
        T = analytic_single_epoch_T(tl.total_energy, tl.total_data, tl.last_gain)
        out = {"kind": "analytic_single_epoch_T", "T": T}
        print(f"\nAnalytic completion time: {fmt_float(T)} s")
    else:
        raise InstanceParseError("oracle needs --deadline unless every event sits at t=0")
    if cfg.output_path is not None:
        cfg.output_path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


_HANDLERS = {
    "solve": _run_solve,
    "trace": _run_solve,
    "min-energy": _run_min_energy,
    "validate": _run_validate,
    "oracle": _run_oracle,
}


def run(cfg: RunConfig) -> int:
    """Execute one verb; SchedulingError subclasses map to their exit codes."""
    try:
        return _HANDLERS[cfg.verb](cfg)
    except SchedulingError as e:
        logger.error(f"{cfg.verb}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


def _mu0_arg(v: str):
    return v if v == "auto" else float(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, required=True, help="Instance JSON file")
    common.add_argument("--output", type=Path, default=None, help="Result JSON file")
    common.add_argument("--preset", choices=sorted(PRESETS), default="default", help="Solver threshold preset")
    common.add_argument("--mu0", type=_mu0_arg, default=None, help="Initial penalty coefficient or 'auto'")
    common.add_argument("--eta", type=float, default=None, help="Penalty growth factor")
    common.add_argument("--eps-newton", type=float, default=None, help="Newton decrement threshold")
    common.add_argument("--eps-sumt", type=float, default=None, help="SUMT stop threshold on 1/mu")
    common.add_argument("--eps-bisect", type=float, default=None, help="Bisection interval width")
    common.add_argument("--feas-tol", type=float, default=None, help="Feasibility tolerance")
    common.add_argument("--trace", action="store_true", help="Write a CSV progress trace next to --output")
    common.add_argument("--no-timing", action="store_true", help="Leave wall time out of the result file")

    parser = argparse.ArgumentParser(prog="ehsched", description="Energy-harvesting transmission schedule solver")
    sub = parser.add_subparsers(dest="cmd", required=True)
    sub.add_parser("solve", parents=[common], help="Minimum completion time schedule")
    sub.add_parser("trace", parents=[common], help="solve, always writing the CSV trace")
    p_me = sub.add_parser("min-energy", parents=[common], help="Minimum energy schedule for a fixed deadline")
    p_me.add_argument("--deadline", type=float, required=True, help="Deadline T in seconds")
    p_val = sub.add_parser("validate", parents=[common], help="Check a result file against an instance")
    p_val.add_argument("--schedule", type=Path, required=True, help="Result JSON file to check")
    p_or = sub.add_parser("oracle", parents=[common], help="Brute-force / closed-form reference values")
    p_or.add_argument("--deadline", type=float, default=None, help="Deadline for the grid search")
    p_or.add_argument("--grid-step", type=float, default=None, help="Rate grid resolution")
    return parser


def main(argv=None) -> int:
    argv = argv if argv is not None else sys.argv[1:]
    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    args = build_parser().parse_args(argv)

    overrides = {
        "mu0": args.mu0,
        "eta": args.eta,
        "eps_newton": args.eps_newton,
        "eps_sumt": args.eps_sumt,
        "eps_bisect": args.eps_bisect,
        "feas_tol": args.feas_tol,
    }
    try:
        cfg = RunConfig(
            verb=args.cmd,
            instance_path=args.input,
            output_path=args.output,
            preset=args.preset,
            overrides={k: v for k, v in overrides.items() if v is not None},
            deadline=getattr(args, "deadline", None),
            schedule_path=getattr(args, "schedule", None),
            grid_step=getattr(args, "grid_step", None),
            trace_enabled=args.trace,
            timing=not args.no_timing,
        )
        return run(cfg)
    except (SchedulingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return getattr(e, "exit_code", 2) if isinstance(e, SchedulingError) else 2


if __name__ == "__main__":
    sys.exit(main())
