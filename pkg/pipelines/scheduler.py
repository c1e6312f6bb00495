# pipelines/scheduler.py
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from config.settings import SETTINGS
from model.linkmodel import min_energy_per_bit, power_of_rate
from model.timeline import EventTimeline
from solvers.sumt import SumtConfig, SumtResult, solve_min_energy, sumt_iteration_bound
from utils.errors import BoundSearchExhausted, Infeasible
from utils.trace import TraceRecorder

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

NEWTON_BOUND_NOT_COMPUTED = "not computed"


@dataclass(frozen=True)
class ScheduleConfig:
    eps_bisect: float = SETTINGS.EPS_BISECT
    sumt: SumtConfig = field(default_factory=SumtConfig)
    max_bound_extensions: int = SETTINGS.MAX_BOUND_EXTENSIONS

    def __post_init__(self):
        if not self.eps_bisect > 0:
            raise ValueError("eps_bisect must be > 0")
        if self.max_bound_extensions < 1:
            raise ValueError("max_bound_extensions must be >= 1")


@dataclass(frozen=True, eq=False)
class Schedule:
    """Constant rate per epoch over [0, T]; powers are g(rate) at the epoch's gain."""
    rates: np.ndarray
    durations: np.ndarray
    starts: np.ndarray
    gains: np.ndarray
    powers: np.ndarray
    T: float
    consumed_energy: float

    @property
    def sent_bits(self) -> float:
        return float(np.dot(self.rates, self.durations))


class SolveReport(BaseModel):
    T: float
    feasible: bool
    bisections: int
    bound_evaluations: int
    T_lo0: float
    T_hi0: float
    sumt_iterations: List[int]
    newton_steps_total: int
    newton_steps_max: int
    bisection_bound: int
    sumt_iteration_bound: int
    newton_step_bound: str = NEWTON_BOUND_NOT_COMPUTED
    hessian_dim: int
    final_max_violation: float
    wall_time_s: Optional[float] = None
    steps: List[str] = []


@dataclass(frozen=True, eq=False)
class BoundSearch:
    lo: float
    hi: float
    hi_result: SumtResult
    evaluations: List[SumtResult]
    steps: List[str]


def schedule_from_result(tl: EventTimeline, res: SumtResult, feas_tol: float) -> Schedule:
    """
    Presentation form of a SUMT result: drops a trailing zero-length epoch
    and clamps rates below feas_tol to 0.
    """
    n = res.r.size
    if n > 1 and res.durations[-1] == 0.0:
        n -= 1
    rates = np.where(res.r[:n] < feas_tol, 0.0, res.r[:n])
    durations = res.durations[:n].copy()
    gains = tl.h[:n].copy()
    powers = np.asarray(power_of_rate(rates, gains), dtype=float).reshape(n)
    return Schedule(
        rates=rates,
        durations=durations,
        starts=tl.t[:n].copy(),
        gains=gains,
        powers=powers,
        T=res.T,
        consumed_energy=float(np.dot(powers, durations)),
    )


def check_global_feasibility(tl: EventTimeline) -> bool:
    """
    Necessary condition checked before any search. Every bit costs more than
    2 ln 2 / h joules, and bits can only leave in epochs that end after the
    first data arrival, so the best gain among those epochs gives a floor:
    E_total > B_total * 2 ln 2 / h_best (strict, the floor is never attained).

    Passing this check does not prove feasibility when the best gain comes
    before the last event; find_bounds settles those instances. When even the
    unbounded last epoch suffices (E_total > B_total * 2 ln 2 / h_last) the
    instance is feasible for a large enough deadline.
    """
    first_data = float(tl.t[np.flatnonzero(tl.data > 0)[0]])
    ends = np.append(tl.t[1:], np.inf)
    h_best = float(np.max(tl.h[ends > first_data]))
    needed = tl.total_data * min_energy_per_bit(h_best)
    if not tl.total_energy > needed:
        raise Infeasible(
            tl.total_energy,
            needed,
            f"instance infeasible: {tl.total_energy!r} J harvested in total, "
            f"but sending {tl.total_data!r} bits at the best gain {h_best!r} needs more than {needed!r} J",
        )
    limit = tl.total_data * min_energy_per_bit(tl.last_gain)
    if not tl.total_energy > limit:
        logger.warning(
            f"check_global_feasibility: {tl.total_energy!r} J is not enough for the last epoch alone "
            f"(needs more than {limit!r} J); feasibility rests on epochs before t={tl.last_event_time!r}"
        )
    return True


def _bound_candidates(tl: EventTimeline, max_extensions: int) -> Iterator[Tuple[float, bool]]:
    """Yields (candidate deadline, is_extension) starting at the end of the last data epoch."""
    m = tl.epoch_count
    j = int(np.searchsorted(tl.t, tl.w_data, side="left"))
    for i in range(j + 1, m):
        yield float(tl.t[i]), False
    anchor = tl.last_event_time
    step = float(tl.xi[-1]) if tl.xi.size else 1.0
    for k in range(max_extensions):
        yield anchor + step * 2.0 ** k, True


def find_bounds(
    tl: EventTimeline,
    cfg: Optional[ScheduleConfig] = None,
    trace: Optional[TraceRecorder] = None,
) -> BoundSearch:
    """
    Walk epoch-end candidates from the last data arrival until SUMT says
    feasible. lo is the last infeasible candidate (or the last data arrival
    time), hi the first feasible one.
    """
    cfg = cfg or ScheduleConfig()
    lo = tl.w_data
    evaluations: List[SumtResult] = []
    steps: List[str] = []
    for T, is_ext in _bound_candidates(tl, cfg.max_bound_extensions):
        res = solve_min_energy(tl, T, cfg.sumt, trace=trace)
        evaluations.append(res)
        verdict = "feasible" if res.feasible else "infeasible"
        steps.append(f"bound T={T:.9g} -> {verdict} (energy {res.energy:.6g} J, max violation {res.max_violation:.3e})")
        if trace is not None:
            trace.record("bound", len(evaluations), mu=res.mu_final, T=T, F=None, objective=res.energy,
                         max_violation=res.max_violation, newton_steps=sum(res.newton_steps))
        if is_ext:
            logger.warning(f"find_bounds: past the last event, extension candidate T={T:.6g} is {verdict}")
        if res.feasible:
            return BoundSearch(lo=lo, hi=T, hi_result=res, evaluations=evaluations, steps=steps)
        lo = T
    raise BoundSearchExhausted(
        f"find_bounds: no feasible deadline after {cfg.max_bound_extensions} extensions past t={tl.last_event_time!r}"
    )


def solve_min_time(
    tl: EventTimeline,
    cfg: Optional[ScheduleConfig] = None,
    trace: Optional[TraceRecorder] = None,
) -> Tuple[Schedule, SolveReport]:
    """
    Minimum completion time: bracket T, then bisect. A feasible midpoint
    becomes the new upper bound, an infeasible one the new lower bound.
    The returned schedule is the SUMT solution at the final upper bound.
    """
    cfg = cfg or ScheduleConfig()
    started = time.perf_counter()
    check_global_feasibility(tl)

    bounds = find_bounds(tl, cfg, trace=trace)
    lo, hi, best = bounds.lo, bounds.hi, bounds.hi_result
    evaluations = list(bounds.evaluations)
    steps = list(bounds.steps)

    width = hi - lo
    bisect_bound = max(0, math.ceil(math.log2(width / cfg.eps_bisect))) if width > 0 else 0
    bisections = 0
    for _ in range(bisect_bound):
        if hi - lo <= cfg.eps_bisect:
            break
        mid = 0.5 * (lo + hi)
        res = solve_min_energy(tl, mid, cfg.sumt, trace=trace)
        evaluations.append(res)
        bisections += 1
        if res.feasible:
            hi, best = mid, res
        else:
            lo = mid
        steps.append(f"bisect {bisections}: T={mid:.9g} -> {'feasible' if res.feasible else 'infeasible'} [{lo:.9g}, {hi:.9g}]")
        if trace is not None:
            trace.record("bisect", bisections, mu=res.mu_final, T=mid, objective=res.energy,
                         max_violation=res.max_violation, newton_steps=sum(res.newton_steps))

    schedule = schedule_from_result(tl, best, cfg.sumt.feas_tol)
    all_newton = [s for ev in evaluations for s in ev.newton_steps]
    report = SolveReport(
        T=hi,
        feasible=best.feasible,
        bisections=bisections,
        bound_evaluations=len(bounds.evaluations),
        T_lo0=bounds.lo,
        T_hi0=bounds.hi,
        sumt_iterations=[ev.sumt_iters for ev in evaluations],
        newton_steps_total=int(sum(all_newton)),
        newton_steps_max=int(max(all_newton)),
        bisection_bound=bisect_bound,
        sumt_iteration_bound=sumt_iteration_bound(best.mu0, cfg.sumt.eta, cfg.sumt.eps_sumt),
        hessian_dim=int(best.r.size),
        final_max_violation=best.max_violation,
        wall_time_s=time.perf_counter() - started,
        steps=steps,
    )
    logger.info(
        f"solve_min_time: T={hi:.9g} energy={schedule.consumed_energy:.6g} "
        f"bisections={bisections}/{bisect_bound} evaluations={len(evaluations)}"
    )
    return schedule, report


def solve_min_energy_schedule(
    tl: EventTimeline,
    T: float,
    cfg: Optional[ScheduleConfig] = None,
    trace: Optional[TraceRecorder] = None,
) -> Tuple[Schedule, SumtResult, float]:
    """Single-deadline counterpart used by the min-energy verb. Returns (schedule, result, wall time)."""
    cfg = cfg or ScheduleConfig()
    started = time.perf_counter()
    res = solve_min_energy(tl, T, cfg.sumt, trace=trace)
    return schedule_from_result(tl, res, cfg.sumt.feas_tol), res, time.perf_counter() - started


if __name__ == "__main__":
    from model.timeline import build_timeline

    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    tl = build_timeline(
        [
            {"t": 0, "kind": "harvest", "value": 3.0},
            {"t": 1, "kind": "harvest", "value": 3.0},
            {"t": 0, "kind": "data", "value": 2.0},
        ],
        initial_gain=1.0,
    )
    sched, rep = solve_min_time(tl)
    print(f"T={sched.T:.6f} rates={sched.rates} energy={sched.consumed_energy:.6f}")
    for line in rep.steps:
        print("  ", line)
