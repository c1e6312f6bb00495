# solvers/sumt.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Union

import numpy as np

from config.settings import SETTINGS
from model.timeline import EventTimeline, cumulative_data, epoch_index_and_kstar
from solvers.newton import NewtonConfig, minimize
from solvers.objective import PenaltyProblem, constraint_residuals, evaluate, make_problem
from utils.errors import DeadlineBeforeData
from utils.trace import TraceRecorder

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

Mu0 = Union[float, Literal["auto"]]


def _default_mu0() -> Mu0:
    return "auto" if SETTINGS.MU0 == "auto" else float(SETTINGS.MU0)


@dataclass(frozen=True)
class SumtConfig:
    mu0: Mu0 = field(default_factory=_default_mu0)
    eta: float = SETTINGS.ETA
    eps_sumt: float = SETTINGS.EPS_SUMT
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    feas_tol: float = SETTINGS.FEAS_TOL

    def __post_init__(self):
        if self.mu0 != "auto" and not (isinstance(self.mu0, (int, float)) and self.mu0 > 0):
            raise ValueError(f"mu0 must be 'auto' or a positive number, got {self.mu0!r}")
        if not self.eta > 1:
            raise ValueError("eta must be > 1")
        if not self.eps_sumt > 0:
            raise ValueError("eps_sumt must be > 0")
        if not self.feas_tol > 0:
            raise ValueError("feas_tol must be > 0")


@dataclass(frozen=True, eq=False)
class SumtResult:
    T: float
    r: np.ndarray
    durations: np.ndarray
    energy: float
    sumt_iters: int
    newton_steps: List[int]
    max_violation: float
    feasible: bool
    mu0: float
    mu_final: float
    penalty_history: List[float]
    violation_history: List[float]
    newton_converged: bool


def sumt_iteration_bound(mu0: float, eta: float, eps_sumt: float) -> int:
    """ceil(log(1/(mu0 eps_S)) / log eta), at least one solve."""
    return max(1, math.ceil(math.log(1.0 / (mu0 * eps_sumt)) / math.log(eta)))


def initial_point(tl: EventTimeline, T: float) -> np.ndarray:
    """All data at the constant rate B(T)/T over every epoch touched by [0, T]."""
    if T < tl.w_data:
        raise DeadlineBeforeData(T, tl.w_data)
    kstar, _ = epoch_index_and_kstar(tl, T)
    return np.full(kstar + 1, cumulative_data(tl, T) / T)


def auto_mu0(pp: PenaltyProblem, r0: np.ndarray) -> float:
    """mu0 making objective and weighted penalty commensurate at r0 (never below 1)."""
    at = evaluate(pp, r0, order=0)
    return max(1.0, at.objective / max(at.penalty, 1e-12))


def solve_min_energy(
    tl: EventTimeline,
    T: float,
    cfg: Optional[SumtConfig] = None,
    trace: Optional[TraceRecorder] = None,
) -> SumtResult:
    """
    Minimum-energy schedule for deadline T by exterior penalty.

    Starts from the constant-rate point, solves the Newton subproblem,
    multiplies mu by eta and warm-starts from the previous result until
    1/mu <= eps_S. The verdict is feasible when the largest unweighted
    violation is within feas_tol * scale.
    """
    cfg = cfg or SumtConfig()
    pp = make_problem(tl, T)
    r = initial_point(tl, T)
    mu = auto_mu0(pp, r) if cfg.mu0 == "auto" else float(cfg.mu0)
    mu0 = mu

    newton_steps: List[int] = []
    penalty_history: List[float] = []
    violation_history: List[float] = []
    all_converged = True
    iters = 0
    while True:
        pp = pp.with_mu(mu)
        res = minimize(pp, r, cfg.newton, trace=trace)
        r = res.r
        iters += 1
        newton_steps.append(res.steps)
        all_converged = all_converged and res.converged

        at = evaluate(pp, r, order=0)
        max_violation = float(constraint_residuals(pp, r)["max_violation"])
        penalty_history.append(at.penalty)
        violation_history.append(max_violation)
        logger.debug(
            f"solve_min_energy: T={T:.6g} iter {iters} mu={mu:.3e} F={at.value:.10g} "
            f"objective={at.objective:.10g} max_violation={max_violation:.3e} newton={res.steps}"
        )
        if trace is not None:
            trace.record("sumt", iters, mu=mu, T=T, F=at.value, objective=at.objective,
                         max_violation=max_violation, newton_steps=res.steps)

        mu *= cfg.eta
        if mu * cfg.eps_sumt >= 1.0:
            break

    feasible = max_violation <= cfg.feas_tol * pp.scale
    if not all_converged:
        logger.warning(f"solve_min_energy: T={T:.6g} had Newton subproblems stop before eps_newton")
    logger.info(
        f"solve_min_energy: T={T:.6g} energy={at.objective:.10g} max_violation={max_violation:.3e} "
        f"feasible={feasible} sumt_iters={iters} newton_steps={sum(newton_steps)}"
    )
    return SumtResult(
        T=float(T),
        r=r,
        durations=pp.durations.copy(),
        energy=at.objective,
        sumt_iters=iters,
        newton_steps=newton_steps,
        max_violation=max_violation,
        feasible=feasible,
        mu0=mu0,
        mu_final=pp.mu,
        penalty_history=penalty_history,
        violation_history=violation_history,
        newton_converged=all_converged,
    )


if __name__ == "__main__":
    from model.timeline import build_timeline

    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    tl = build_timeline(
        [{"t": 0, "kind": "harvest", "value": 3.0}, {"t": 0, "kind": "data", "value": 1.0}],
        initial_gain=1.0,
    )
    for deadline in (1.0, 0.4):
        out = solve_min_energy(tl, deadline, SumtConfig(mu0=1.0))
        print(f"T={deadline}: r={out.r} energy={out.energy:.6f} feasible={out.feasible} iters={out.sumt_iters}")
