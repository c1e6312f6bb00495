# solvers/newton.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config.settings import SETTINGS
from solvers.objective import Derivatives
from utils.errors import NonFiniteObjective, SingularHessian
from utils.trace import TraceRecorder

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

_MAX_LEVENBERG_RETRIES = 20
_MAX_BACKTRACKS = 60


class SupportsDerivatives(Protocol):
    def evaluate(self, r: ArrayLike, order: int = 2) -> Derivatives: ...


@dataclass(frozen=True)
class NewtonConfig:
    eps_newton: float = SETTINGS.EPS_NEWTON
    max_steps: int = SETTINGS.NEWTON_MAX_STEPS
    armijo_c: float = SETTINGS.ARMIJO_C
    backtrack_beta: float = SETTINGS.BACKTRACK_BETA
    levenberg_init: float = SETTINGS.LEVENBERG_INIT

    def __post_init__(self):
        if not self.eps_newton > 0:
            raise ValueError("eps_newton must be > 0")
        if not 0 < self.backtrack_beta < 1:
            raise ValueError("backtrack_beta must lie in (0, 1)")
        if not 0 < self.armijo_c < 0.5:
            raise ValueError("armijo_c must lie in (0, 0.5)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.levenberg_init > 0:
            raise ValueError("levenberg_init must be > 0")


@dataclass(frozen=True, eq=False)
class NewtonResult:
    r: np.ndarray
    steps: int
    final_decrement: float
    converged: bool
    value: float


def _finite(d: Derivatives) -> bool:
    return math.isfinite(d.value) and bool(np.all(np.isfinite(d.grad)))


def newton_direction(hess: np.ndarray, grad: np.ndarray, levenberg_init: float) -> Tuple[np.ndarray, float]:
    """
    Solve H @ delta = grad by Cholesky. When the factorization fails, retry
    with H + tau I, tau = levenberg_init * trace/n, growing 10x per retry.

    Returns (delta, tau used).
    """
    n = grad.size
    try:
        return cho_solve(cho_factor(hess, lower=True, check_finite=False), grad, check_finite=False), 0.0
    except LinAlgError:
        pass

    trace = float(np.trace(hess))
    tau = levenberg_init * (trace / n if trace > 0 else 1.0)
    eye = np.eye(n)
    for attempt in range(1, _MAX_LEVENBERG_RETRIES + 1):
        try:
            factor = cho_factor(hess + tau * eye, lower=True, check_finite=False)
            if attempt > 1:
                logger.warning(f"newton_direction: Levenberg tau escalated to {tau:.3e} after {attempt} retries")
            else:
                logger.debug(f"newton_direction: Levenberg tau={tau:.3e}")
            return cho_solve(factor, grad, check_finite=False), tau
        except LinAlgError:
            tau *= 10.0
    raise SingularHessian(f"newton_direction: Hessian not factorizable after {_MAX_LEVENBERG_RETRIES} Levenberg retries")


def minimize(
    pp: SupportsDerivatives,
    r0: ArrayLike,
    cfg: Optional[NewtonConfig] = None,
    trace: Optional[TraceRecorder] = None,
) -> NewtonResult:
    """
    Damped Newton on F = pp.evaluate.

    Each iteration solves H delta = grad, stops when the Newton decrement
    lambda = sqrt(grad . delta) <= eps_newton, and otherwise backtracks
    (Armijo) along -delta. A stalled line search or max_steps ends the
    run with converged=False.
    """
    cfg = cfg or NewtonConfig()
    r = np.array(r0, dtype=float)
    cur = pp.evaluate(r, order=2)
    if not _finite(cur):
        raise NonFiniteObjective(f"minimize: F or grad not finite at start point {r}")

    steps = 0
    lam = math.inf
    while True:
        delta, _ = newton_direction(cur.hess, cur.grad, cfg.levenberg_init)
        lam = math.sqrt(max(0.0, float(np.dot(cur.grad, delta))))
        if lam <= cfg.eps_newton:
            return NewtonResult(r=r, steps=steps, final_decrement=lam, converged=True, value=cur.value)
        if steps >= cfg.max_steps:
            logger.warning(f"minimize: max_steps={cfg.max_steps} reached with decrement {lam:.3e}")
            return NewtonResult(r=r, steps=steps, final_decrement=lam, converged=False, value=cur.value)

        # Armijo along -delta; slack is 1e-12 absolute up to |F| = 1, relative beyond
        slope = -lam * lam
        slack = 1e-12 * max(1.0, abs(cur.value))
        t = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            trial = r - t * delta
            f_trial = pp.evaluate(trial, order=0).value
            if math.isfinite(f_trial) and f_trial <= cur.value + cfg.armijo_c * t * slope + slack:
                accepted = True
                break
            t *= cfg.backtrack_beta
        if not accepted:
            logger.warning(f"minimize: line search stalled after {steps} step(s), decrement {lam:.3e}")
            return NewtonResult(r=r, steps=steps, final_decrement=lam, converged=False, value=cur.value)

        r = trial
        cur = pp.evaluate(r, order=2)
        if not _finite(cur):
            raise NonFiniteObjective(f"minimize: F or grad not finite at {r}")
        steps += 1
        logger.debug(f"minimize: step {steps} t={t:.3g} F={cur.value:.12g} decrement={lam:.3e}")
        if trace is not None:
            trace.record("newton", steps, mu=getattr(pp, "mu", None), T=getattr(pp, "T", None),
                         F=cur.value, objective=cur.objective, newton_steps=steps)


if __name__ == "__main__":
    from model.timeline import build_timeline
    from solvers.objective import make_problem

    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    tl = build_timeline(
        [{"t": 0, "kind": "harvest", "value": 3.0}, {"t": 0, "kind": "data", "value": 1.0}],
        initial_gain=1.0,
    )
    out = minimize(make_problem(tl, 1.0, mu=1e6), [1.5])
    print(f"r={out.r} steps={out.steps} decrement={out.final_decrement:.3e} converged={out.converged}")
