# evaluators/analytic_check.py
from __future__ import annotations

import logging
import math

from scipy.optimize import brentq

from config.settings import SETTINGS
from utils.errors import Infeasible

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))


def _energy_per_bit(r: float, h: float) -> float:
    # (2^{2r} - 1) / (h r), own evaluation
    return (math.pow(2.0, 2.0 * r) - 1.0) / (h * r)


def analytic_single_epoch_T(E: float, B: float, h: float) -> float:
    """
    Shortest time to send B bits with E joules at constant gain h, everything
    available at t=0: the optimal rate r* solves g(r)/r = E/B, and T = B/r*.

    Raises Infeasible unless E > B * 2 ln 2 / h.
    """
    floor = B * 2.0 * math.log(2.0) / h
    if not E > floor:
        raise Infeasible(E, floor)

    target = E / B

    def phi(r: float) -> float:
        return _energy_per_bit(r, h) - target

    lo = 1e-9
    while phi(lo) >= 0:  # only when E/B sits within ~1e-9 of the limit
        lo *= 0.5
        if lo < 1e-300:
            raise Infeasible(E, floor, f"analytic_single_epoch_T: E={E!r} too close to the limit {floor!r}")
    hi = 1.0
    while phi(hi) <= 0:
        hi *= 2.0
    r_star = brentq(phi, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    logger.debug(f"analytic_single_epoch_T: E={E} B={B} h={h} -> r*={r_star:.15g}")
    return B / r_star


if __name__ == "__main__":
    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    for args in [(3.0, 1.0, 1.0), (6.0, 2.0, 1.0)]:
        print(f"E, B, h = {args} -> T = {analytic_single_epoch_T(*args):.12f}")
