# model/linkmodel.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike

from config.settings import SETTINGS
from utils.errors import NegativePower

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

LN2 = math.log(2.0)
TWO_LN2 = 2.0 * LN2


@dataclass(frozen=True)
class GainContext:
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"channel power gain must be finite and > 0, got {self.h!r}")


def _exp2r(r):
    # 2^{2r} as e^{2r ln 2}
    return np.exp(TWO_LN2 * np.asarray(r, dtype=float))


def power_of_rate(r: ArrayLike, h: ArrayLike):
    """
    Power needed to sustain rate r (bits per unit bandwidth) at power gain h:
        g(r) = (2^{2r} - 1) / h

    Works elementwise on arrays and is evaluated as written for negative r.
    """
    r = np.asarray(r, dtype=float)
    out = np.expm1(TWO_LN2 * r) / np.asarray(h, dtype=float)
    return float(out) if out.ndim == 0 else out


def rate_of_power(p: ArrayLike, h: ArrayLike):
    """
    Inverse of power_of_rate: r = 1/2 log2(1 + h p).

    Raises NegativePower if any p < 0.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise NegativePower(f"rate_of_power: power must be >= 0, got {p!r}")
    out = np.log1p(np.asarray(h, dtype=float) * p) / TWO_LN2
    return float(out) if out.ndim == 0 else out


def power_derivatives(r: ArrayLike, h: ArrayLike) -> Tuple:
    """
    Analytic derivatives of g at r:
        g'(r)  = (2 ln 2) 2^{2r} / h
        g''(r) = (2 ln 2)^2 2^{2r} / h
    """
    e = _exp2r(r) / np.asarray(h, dtype=float)
    d1 = TWO_LN2 * e
    d2 = TWO_LN2 * d1
    if d1.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def min_energy_per_bit(h: float) -> float:
    """Infimum of g(r)/r over r > 0, reached only in the limit r -> 0+."""
    GainContext(h)
    return TWO_LN2 / h


if __name__ == "__main__":
    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    for r, h in [(0.0, 5.0), (1.0, 1.0), (0.5, 2.0)]:
        p = power_of_rate(r, h)
        print(f"g({r}; h={h}) = {p:.6f}  back -> {rate_of_power(p, h):.6f}  g' g'' = {power_derivatives(r, h)}")
    print(f"min energy per bit at h=1: {min_energy_per_bit(1.0):.6f}")
