# evaluators/grid_oracle.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from config.settings import SETTINGS
from model.timeline import EventTimeline
from utils.errors import DeadlineBeforeData, GridTooLarge, NoFeasibleGridPoint

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

_CHUNK_POINTS = 1 << 19


@dataclass(frozen=True)
class OracleConfig:
    grid_resolution: float = SETTINGS.GRID_STEP
    time_resolution: float = SETTINGS.EPS_BISECT
    max_dims: int = SETTINGS.GRID_MAX_DIMS
    # None: max(g'(r_max) step T, step T)
    causality_slack: Optional[float] = None

    def __post_init__(self):
        if not (self.grid_resolution > 0 and self.time_resolution > 0):
            raise ValueError("grid and time resolutions must be > 0")
        if self.max_dims < 1:
            raise ValueError("max_dims must be >= 1")
        if self.causality_slack is not None and not self.causality_slack >= 0:
            raise ValueError("causality_slack must be >= 0")


class GridOptimum(NamedTuple):
    rates: np.ndarray
    energy: float
    slack: float


def _g(r: np.ndarray, h) -> np.ndarray:
    return (np.power(2.0, 2.0 * r) - 1.0) / h


def _g_prime(r: float, h: float) -> float:
    return 2.0 * math.log(2.0) * math.pow(2.0, 2.0 * r) / h


def _inverse_g(p: float, h: float) -> float:
    return 0.5 * math.log2(1.0 + h * p)


def _deadline_layout(tl: EventTimeline, T: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """(durations, gains, E(start_k), B(start_k), B(T)) for the epochs touched by [0, T]."""
    starts: List[float] = [0.0]
    for t_next in tl.t[1:]:
        if t_next <= T:
            starts.append(float(t_next))
    ends = starts[1:] + [T]
    durations = np.array([b - a for a, b in zip(starts, ends)])
    n = len(starts)
    E = np.array([tl.harvest[tl.t <= s].sum() for s in starts])
    B = np.array([tl.data[tl.t <= s].sum() for s in starts])
    return durations, tl.h[:n].astype(float), E, B, float(tl.data[tl.t <= T].sum())


def grid_min_energy(tl: EventTimeline, T: float, cfg: Optional[OracleConfig] = None) -> GridOptimum:
    """
    Brute-force minimum energy for deadline T on a rate grid.

    Every rate with positive duration but the last is scanned over
    {0, step, 2 step, ...} up to the most any single epoch could use (total
    energy at the weakest gain, or all bits in that epoch). The last rate is
    fixed by the completion equality, zero-length epochs send nothing.
    A point is kept when every causality sum is within the grid slack
    max(g'(r_max) step T, step T), or cfg.causality_slack when set; ties go
    to the lexicographically smallest rate vector.

    Raises GridTooLarge beyond max_dims rates, NoFeasibleGridPoint when no
    grid point qualifies, DeadlineBeforeData when T precedes the last arrival.
    """
    if not T > 0:
        raise ValueError(f"grid_min_energy: deadline must be > 0, got {T!r}")
    if T < tl.w_data:
        raise DeadlineBeforeData(T, tl.w_data)
    cfg = cfg or OracleConfig()
    step = cfg.grid_resolution
    d, h, E_budget, B_budget, BT = _deadline_layout(tl, T)
    n = d.size
    if n > cfg.max_dims:
        raise GridTooLarge(f"grid_min_energy: {n} rate variables exceed max_dims={cfg.max_dims}")

    free = [i for i in range(n) if d[i] > 0]
    last, scanned = free[-1], free[:-1]
    h_min = float(np.min(h))
    E_total = float(tl.harvest.sum())
    r_max = {i: min(BT / d[i], _inverse_g(E_total / d[i], h_min)) for i in free}
    slack = cfg.causality_slack
    if slack is None:
        slack = max(_g_prime(max(r_max.values()), h_min) * step * T, step * T)

    axes = [np.arange(int(math.floor(r_max[i] / step)) + 1) * step for i in scanned]
    best_energy = math.inf
    best_rates: Optional[np.ndarray] = None

    def consider(block: np.ndarray) -> None:
        nonlocal best_energy, best_rates
        R = np.zeros((block.shape[0], n))
        for col, i in enumerate(scanned):
            R[:, i] = block[:, col]
        R[:, last] = (BT - R @ d) / d[last]
        spent = np.cumsum(_g(R, h) * d, axis=1)
        sent = np.cumsum(R * d, axis=1)
        ok = (
            (R[:, last] >= -step)
            & np.all(spent <= E_budget + slack, axis=1)
            & np.all(sent <= B_budget + slack, axis=1)
        )
        if not ok.any():
            return
        energy = np.where(ok, spent[:, -1], np.inf)
        k = int(np.argmin(energy))
        if energy[k] < best_energy:
            best_energy = float(energy[k])
            best_rates = R[k].copy()

    if not axes:
        consider(np.zeros((1, 0)))
    else:
        inner = int(np.prod([a.size for a in axes[1:]])) if len(axes) > 1 else 1
        rows = max(1, _CHUNK_POINTS // inner)
        for lo in range(0, axes[0].size, rows):
            mesh = np.meshgrid(axes[0][lo:lo + rows], *axes[1:], indexing="ij")
            consider(np.stack([m.ravel() for m in mesh], axis=1))

    if best_rates is None:
        raise NoFeasibleGridPoint(f"grid_min_energy: no grid point meets the constraints at T={T!r}")
    logger.debug(f"grid_min_energy: T={T} rates={best_rates} energy={best_energy:.9g} slack={slack:.3g}")
    return GridOptimum(rates=best_rates, energy=best_energy, slack=slack)


def grid_min_time(tl: EventTimeline, T_max: float, cfg: Optional[OracleConfig] = None) -> Tuple[float, GridOptimum]:
    """
    Scan deadlines W_data + j * time_resolution up to T_max and return the first
    one grid_min_energy can serve.
    """
    cfg = cfg or OracleConfig()
    j = 1
    while True:
        T = tl.w_data + j * cfg.time_resolution
        if T > T_max:
            raise NoFeasibleGridPoint(f"grid_min_time: nothing feasible up to T={T_max!r}")
        try:
            return T, grid_min_energy(tl, T, cfg)
        except NoFeasibleGridPoint:
            j += 1


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
    best = grid_min_energy(tl, 2.0)
    print(f"rates={best.rates} energy={best.energy:.6f} slack={best.slack:.4f}")
