# solvers/objective.py
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np
from numpy.typing import ArrayLike

from config.settings import SETTINGS
from model.linkmodel import power_derivatives, power_of_rate
from model.timeline import EventTimeline, cumulative_data, epoch_index_and_kstar
from utils.errors import DeadlineBeforeData, DimensionMismatch

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))


@dataclass(frozen=True, eq=False)
class PenaltyWeights:
    """Per-constraint scale factors: w_energy[k], w_data[k], w_eq, w_rate."""
    w_energy: np.ndarray
    w_data: np.ndarray
    w_eq: float
    w_rate: float = 1.0

    @classmethod
    def scaled(cls, energy_budget: np.ndarray, data_budget: np.ndarray, bits_due: float) -> "PenaltyWeights":
        # 1/max(budget,1)^2 keeps every term dimensionless
        return cls(
            w_energy=1.0 / np.maximum(energy_budget, 1.0) ** 2,
            w_data=1.0 / np.maximum(data_budget, 1.0) ** 2,
            w_eq=1.0 / max(bits_due, 1.0) ** 2,
        )

    @classmethod
    def unit(cls, n: int) -> "PenaltyWeights":
        return cls(w_energy=np.ones(n), w_data=np.ones(n), w_eq=1.0)


@dataclass(frozen=True, eq=False)
class Derivatives:
    value: float
    grad: np.ndarray
    hess: Optional[np.ndarray]
    objective: float
    penalty: float   # weighted P(r), not multiplied by mu


@dataclass(frozen=True, eq=False)
class PenaltyProblem:
    """
    Frozen unconstrained subproblem for deadline T:

        F(r) = sum_i g_i(r_i) d_i + mu * P(r)

    over n = k*+1 rates. energy_budget[k] = E(t_k) and data_budget[k] = B(t_k)
    are the budgets available when epoch k starts.
    """
    timeline: EventTimeline
    T: float
    kstar: int
    residual: float
    durations: np.ndarray
    gains: np.ndarray
    energy_budget: np.ndarray
    data_budget: np.ndarray
    BT: float
    weights: PenaltyWeights
    mu: float

    @property
    def n(self) -> int:
        return self.kstar + 1

    @property
    def scale(self) -> float:
        """Magnitude used for feasibility verdicts."""
        return max(1.0, self.BT, float(self.energy_budget[-1]))

    def with_mu(self, mu: float) -> "PenaltyProblem":
        if not mu > 0:
            raise ValueError(f"mu must be > 0, got {mu!r}")
        return replace(self, mu=float(mu))

    def evaluate(self, r: ArrayLike, order: int = 2) -> Derivatives:
        return evaluate(self, r, order=order)


def make_problem(
    tl: EventTimeline,
    T: float,
    mu: float = 1.0,
    weights: Optional[PenaltyWeights] = None,
) -> PenaltyProblem:
    """
    Freeze the penalty subproblem for deadline T.

    Raises DeadlineBeforeData if T precedes the last data arrival.
    """
    if not T > 0:
        raise ValueError(f"make_problem: deadline must be > 0, got {T!r}")
    if not mu > 0:
        raise ValueError(f"make_problem: mu must be > 0, got {mu!r}")
    if T < tl.w_data:
        raise DeadlineBeforeData(T, tl.w_data)

    kstar, residual = epoch_index_and_kstar(tl, T)
    n = kstar + 1
    durations = np.append(tl.xi[:kstar], residual)
    energy_budget = tl.cum_energy[:n].copy()
    data_budget = tl.cum_data[:n].copy()
    BT = cumulative_data(tl, T)

    if weights is None:
        weights = PenaltyWeights.scaled(energy_budget, data_budget, BT)
    elif weights.w_energy.size != n or weights.w_data.size != n:
        raise DimensionMismatch(f"make_problem: weights sized for {weights.w_energy.size} epochs, need {n}")

    return PenaltyProblem(
        timeline=tl,
        T=float(T),
        kstar=kstar,
        residual=residual,
        durations=durations,
        gains=tl.h[:n].copy(),
        energy_budget=energy_budget,
        data_budget=data_budget,
        BT=BT,
        weights=weights,
        mu=float(mu),
    )


def _check_dims(pp: PenaltyProblem, r: ArrayLike) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (pp.n,):
        raise DimensionMismatch(f"rate vector has shape {r.shape}, expected ({pp.n},)")
    return r


def _suffix_sum(a: np.ndarray) -> np.ndarray:
    return np.cumsum(a[::-1])[::-1]


def evaluate(pp: PenaltyProblem, r: ArrayLike, order: int = 2) -> Derivatives:
    """
    Value, gradient (order >= 1) and Hessian (order == 2) of F at r.

    Squared hinges contribute 1{violation > 0} to the second derivative;
    the completion term is a plain two-sided square.
    """
    r = _check_dims(pp, r)
    d = pp.durations
    w = pp.weights
    n = pp.n

    g = power_of_rate(r, pp.gains) * d
    objective = float(np.sum(g))

    viol_r = np.maximum(0.0, -r)
    viol_e = np.maximum(0.0, np.cumsum(g) - pp.energy_budget)
    viol_b = np.maximum(0.0, np.cumsum(r * d) - pp.data_budget)
    mismatch = float(np.dot(r, d) - pp.BT)

    penalty = float(
        w.w_rate * np.dot(viol_r, viol_r)
        + np.dot(w.w_energy, viol_e ** 2)
        + np.dot(w.w_data, viol_b ** 2)
        + w.w_eq * mismatch ** 2
    )
    value = objective + pp.mu * penalty

    if order == 0:
        return Derivatives(value=value, grad=np.empty(0), hess=None, objective=objective, penalty=penalty)

    mu = pp.mu
    g1, g2 = power_derivatives(r, pp.gains)
    u = g1 * d                                   # d/dr_i of epoch-i energy
    tail_e = _suffix_sum(2.0 * w.w_energy * viol_e)
    tail_b = _suffix_sum(2.0 * w.w_data * viol_b)

    grad = u + mu * (
        -2.0 * w.w_rate * viol_r
        + tail_e * u
        + tail_b * d
        + 2.0 * w.w_eq * mismatch * d
    )

    hess = None
    if order >= 2:
        idx = np.maximum.outer(np.arange(n), np.arange(n))
        active_e = _suffix_sum(2.0 * w.w_energy * (viol_e > 0))[idx]
        active_b = _suffix_sum(2.0 * w.w_data * (viol_b > 0))[idx]
        hess = mu * (
            active_e * np.outer(u, u)
            + active_b * np.outer(d, d)
            + 2.0 * w.w_eq * np.outer(d, d)
        )
        diag = g2 * d + mu * (2.0 * w.w_rate * (r < 0) + tail_e * g2 * d)
        hess[np.diag_indices(n)] += diag
        hess = 0.5 * (hess + hess.T)

    return Derivatives(value=value, grad=grad, hess=hess, objective=objective, penalty=penalty)


def constraint_residuals(pp: PenaltyProblem, r: ArrayLike) -> Dict[str, object]:
    """
    Unweighted signed constraint violations at r.

    Output:
      {
        "min_rate": float,
        "energy_slack": np.ndarray,    # sum_{i<=k} g(r_i) d_i - E(t_k), >0 means violated
        "data_slack": np.ndarray,      # sum_{i<=k} r_i d_i - B(t_k)
        "equality_mismatch": float,    # sum r_i d_i - B(T), <0 means under-delivery
        "max_violation": float,
      }
    """
    r = _check_dims(pp, r)
    d = pp.durations
    energy_slack = np.cumsum(power_of_rate(r, pp.gains) * d) - pp.energy_budget
    data_slack = np.cumsum(r * d) - pp.data_budget
    mismatch = float(np.dot(r, d) - pp.BT)
    min_rate = float(np.min(r))
    max_violation = max(
        0.0,
        -min_rate,
        float(np.max(energy_slack)),
        float(np.max(data_slack)),
        abs(mismatch),
    )
    return {
        "min_rate": min_rate,
        "energy_slack": energy_slack,
        "data_slack": data_slack,
        "equality_mismatch": mismatch,
        "max_violation": max_violation,
    }


if __name__ == "__main__":
    from model.timeline import build_timeline

    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    tl = build_timeline(
        [{"t": 0, "kind": "harvest", "value": 3.0}, {"t": 0, "kind": "data", "value": 1.0}],
        initial_gain=1.0,
    )
    pp = make_problem(tl, 1.0, mu=1.0, weights=PenaltyWeights.unit(1))
    for rate in (1.0, 2.0):
        out = evaluate(pp, [rate])
        print(f"r={rate}: F={out.value} objective={out.objective} P={out.penalty} grad={out.grad} hess={out.hess}")
    print(constraint_residuals(pp, [2.0]))
