# evaluators/schedule_check.py
from __future__ import annotations

import logging
import math
from typing import Dict, List, Tuple

from config.settings import SETTINGS
from model.timeline import EventTimeline
from pipelines.scheduler import Schedule

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))


def _arrived(tl: EventTimeline, kind: str, t: float) -> float:
    return sum(e.value for e in tl.events if e.kind == kind and e.time <= t)


def _gain_at(tl: EventTimeline, t: float) -> float:
    gain = math.nan
    for e in tl.events:
        if e.kind == "channel" and e.time <= t:
            gain = e.value
    return gain


def _segments(tl: EventTimeline, start: float, dur: float) -> List[Tuple[float, float]]:
    """Split [start, start + dur) at every event time strictly inside it."""
    end = start + dur
    if dur <= 0.0:
        return [(start, end)]
    cuts = sorted({e.time for e in tl.events if start < e.time < end})
    edges = [start] + cuts + [end]
    return list(zip(edges[:-1], edges[1:]))


def validate_schedule(tl: EventTimeline, s: Schedule, tol: float) -> Dict[str, object]:
    """
    Re-derive causality and completion residuals of a schedule straight from
    the event list (plain-float arithmetic, no solver kernels). Rows are split
    at every event time they cover, so a row spanning a gain change is charged
    the gain in force on each piece.

    Output:
      {
        "passed": bool,
        "energy_excess": List[float],   # spent by end of interval k minus E(start_k)
        "data_excess": List[float],     # sent by end of interval k minus B(start_k)
        "completion_mismatch": float,   # sent minus B(T)
        "duration_mismatch": float,     # sum of durations minus T
        "contiguity_mismatch": float,   # largest gap/overlap between rows (incl. first start vs 0)
        "min_rate": float,
        "max_violation": float,
        "violations": List[str],
      }
    """
    rows = [(float(r), float(d), float(a)) for r, d, a in zip(s.rates, s.durations, s.starts)]
    violations: List[str] = []

    gaps: List[float] = []
    expected_start = 0.0
    for k, (_, dur, start) in enumerate(rows):
        gap = start - expected_start
        gaps.append(abs(gap))
        if abs(gap) > tol:
            where = "first row starts" if k == 0 else f"row {k + 1} starts"
            violations.append(f"{where} at t={start:.9g}, expected t={expected_start:.9g}")
        if dur < -tol:
            violations.append(f"row {k + 1} has negative duration {dur:.6g}")
        expected_start = start + dur
    contiguity = max(gaps, default=0.0)

    energy_excess: List[float] = []
    data_excess: List[float] = []
    spent = 0.0
    sent = 0.0
    total = 0.0
    for rate, dur, start in rows:
        for a, b in _segments(tl, start, dur):
            gain = _gain_at(tl, a)
            spent += (math.pow(2.0, 2.0 * rate) - 1.0) / gain * (b - a)
            sent += rate * (b - a)
            energy_excess.append(spent - _arrived(tl, "harvest", a))
            data_excess.append(sent - _arrived(tl, "data", a))
        total += dur

    completion = sent - _arrived(tl, "data", s.T)
    duration_mismatch = total - s.T
    min_rate = min((r for r, _, _ in rows), default=0.0)

    for k, v in enumerate(energy_excess):
        if v > tol:
            violations.append(f"energy causality violated in epoch {k + 1} by {v:.6g} J")
    for k, v in enumerate(data_excess):
        if v > tol:
            violations.append(f"data causality violated in epoch {k + 1} by {v:.6g} bits")
    if abs(completion) > tol:
        violations.append(f"completion mismatch {completion:.6g} bits")
    if abs(duration_mismatch) > tol:
        violations.append(f"durations sum to {total:.9g}, not T={s.T:.9g}")
    if min_rate < -tol:
        violations.append(f"negative rate {min_rate:.6g}")

    max_violation = max(
        [0.0, -min_rate, abs(completion), abs(duration_mismatch), contiguity] + energy_excess + data_excess
    )
    passed = not violations
    if not passed:
        logger.info(f"validate_schedule: failed with {len(violations)} violation(s): {violations[0]}")
    return {
        "passed": passed,
        "energy_excess": energy_excess,
        "data_excess": data_excess,
        "completion_mismatch": completion,
        "duration_mismatch": duration_mismatch,
        "contiguity_mismatch": contiguity,
        "min_rate": min_rate,
        "max_violation": max_violation,
        "violations": violations,
    }
