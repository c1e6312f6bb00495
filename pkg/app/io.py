# app/io.py
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.settings import SETTINGS
from model.timeline import Event, EventTimeline, build_timeline
from pipelines.scheduler import Schedule
from utils.errors import InstanceParseError
from utils.trace import TRACE_COLUMNS

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))


class InstanceFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    initial_gain: Optional[float] = None
    events: List[Event]
    bandwidth_hz: Optional[float] = Field(default=None, gt=0)

    @field_validator("initial_gain")
    @classmethod
    def _gain_ok(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError("initial_gain must be > 0")
        return v


@dataclass(frozen=True, eq=False)
class LoadedInstance:
    timeline: EventTimeline
    bandwidth_hz: Optional[float]
    source: InstanceFile


class ScheduleRow(BaseModel):
    epoch: int
    start: float
    duration: float
    rate: float
    rate_bps: Optional[float] = None
    power: float
    gain: float


class ResultFile(BaseModel):
    verb: str
    T: float
    consumed_energy: float
    feasible: bool
    bandwidth_hz: Optional[float] = None
    schedule: List[ScheduleRow]
    report: Dict[str, Any] = {}


def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InstanceParseError(f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"{path}: invalid JSON ({e})")


def parse_instance(raw: Any) -> LoadedInstance:
    """
    Validate an instance document and build its timeline. Data values are
    divided by bandwidth_hz so the solver works per unit bandwidth.
    """
    try:
        inst = InstanceFile.model_validate(raw)
    except ValidationError as e:
        raise InstanceParseError(f"invalid instance: {e}")
    events = inst.events
    if inst.bandwidth_hz:
        events = [
            e.model_copy(update={"value": e.value / inst.bandwidth_hz}) if e.kind == "data" else e
            for e in events
        ]
    return LoadedInstance(
        timeline=build_timeline(events, initial_gain=inst.initial_gain),
        bandwidth_hz=inst.bandwidth_hz,
        source=inst,
    )


def load_instance(path: Path) -> LoadedInstance:
    loaded = parse_instance(_read_json(path))
    logger.info(f"load_instance: {path} -> {loaded.timeline.epoch_count} epochs")
    return loaded


def schedule_rows(s: Schedule, bandwidth_hz: Optional[float] = None) -> List[ScheduleRow]:
    return [
        ScheduleRow(
            epoch=i + 1,
            start=float(s.starts[i]),
            duration=float(s.durations[i]),
            rate=float(s.rates[i]),
            rate_bps=float(s.rates[i]) * bandwidth_hz if bandwidth_hz else None,
            power=float(s.powers[i]),
            gain=float(s.gains[i]),
        )
        for i in range(s.rates.size)
    ]


def write_result(path: Path, result: ResultFile) -> None:
    text = json.dumps(result.model_dump(mode="json"), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")
    logger.info(f"write_result: wrote {path}")


def read_schedule(path: Path) -> Schedule:
    """Schedule back from a result file (rates per unit bandwidth)."""
    try:
        res = ResultFile.model_validate(_read_json(path))
    except ValidationError as e:
        raise InstanceParseError(f"invalid result file {path}: {e}")
    rows = res.schedule
    durations = np.array([row.duration for row in rows], dtype=float)
    powers = np.array([row.power for row in rows], dtype=float)
    return Schedule(
        rates=np.array([row.rate for row in rows], dtype=float),
        durations=durations,
        starts=np.array([row.start for row in rows], dtype=float),
        gains=np.array([row.gain for row in rows], dtype=float),
        powers=powers,
        T=res.T,
        consumed_energy=res.consumed_energy,
    )


def write_trace_csv(path: Path, rows: Iterable[Dict[str, object]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(TRACE_COLUMNS))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in TRACE_COLUMNS})
    logger.info(f"write_trace_csv: wrote {path}")
