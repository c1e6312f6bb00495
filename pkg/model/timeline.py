# model/timeline.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.settings import SETTINGS
from utils.errors import NoData, NoGain

logger = logging.getLogger(__name__)
logger.setLevel(getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))

EventKind = Literal["harvest", "data", "channel"]


class Event(BaseModel):
    """One harvest (J), data arrival (bits) or channel change (power gain) at `time` seconds."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    time: float = Field(alias="t")
    kind: EventKind
    value: float

    @field_validator("time")
    @classmethod
    def _time_ok(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"event time must be finite and >= 0, got {v!r}")
        return v

    @field_validator("value")
    @classmethod
    def _value_ok(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"event value must be finite and > 0, got {v!r}")
        return v


@dataclass(frozen=True, eq=False)
class EventTimeline:
    """
    Merged, sorted event sequence. Index i (0-based) refers to the event at t[i]
    and to the epoch starting there; the epoch after t[-1] is unbounded.

      t:          distinct event times, t[0] == 0
      xi:         finite epoch lengths t[i+1] - t[i]  (len m-1)
      h:          power gain in force during epoch i  (len m)
      harvest:    energy harvested at t[i]            (len m)
      data:       bits arriving at t[i]               (len m)
      cum_energy: E(t[i]),  cum_data: B(t[i])
      w_data:     time of the last data arrival
    """
    events: Tuple[Event, ...]
    t: np.ndarray
    xi: np.ndarray
    h: np.ndarray
    harvest: np.ndarray
    data: np.ndarray
    cum_energy: np.ndarray
    cum_data: np.ndarray
    w_data: float

    @property
    def epoch_count(self) -> int:
        return int(self.t.size)

    @property
    def total_energy(self) -> float:
        return float(self.cum_energy[-1])

    @property
    def total_data(self) -> float:
        return float(self.cum_data[-1])

    @property
    def last_gain(self) -> float:
        return float(self.h[-1])

    @property
    def last_event_time(self) -> float:
        return float(self.t[-1])


EventLike = Union[Event, Mapping[str, object]]


def build_timeline(events: Iterable[EventLike], initial_gain: Optional[float] = None) -> EventTimeline:
    """
    Sort and merge events into an EventTimeline.

    Inputs:
        events:       Event objects (or dicts with t/kind/value)
        initial_gain: channel gain at t=0 when no channel event sits at t=0

    Output:
        EventTimeline with an epoch boundary at every distinct event time and t[0] == 0.
        Same-time events merge: harvests and data are summed, the last channel value
        (by input order) wins.

    Raises NoData when no bits arrive, NoGain when the gain at t=0 is undefined.
    """
    evs: List[Event] = [e if isinstance(e, Event) else Event.model_validate(e) for e in events]

    if sum(e.value for e in evs if e.kind == "data") <= 0:
        raise NoData("build_timeline: instance carries no data to transmit")

    # stable sort keeps input order among same-time events
    evs_sorted = sorted(evs, key=lambda e: e.time)

    times: List[float] = [0.0]
    harvest: List[float] = [0.0]
    data: List[float] = [0.0]
    channel: List[Optional[float]] = [None]
    for e in evs_sorted:
        if e.time != times[-1]:
            times.append(e.time)
            harvest.append(0.0)
            data.append(0.0)
            channel.append(None)
        if e.kind == "harvest":
            harvest[-1] += e.value
        elif e.kind == "data":
            data[-1] += e.value
        else:
            channel[-1] = e.value

    if channel[0] is None:
        if initial_gain is None:
            raise NoGain("build_timeline: no channel gain at t=0 and no initial_gain given")
        if not (math.isfinite(initial_gain) and initial_gain > 0):
            raise NoGain(f"build_timeline: initial_gain must be finite and > 0, got {initial_gain!r}")
        channel[0] = float(initial_gain)

    gains: List[float] = []
    for c in channel:
        gains.append(c if c is not None else gains[-1])

    canonical: List[Event] = []
    for i, ti in enumerate(times):
        if harvest[i] > 0:
            canonical.append(Event(time=ti, kind="harvest", value=harvest[i]))
        if data[i] > 0:
            canonical.append(Event(time=ti, kind="data", value=data[i]))
        if channel[i] is not None:
            canonical.append(Event(time=ti, kind="channel", value=channel[i]))

    t = np.asarray(times, dtype=float)
    data_arr = np.asarray(data, dtype=float)
    w_data = float(t[np.flatnonzero(data_arr > 0)[-1]])

    tl = EventTimeline(
        events=tuple(canonical),
        t=t,
        xi=np.diff(t),
        h=np.asarray(gains, dtype=float),
        harvest=np.asarray(harvest, dtype=float),
        data=data_arr,
        cum_energy=np.cumsum(harvest),
        cum_data=np.cumsum(data_arr),
        w_data=w_data,
    )
    logger.debug(f"build_timeline: {len(evs)} events -> {tl.epoch_count} epochs, W_data={w_data}")
    return tl


def _index_at(tl: EventTimeline, t: float) -> int:
    if not t >= 0:
        raise ValueError(f"time must be >= 0, got {t!r}")
    return int(np.searchsorted(tl.t, t, side="right")) - 1


def cumulative_energy(tl: EventTimeline, t: float) -> float:
    """E(t): energy harvested at or before t (right-continuous)."""
    return float(tl.cum_energy[_index_at(tl, t)])


def cumulative_data(tl: EventTimeline, t: float) -> float:
    """B(t): bits arrived at or before t (right-continuous)."""
    return float(tl.cum_data[_index_at(tl, t)])


def epoch_index_and_kstar(tl: EventTimeline, T: float) -> Tuple[int, float]:
    """
    k* = number of whole epochs inside [0, T]; residual = T - t_{k*+1} is the
    used part of the epoch that T falls in (the last epoch is unbounded).
    """
    if not T > 0:
        raise ValueError(f"deadline must be > 0, got {T!r}")
    kstar = int(np.searchsorted(tl.t[1:], T, side="right"))
    return kstar, float(T - tl.t[kstar])


if __name__ == "__main__":
    logging.basicConfig(level=getattr(logging, SETTINGS.LOG_LEVEL.upper(), logging.INFO))
    demo = build_timeline(
        [
            {"t": 0, "kind": "harvest", "value": 2.0},
            {"t": 0, "kind": "data", "value": 1.0},
            {"t": 1, "kind": "harvest", "value": 3.0},
            {"t": 1.5, "kind": "channel", "value": 4.0},
            {"t": 2, "kind": "data", "value": 4.0},
        ],
        initial_gain=1.0,
    )
    print(f"t={demo.t} xi={demo.xi} h={demo.h}")
    print(f"E(1)={cumulative_energy(demo, 1.0)} B(1.9)={cumulative_data(demo, 1.9)} k*(2.5)={epoch_index_and_kstar(demo, 2.5)}")
