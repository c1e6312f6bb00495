# tests/conftest.py
from __future__ import annotations

import json

import numpy as np
import pytest

from config.presets import paper_preset
from model.timeline import build_timeline


def harvest(t, v):
    return {"t": t, "kind": "harvest", "value": v}


def data(t, v):
    return {"t": t, "kind": "data", "value": v}


def channel(t, v):
    return {"t": t, "kind": "channel", "value": v}


@pytest.fixture
def single_epoch_tl():
    """E=3 J and B=1 bit at t=0, h=1: T_opt = 1 at rate 1."""
    return build_timeline([harvest(0, 3.0), data(0, 1.0)], initial_gain=1.0)


@pytest.fixture
def two_epoch_tl():
    """E=3 at t=0 and t=1, B=2 at t=0, h=1: T_opt = 2 at rates [1, 1]."""
    return build_timeline([harvest(0, 3.0), harvest(1, 3.0), data(0, 2.0)], initial_gain=1.0)


@pytest.fixture
def five_epoch_tl():
    return build_timeline(
        [
            harvest(0, 1.0),
            data(0, 1.0),
            harvest(0.7, 1.5),
            channel(1.2, 2.0),
            data(1.6, 0.8),
            harvest(2.1, 2.0),
        ],
        initial_gain=1.0,
    )


@pytest.fixture
def paper_cfg():
    return paper_preset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_instance(tmp_path):
    def _write(events, initial_gain=1.0, name="instance.json", **extra):
        path = tmp_path / name
        path.write_text(json.dumps({"initial_gain": initial_gain, "events": events, **extra}))
        return path
    return _write
