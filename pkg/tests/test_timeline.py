import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import channel, data, harvest
from model.timeline import (
    Event,
    build_timeline,
    cumulative_data,
    cumulative_energy,
    epoch_index_and_kstar,
)
from utils.errors import NoData, NoGain


def test_two_harvests_make_two_epochs():
    tl = build_timeline([harvest(0, 2.0), harvest(1, 3.0), data(0, 1.0)], initial_gain=1.0)
    assert tl.epoch_count == 2
    np.testing.assert_array_equal(tl.t, [0.0, 1.0])
    np.testing.assert_array_equal(tl.xi, [1.0])


def test_same_time_events_merge():
    tl = build_timeline([data(0, 1.0), harvest(0, 3.0)], initial_gain=1.0)
    assert tl.epoch_count == 1
    assert tl.total_energy == 3.0
    assert tl.total_data == 1.0


def test_same_time_values_sum_and_last_channel_wins():
    tl = build_timeline(
        [harvest(1, 1.0), harvest(1, 2.0), channel(1, 4.0), channel(1, 9.0), data(0, 1.0)],
        initial_gain=1.0,
    )
    assert tl.harvest[1] == 3.0
    assert tl.h[1] == 9.0


def test_interleaved_events_epoch_count_is_distinct_times(five_epoch_tl):
    assert five_epoch_tl.epoch_count == 5
    np.testing.assert_allclose(five_epoch_tl.t, [0.0, 0.7, 1.2, 1.6, 2.1])
    np.testing.assert_allclose(five_epoch_tl.h, [1.0, 1.0, 2.0, 2.0, 2.0])
    assert five_epoch_tl.w_data == 1.6
    assert np.all(five_epoch_tl.xi > 0)


def test_synthetic_time_zero_inserted():
    tl = build_timeline([harvest(0.5, 2.0), data(1.0, 1.0)], initial_gain=2.0)
    assert tl.t[0] == 0.0
    assert tl.harvest[0] == 0.0
    assert tl.h[0] == 2.0


def test_no_data_raises():
    with pytest.raises(NoData):
        build_timeline([harvest(0, 1.0)], initial_gain=1.0)


def test_no_gain_raises():
    with pytest.raises(NoGain):
        build_timeline([harvest(0, 1.0), data(0, 1.0)])


def test_channel_at_zero_replaces_initial_gain():
    tl = build_timeline([channel(0, 5.0), data(0, 1.0)])
    assert tl.h[0] == 5.0


@pytest.mark.parametrize(
    "event",
    [
        {"t": -1.0, "kind": "harvest", "value": 1.0},
        {"t": 0.0, "kind": "harvest", "value": 0.0},
        {"t": 0.0, "kind": "battery", "value": 1.0},
        {"t": float("nan"), "kind": "data", "value": 1.0},
    ],
)
def test_invalid_events_rejected(event):
    with pytest.raises(ValueError):
        Event.model_validate(event)


@pytest.mark.parametrize("t, expected", [(0.5, 2.0), (1.0, 5.0), (0.0, 2.0)])
def test_cumulative_energy_right_continuous(t, expected):
    tl = build_timeline([harvest(0, 2.0), harvest(1, 3.0), data(0, 1.0)], initial_gain=1.0)
    assert cumulative_energy(tl, t) == expected


@pytest.mark.parametrize("t, expected", [(10.0, 1.0), (1.9, 1.0), (2.0, 5.0)])
def test_cumulative_data(t, expected):
    tl = build_timeline([data(0, 1.0), data(2, 4.0)], initial_gain=1.0)
    assert cumulative_data(tl, t) == expected


def test_cumulative_data_single_arrival():
    tl = build_timeline([data(0, 1.0)], initial_gain=1.0)
    assert cumulative_data(tl, 10.0) == 1.0


def test_kstar_examples():
    tl = build_timeline([data(0, 1.0), harvest(1, 1.0), harvest(3, 1.0)], initial_gain=1.0)
    assert epoch_index_and_kstar(tl, 2.5) == (1, pytest.approx(1.5))

    tl1 = build_timeline([data(0, 1.0), harvest(1, 1.0)], initial_gain=1.0)
    assert epoch_index_and_kstar(tl1, 1.0) == (1, 0.0)

    tl0 = build_timeline([data(0, 1.0)], initial_gain=1.0)
    assert epoch_index_and_kstar(tl0, 7.0) == (0, 7.0)


def test_kstar_requires_positive_deadline(single_epoch_tl):
    with pytest.raises(ValueError):
        epoch_index_and_kstar(single_epoch_tl, 0.0)


event_lists = st.lists(
    st.tuples(
        st.floats(min_value=0.0, max_value=10.0),
        st.sampled_from(["harvest", "data", "channel"]),
        st.floats(min_value=0.01, max_value=10.0),
    ),
    min_size=1,
    max_size=12,
).map(lambda evs: [{"t": t, "kind": k, "value": v} for t, k, v in evs] + [data(0.0, 1.0)])


@given(events=event_lists)
@settings(max_examples=100, deadline=None)
def test_rebuild_from_canonical_events_is_idempotent(events):
    tl = build_timeline(events, initial_gain=1.0)
    again = build_timeline(tl.events)
    np.testing.assert_array_equal(again.t, tl.t)
    np.testing.assert_allclose(again.harvest, tl.harvest)
    np.testing.assert_allclose(again.data, tl.data)
    np.testing.assert_array_equal(again.h, tl.h)


@given(events=event_lists, a=st.floats(0.0, 12.0), b=st.floats(0.0, 12.0))
@settings(max_examples=100, deadline=None)
def test_cumulative_functions_non_decreasing(events, a, b):
    tl = build_timeline(events, initial_gain=1.0)
    lo, hi = min(a, b), max(a, b)
    assert cumulative_energy(tl, lo) <= cumulative_energy(tl, hi)
    assert cumulative_data(tl, lo) <= cumulative_data(tl, hi)


@given(events=event_lists, T=st.floats(min_value=1e-3, max_value=15.0))
@settings(max_examples=100, deadline=None)
def test_whole_epochs_plus_residual_is_deadline(events, T):
    tl = build_timeline(events, initial_gain=1.0)
    kstar, residual = epoch_index_and_kstar(tl, T)
    assert residual >= 0
    assert float(np.sum(tl.xi[:kstar])) + residual == pytest.approx(T, rel=1e-12, abs=1e-12)
