"""Unit tests for crossing detection and frequency estimation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscseg import (DegenerateValues, FrequencyMap, NodeFlag,
                    crossing_detector, estimate_frequency,
                    frequency_histogram, interpolate_crossing)
from oscseg.models import BzState, MemsState, NeuralState


def _fmap(freqs, flags=None):
    freqs = np.asarray(freqs, dtype=float)
    if flags is None:
        flags = np.zeros(freqs.shape, dtype=np.uint8)
    return FrequencyMap(freqs, np.asarray(flags, dtype=np.uint8))


class TestEstimateFrequency:
    def test_unit_sinusoid_crossings(self):
        # upward zero crossings of sin(2 pi t) fall on the integers
        events = np.arange(1.0, 11.0)
        freq, flag = estimate_frequency(events, (0.0, 10.0))
        assert flag == NodeFlag.OK
        assert freq == pytest.approx(1.0, rel=0.01)

    def test_constant_signal(self):
        freq, flag = estimate_frequency([], (0.0, 10.0))
        assert (freq, flag) == (0.0, NodeFlag.NON_OSCILLATING)

    def test_single_event_is_non_oscillating(self):
        freq, flag = estimate_frequency([2.0], (0.0, 10.0))
        assert (freq, flag) == (0.0, NodeFlag.NON_OSCILLATING)

    def test_two_events_low_confidence(self):
        freq, flag = estimate_frequency([1.0, 3.5], (0.0, 10.0))
        assert flag == NodeFlag.LOW_CONFIDENCE
        assert freq == pytest.approx(0.4)

    def test_events_outside_window_are_ignored(self):
        events = [-5.0, -1.0, 1.0, 2.0, 3.0, 11.0]
        freq, flag = estimate_frequency(events, (0.0, 10.0))
        assert flag == NodeFlag.OK
        assert freq == pytest.approx(1.0)

    def test_transient_prefix_never_affects_result(self):
        base = [4.0, 5.0, 6.0, 7.0]
        with_prefix = [0.3, 0.9, 2.2] + base
        window = (3.5, 7.5)
        assert estimate_frequency(base, window) \
            == estimate_frequency(with_prefix, window)

    @given(period=st.floats(0.01, 10.0), k=st.integers(3, 50),
           phase=st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_periodic_train_is_exact(self, period, k, phase):
        events = phase * period + period * np.arange(k)
        freq, flag = estimate_frequency(events, (events[0] - period / 2,
                                                 events[-1] + period / 2))
        assert flag == NodeFlag.OK
        assert freq == pytest.approx(1.0 / period, rel=1e-12)

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            estimate_frequency([1.0], (5.0, 5.0))


class TestCrossingDetector:
    def test_interpolated_event_time(self):
        t = crossing_detector("neural", NeuralState(-0.1, 0.0),
                              NeuralState(0.1, 0.0), 1.0, 1.02)
        assert t == pytest.approx(1.01, abs=1e-12)

    def test_downward_crossing_rejected(self):
        assert crossing_detector("neural", NeuralState(0.1, 0.0),
                                 NeuralState(-0.1, 0.0), 1.0, 1.02) is None

    def test_no_sign_change_rejected(self):
        assert crossing_detector("neural", NeuralState(-0.1, 0.0),
                                 NeuralState(-0.05, 0.0), 1.0, 1.02) is None

    def test_bz_uses_half_level(self):
        t = crossing_detector("bz", BzState(0.4, 0.0), BzState(0.6, 0.0),
                              0.0, 0.002)
        assert t == pytest.approx(0.001)
        assert crossing_detector("bz", BzState(-0.1, 0.0),
                                 BzState(0.1, 0.0), 0.0, 0.002) is None

    def test_mems_uses_real_part(self):
        t = crossing_detector("mems", MemsState(-0.05, 0.9),
                              MemsState(0.15, 0.9), 0.0, 0.002)
        assert t == pytest.approx(0.0005)

    def test_amplitude_scaling_preserves_event_times(self):
        # power-of-two scaling is exact in floating point
        for scale in (0.25, 4.0):
            a = interpolate_crossing(-0.3, 0.5, 2.0, 2.02, 0.0)
            b = interpolate_crossing(-0.3 * scale, 0.5 * scale, 2.0, 2.02,
                                     0.0)
            assert a == b

    def test_touching_level_from_below_counts(self):
        assert interpolate_crossing(-0.1, 0.0, 0.0, 1.0, 0.0) == \
            pytest.approx(1.0)
        assert interpolate_crossing(0.0, 0.1, 0.0, 1.0, 0.0) is None


class TestFrequencyHistogram:
    def test_uniform_map_collapses_to_flagged_single_bin(self):
        hist = frequency_histogram(_fmap(np.full((4, 4), 0.25)), bins=8)
        assert hist.degenerate
        assert hist.counts.tolist() == [16]

    def test_two_equal_clusters(self):
        freqs = np.array([[0.3, 0.3], [0.5, 0.5]])
        hist = frequency_histogram(_fmap(freqs), bins=2)
        assert hist.counts.tolist() == [2, 2]
        assert not hist.degenerate

    def test_counts_sum_to_ok_nodes(self):
        freqs = np.array([[0.3, 0.4], [0.5, 0.0]])
        flags = np.array([[0, 0], [0, 1]], dtype=np.uint8)
        hist = frequency_histogram(_fmap(freqs, flags), bins=4)
        assert hist.counts.sum() == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            frequency_histogram(_fmap(np.ones((2, 2))), bins=1)
        all_dead = _fmap(np.zeros((2, 2)), np.ones((2, 2), dtype=np.uint8))
        with pytest.raises(DegenerateValues):
            frequency_histogram(all_dead, bins=4)


class TestFrequencyMapCsv:
    def test_roundtrip(self):
        rng = np.random.default_rng(2)
        freqs = rng.random((3, 5))
        flags = rng.integers(0, 3, size=(3, 5)).astype(np.uint8)
        freqs[flags == NodeFlag.NON_OSCILLATING] = 0.0
        fmap = FrequencyMap(freqs, flags)
        back = FrequencyMap.from_csv(fmap.to_csv())
        assert np.array_equal(back.freqs, fmap.freqs)
        assert np.array_equal(back.flags, fmap.flags)

    def test_header_layout(self):
        fmap = _fmap(np.array([[0.5]]))
        lines = fmap.to_csv().splitlines()
        assert lines[0] == "width,height"
        assert lines[1] == "1,1"
        assert lines[2] == "row,col,freq,flag"
        assert lines[3] == "0,0,0.5,OK"

    def test_serialization_is_deterministic(self):
        fmap = _fmap(np.array([[1 / 3, 0.1], [0.9, 2 / 7]]))
        assert fmap.to_csv() == fmap.to_csv()

    def test_flag_invariant_enforced(self):
        with pytest.raises(ValueError):
            FrequencyMap(np.array([[0.5]]),
                         np.array([[int(NodeFlag.NON_OSCILLATING)]],
                                  dtype=np.uint8))
