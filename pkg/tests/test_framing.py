import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synwatch.errors import ConfigError, ContractViolation
from synwatch.framing import (FRAME_WIDTH, Frame, FramingConfig, calibrate_thresholds,
                              frame_sigma, make_frames, read_frames, threshold_flag,
                              write_frames)
from synwatch.traffic import IntervalSeries


def _series(counts, labels=None, interval=10):
    counts = np.asarray(counts, dtype=np.int64)
    if labels is None:
        labels = np.zeros(len(counts), dtype=np.int64)
    return IntervalSeries(counts, np.asarray(labels, dtype=np.int64),
                          interval_seconds=interval)


# --------------------------------------------------------------------------
# frame_sigma


def test_sigma_of_constant_frame_is_zero():
    assert frame_sigma([7] * 12) == 0.0


def test_sigma_hand_computed():
    # mean 3, variance (11*1 + 121)/12 = 11
    values = [2] * 11 + [14]
    assert frame_sigma(values) == pytest.approx(math.sqrt(11.0), abs=1e-12)


def test_sigma_wrong_arity():
    with pytest.raises(ContractViolation):
        frame_sigma([1] * 11)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 10 ** 4), min_size=12, max_size=12),
       st.integers(0, 1000))
def test_sigma_shift_invariant(values, shift):
    shifted = [v + shift for v in values]
    assert frame_sigma(shifted) == pytest.approx(frame_sigma(values), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=12, max_size=12), st.integers(0, 50))
def test_sigma_scales_linearly(values, c):
    scaled = [v * c for v in values]
    assert frame_sigma(scaled) == pytest.approx(c * frame_sigma(values), rel=1e-12, abs=1e-9)


# --------------------------------------------------------------------------
# make_frames


def test_empty_series_makes_no_frames():
    assert make_frames(_series([]), FramingConfig()) == []


def test_single_clean_frame_labelled_zero():
    frames = make_frames(_series([5] * 12), FramingConfig())
    assert len(frames) == 1
    assert frames[0].label == 0
    assert frames[0].sigma is None


def test_tail_is_dropped():
    frames = make_frames(_series(list(range(30))), FramingConfig())
    assert len(frames) == 2
    assert frames[0].values == tuple(range(12))
    assert frames[1].values == tuple(range(12, 24))


def test_any_attacked_interval_marks_frame():
    labels = [0] * 12 + [0] * 11 + [1]
    frames = make_frames(_series([5] * 24, labels), FramingConfig())
    assert [f.label for f in frames] == [0, 1]


def test_sigma_computed_on_request():
    frames = make_frames(_series([2] * 11 + [14]), FramingConfig(with_sigma=True))
    assert frames[0].sigma == pytest.approx(math.sqrt(11.0), abs=1e-9)


def test_rejects_non_ten_second_intervals():
    with pytest.raises(ConfigError):
        make_frames(_series([1] * 12, interval=5), FramingConfig())


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 1)),
                min_size=0, max_size=48),
       st.lists(st.tuples(st.integers(0, 100), st.integers(0, 1)),
                min_size=0, max_size=48))
def test_concatenation_property(a, b):
    if len(a) % FRAME_WIDTH:
        a = a[:len(a) - len(a) % FRAME_WIDTH]
    cfg = FramingConfig(with_sigma=True)
    sa = _series([c for c, _ in a], [l for _, l in a])
    sb = _series([c for c, _ in b], [l for _, l in b])
    joined = _series([c for c, _ in a + b], [l for _, l in a + b])
    assert make_frames(joined, cfg) == make_frames(sa, cfg) + make_frames(sb, cfg)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 1)),
                min_size=12, max_size=36),
       st.data())
def test_label_monotonicity(rows, data):
    counts = [c for c, _ in rows]
    labels = [l for _, l in rows]
    pos = data.draw(st.integers(0, len(rows) - 1))
    raised = list(labels)
    raised[pos] = 1
    before = make_frames(_series(counts, labels), FramingConfig())
    after = make_frames(_series(counts, raised), FramingConfig())
    for f_before, f_after in zip(before, after):
        assert f_after.label >= f_before.label


# --------------------------------------------------------------------------
# threshold_flag


def test_flag_false_for_quiet_frame():
    frame = Frame(tuple([3] * 12), sigma=0.0, label=0)
    cfg = FramingConfig(with_sigma=True, sigma_threshold=5.0, mean_threshold=100.0)
    assert threshold_flag(frame, cfg) is False


def test_flag_true_on_sigma():
    values = tuple([2] * 11 + [14])
    frame = Frame(values, sigma=frame_sigma(values), label=0)
    cfg = FramingConfig(with_sigma=True, sigma_threshold=3.0, mean_threshold=math.inf)
    assert threshold_flag(frame, cfg) is True


def test_flag_true_on_mean_despite_zero_sigma():
    frame = Frame(tuple([500] * 12), sigma=0.0, label=0)
    cfg = FramingConfig(with_sigma=True, sigma_threshold=3.0, mean_threshold=100.0)
    assert threshold_flag(frame, cfg) is True


def test_flag_requires_sigma():
    frame = Frame(tuple([1] * 12), sigma=None, label=0)
    with pytest.raises(ContractViolation):
        threshold_flag(frame, FramingConfig())


def test_calibrated_thresholds_pass_legit_frames():
    rng = np.random.default_rng(4)
    counts = rng.poisson(50, size=120)
    frames = make_frames(_series(counts), FramingConfig(with_sigma=True))
    cfg = calibrate_thresholds(frames)
    attack = Frame(tuple([500] * 12), sigma=0.0, label=1)
    assert threshold_flag(attack, cfg) is True


# --------------------------------------------------------------------------
# frames file


def test_frames_file_round_trip(tmp_path):
    series = _series([2] * 11 + [14] + [5] * 12, [0] * 12 + [1] + [0] * 11)
    frames = make_frames(series, FramingConfig(with_sigma=True))
    path = tmp_path / "frames.csv"
    write_frames(frames, path)
    assert read_frames(path) == frames


def test_frames_file_round_trip_without_sigma(tmp_path):
    frames = make_frames(_series(list(range(24))), FramingConfig())
    path = tmp_path / "frames.csv"
    write_frames(frames, path)
    assert read_frames(path) == frames
