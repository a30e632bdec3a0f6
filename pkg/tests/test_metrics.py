import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synwatch.errors import ConfigError, ContractViolation
from synwatch.metrics import Confusion, classification_scores, confusion, r_squared, rmse

binary_pairs = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)),
                        min_size=1, max_size=50)


# --------------------------------------------------------------------------
# confusion (inverted fp/fn convention)


def test_confusion_hand_count():
    c = confusion([1, 1, 0, 0], [1, 0, 0, 1])
    assert (c.tp, c.fp, c.tn, c.fn) == (1, 1, 1, 1)


def test_confusion_perfect():
    c = confusion([1, 0, 1], [1, 0, 1])
    assert c.fp == 0 and c.fn == 0


def test_confusion_all_wrong():
    c = confusion([1, 0], [0, 1])
    assert (c.tp, c.tn, c.fp, c.fn) == (0, 0, 1, 1)


def test_confusion_length_mismatch():
    with pytest.raises(ContractViolation):
        confusion([1, 0], [1])


@settings(max_examples=100, deadline=None)
@given(binary_pairs)
def test_confusion_counts_sum(pairs):
    y, p = zip(*pairs)
    assert confusion(y, p).total == len(pairs)


@settings(max_examples=100, deadline=None)
@given(binary_pairs)
def test_label_swap_swaps_fp_fn(pairs):
    y, p = zip(*pairs)
    c = confusion(y, p)
    flipped = confusion([1 - v for v in y], [1 - v for v in p])
    assert (flipped.fp, flipped.fn, flipped.tp, flipped.tn) == (c.fn, c.fp, c.tn, c.tp)


@settings(max_examples=100, deadline=None)
@given(binary_pairs, st.randoms(use_true_random=False))
def test_scores_permutation_invariant(pairs, rnd):
    y, p = zip(*pairs)
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    ys, ps = zip(*shuffled)
    assert classification_scores(confusion(y, p)) == \
        classification_scores(confusion(ys, ps))


# --------------------------------------------------------------------------
# classification_scores


def test_scores_hand_computed():
    acc, fp, fn, f1 = classification_scores(Confusion(tp=1, tn=1, fp=1, fn=1))
    assert acc == 50.0
    assert f1 == 0.5


def test_scores_perfect():
    acc, fp, fn, f1 = classification_scores(Confusion(tp=3, tn=2, fp=0, fn=0))
    assert (acc, fp, fn, f1) == (100.0, 0.0, 0.0, 1.0)


def test_scores_degenerate_all_negative():
    acc, fp, fn, f1 = classification_scores(Confusion(tp=0, tn=4, fp=0, fn=0))
    assert f1 == 1.0


def test_scores_empty_confusion():
    with pytest.raises(ContractViolation):
        classification_scores(Confusion(0, 0, 0, 0))


@settings(max_examples=100, deadline=None)
@given(binary_pairs)
def test_accuracy_fp_fn_sum_to_hundred(pairs):
    y, p = zip(*pairs)
    acc, fp, fn, _ = classification_scores(confusion(y, p))
    assert acc + fp + fn == pytest.approx(100.0, abs=1e-9)


# --------------------------------------------------------------------------
# r_squared and rmse


def test_r2_perfect():
    assert r_squared([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]) == 1.0


def test_r2_hand_computed():
    assert r_squared([0.0, 1.0], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)


def test_r2_mean_baseline_is_zero():
    y = [1.0, 2.0, 3.0, 6.0]
    yhat = [3.0] * 4
    assert r_squared(y, yhat) == pytest.approx(0.0, abs=1e-12)


def test_r2_constant_y_rejected():
    with pytest.raises(ConfigError):
        r_squared([2.0, 2.0], [1.0, 2.0])


def test_rmse_identical():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0


def test_rmse_hand_computed():
    assert rmse([0.0, 1.0], [0.5, 0.5]) == pytest.approx(0.5, abs=1e-12)


def test_rmse_length_mismatch():
    with pytest.raises(ContractViolation):
        rmse([1.0], [1.0, 2.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                min_size=1, max_size=30))
def test_rmse_symmetric(pairs):
    y, yhat = zip(*pairs)
    assert rmse(y, yhat) == pytest.approx(rmse(yhat, y), rel=1e-12, abs=0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                min_size=2, max_size=30),
       st.randoms(use_true_random=False))
def test_regression_scores_permutation_invariant(pairs, rnd):
    y, yhat = zip(*pairs)
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    ys, yhs = zip(*shuffled)
    assert rmse(y, yhat) == pytest.approx(rmse(ys, yhs), rel=1e-9, abs=1e-12)
    arr = np.asarray(y)
    if np.sum((arr - arr.mean()) ** 2) > 0.0:  # r2 defined for this draw
        assert r_squared(y, yhat) == pytest.approx(r_squared(ys, yhs), rel=1e-9, abs=1e-12)
