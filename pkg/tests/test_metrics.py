import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from packpair.errors import NoVisibleKeypoints, ShapeMismatch
from packpair.metrics import (
    LossWeights,
    argmax_xy,
    dimensionless_keypoint_error,
    keypoints_from_heatmaps,
    load_heatmaps,
    mse_loss,
    ned_loss,
    overall_loss,
    save_heatmaps,
)
from packpair.perception import KeypointSet


def peak(h, w, x, y, value=1.0):
    m = np.zeros((h, w))
    m[y, x] = value
    return m


def test_mse_hand_example():
    assert mse_loss([[1, 0], [0, 0]], [[0.5, 0], [0, 0]]) == 0.0625


def test_mse_symmetric_and_zero():
    rng = np.random.default_rng(0)
    a, b = rng.random((3, 4, 5)), rng.random((3, 4, 5))
    assert mse_loss(a, b) == mse_loss(b, a)
    assert mse_loss(a, a) == 0.0


def test_ned_three_four_five():
    truth = peak(10, 10, 0, 0)
    pred = peak(10, 10, 3, 4)
    assert ned_loss(truth, pred) == pytest.approx(0.5, abs=1e-15)


def test_ned_normalises_by_width_and_height():
    truth = peak(20, 10, 0, 0)  # height 20, width 10
    pred = peak(20, 10, 3, 8)
    assert ned_loss(truth, pred) == pytest.approx(math.hypot(0.3, 0.4))


def test_ned_ignores_unseen_channels():
    truth = np.stack([peak(8, 8, 1, 1), peak(8, 8, 5, 5, 0.9)])
    base = np.stack([peak(8, 8, 1, 1), peak(8, 8, 5, 5)])
    other = np.stack([peak(8, 8, 1, 1), peak(8, 8, 0, 7)])
    assert ned_loss(truth, base) == ned_loss(truth, other) == 0.0


def test_ned_needs_a_visible_channel():
    with pytest.raises(NoVisibleKeypoints):
        ned_loss(peak(4, 4, 1, 1, 0.5), peak(4, 4, 1, 1))


def test_argmax_tie_goes_to_first_index():
    m = np.zeros((3, 3))
    m[2, 0] = m[0, 2] = 1.0
    assert argmax_xy(m) == (2, 0)


def test_overall_loss_combination():
    truth = [[1, 0], [0, 0]]
    pred = [[0.5, 0], [0, 0]]
    assert overall_loss(truth, pred, LossWeights(0.618)) == pytest.approx(0.038625, abs=1e-12)
    assert overall_loss(truth, pred, LossWeights(1.0)) == mse_loss(truth, pred)
    assert overall_loss(truth, pred, LossWeights(0.0)) == ned_loss(truth, pred)


def test_alpha_out_of_range():
    with pytest.raises(ValueError):
        LossWeights(1.5)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        mse_loss(np.zeros((1, 2, 2)), np.zeros((1, 2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_overall_is_convex_combination(n, seed, alpha):
    rng = np.random.default_rng(seed)
    truth = rng.random((2, n, n)) * 0.9
    truth[0, 0, 0] = 1.0
    pred = rng.random((2, n, n))
    m, d = mse_loss(truth, pred), ned_loss(truth, pred)
    total = overall_loss(truth, pred, LossWeights(alpha))
    assert total == pytest.approx(alpha * m + (1 - alpha) * d, abs=1e-12)
    assert min(m, d) - 1e-12 <= total <= max(m, d) + 1e-12


def kp(**pts):
    return KeypointSet(**pts)


BASE = dict(toe=(50, 0, 0), heel=(-50, 0, 0), topline=(-20, 0, 30), outside=(0, -20, 10), inside=(0, 20, 10))


def test_dimensionless_error_example():
    off = dict(BASE, topline=(-15, 0, 30))
    assert dimensionless_keypoint_error(kp(**off), kp(**BASE)) == pytest.approx(0.01, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(-math.pi, math.pi), st.floats(-100, 100), st.floats(-100, 100),
       st.integers(0, 2**32 - 1))
def test_dimensionless_error_similarity_invariant(scale, angle, dx, dy, seed):
    rng = np.random.default_rng(seed)
    pred = {k: tuple(np.add(v, rng.normal(0, 3, 3))) for k, v in BASE.items()}
    c, s = math.cos(angle), math.sin(angle)

    def sim(p):
        return (scale * (c * p[0] - s * p[1]) + dx, scale * (s * p[0] + c * p[1]) + dy, scale * p[2])

    e0 = dimensionless_keypoint_error(kp(**pred), kp(**BASE))
    e1 = dimensionless_keypoint_error(kp(**pred).transformed(sim), kp(**BASE).transformed(sim))
    assert e1 == pytest.approx(e0, abs=1e-9)


def test_keypoints_from_heatmaps():
    stack = np.zeros((5, 6, 7))
    for k in range(5):
        stack[k, k, k + 1] = 1.0
    ks = keypoints_from_heatmaps(stack)
    assert ks.toe == (1.0, 0.0, 0.0) and ks.inside == (5.0, 4.0, 0.0)


def test_binary_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    stack = rng.random((5, 4, 3)).astype(np.float32).astype(float)
    f = tmp_path / "h.bin"
    save_heatmaps(f, stack)
    assert f.stat().st_size == 12 + 4 * stack.size
    assert np.array_equal(load_heatmaps(f), stack)


def test_binary_bad_header(tmp_path):
    f = tmp_path / "bad.bin"
    f.write_bytes(b"\x01\x00")
    with pytest.raises(ShapeMismatch):
        load_heatmaps(f)
    save_heatmaps(f, np.zeros((1, 2, 2)))
    f.write_bytes(f.read_bytes()[:-4])
    with pytest.raises(ShapeMismatch):
        load_heatmaps(f)
