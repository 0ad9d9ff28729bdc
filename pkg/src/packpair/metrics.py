"""Heatmap losses and keypoint error.

Heatmap stacks are ``(channels, height, width)`` float arrays with channels
ordered toe, heel, topline, outside, inside. On disk: a little-endian header
of three uint32 (channels, height, width) followed by row-major float32 data,
channel after channel.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, NoVisibleKeypoints, ShapeMismatch
from .perception import KEYPOINT_NAMES, KeypointSet

DEFAULT_ALPHA = 0.618
_HEADER = struct.Struct("<III")


@dataclass(frozen=True)
class LossWeights:
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def as_stack(maps) -> np.ndarray:
    s = np.asarray(maps, dtype=float)
    if s.ndim == 2:
        s = s[None]
    if s.ndim != 3 or min(s.shape) < 1:
        raise ShapeMismatch(f"expected (channels, height, width), got {s.shape}")
    if np.any(s < 0) or np.any(s > 1):
        raise ValueError("heatmap scores must lie in [0, 1]")
    return s


def _pair(truth, pred):
    t, p = as_stack(truth), as_stack(pred)
    if t.shape != p.shape:
        raise ShapeMismatch(f"truth {t.shape} vs prediction {p.shape}")
    return t, p


def mse_loss(truth, pred) -> float:
    t, p = _pair(truth, pred)
    return float(np.mean((t - p) ** 2))


def argmax_xy(heatmap: np.ndarray) -> tuple[int, int]:
    """(column, row) of the peak; ties go to the smallest row-major index."""
    flat = int(np.argmax(heatmap))
    row, col = divmod(flat, heatmap.shape[1])
    return col, row


def visible_channels(truth) -> list[int]:
    t = as_stack(truth)
    return [k for k in range(t.shape[0]) if t[k].max() == 1.0]


def ned_loss(truth, pred) -> float:
    """Mean normalised peak distance over channels whose truth peak equals 1."""
    t, p = _pair(truth, pred)
    ks = visible_channels(t)
    if not ks:
        raise NoVisibleKeypoints("no ground-truth channel reaches confidence 1")
    h, w = t.shape[1:]
    total = 0.0
    for k in ks:
        (xt, yt), (xp, yp) = argmax_xy(t[k]), argmax_xy(p[k])
        total += float(np.hypot((xt - xp) / w, (yt - yp) / h))
    return total / len(ks)


def overall_loss(truth, pred, w: LossWeights = LossWeights()) -> float:
    return w.alpha * mse_loss(truth, pred) + (1.0 - w.alpha) * ned_loss(truth, pred)


def dimensionless_keypoint_error(pred: KeypointSet, truth: KeypointSet) -> float:
    """Mean distance over mutually visible keypoints, in units of the true toe-heel distance."""
    scale = float(np.linalg.norm(np.array(truth.toe) - np.array(truth.heel)))
    if scale == 0.0:
        raise DegenerateInput("ground-truth toe and heel coincide")
    pv, tv = pred.visible(), truth.visible()
    if set(pv) != set(tv):
        raise ValueError("prediction and truth visibility patterns differ")
    errs = [np.linalg.norm(pv[n] - tv[n]) for n in tv]
    return float(np.mean(errs)) / scale


def keypoints_from_heatmaps(stack, channels=None) -> KeypointSet:
    """Peak pixels of the given channels as planar keypoints (z = 0)."""
    s = as_stack(stack)
    if s.shape[0] != len(KEYPOINT_NAMES):
        raise ShapeMismatch(f"keypoint stacks have {len(KEYPOINT_NAMES)} channels")
    chosen = range(s.shape[0]) if channels is None else channels
    kw = {}
    for k in chosen:
        x, y = argmax_xy(s[k])
        kw[KEYPOINT_NAMES[k]] = (float(x), float(y), 0.0)
    return KeypointSet(**kw)


def save_heatmaps(path, stack) -> None:
    s = as_stack(stack)
    c, h, w = s.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(c, h, w))
        f.write(s.astype("<f4").tobytes(order="C"))


def load_heatmaps(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ShapeMismatch("file shorter than the 12-byte header")
    c, h, w = _HEADER.unpack_from(data)
    n = c * h * w
    if n == 0:
        raise ShapeMismatch("header declares an empty stack")
    body = data[_HEADER.size:]
    if len(body) != 4 * n:
        raise ShapeMismatch(f"header declares {n} floats, file holds {len(body) / 4:g}")
    return as_stack(np.frombuffer(body, dtype="<f4").astype(float).reshape(c, h, w))
