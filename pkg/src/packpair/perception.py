"""Keypoint post-processing: shoe state, shoe/grasp pose, box pose.

The neural detector is replaced by ``synthesize_keypoints``, which places a
catalog shoe's body-frame keypoints under a pose and hides the ones the
resting state occludes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .catalog import BoxModel, ShoeModel
from .errors import AmbiguousCorners, DegenerateInput, InconsistentKeypoints
from .geometry import (
    Point2,
    Pose,
    convex_hull,
    cross2,
    min_area_rect,
    perp_ccw,
    rot2,
    signed_angle,
    unit,
    wrap_angle,
)

KEYPOINT_NAMES = ("toe", "heel", "topline", "outside", "inside")


class ShoeState(enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"
    SIDE_INSIDE_UP = "side-inside-up"
    SIDE_OUTSIDE_UP = "side-outside-up"

    @property
    def is_side(self) -> bool:
        return self in (ShoeState.SIDE_INSIDE_UP, ShoeState.SIDE_OUTSIDE_UP)

    @property
    def complement(self) -> "ShoeState":
        """The side variant that pairs with this one."""
        if self is ShoeState.SIDE_INSIDE_UP:
            return ShoeState.SIDE_OUTSIDE_UP
        if self is ShoeState.SIDE_OUTSIDE_UP:
            return ShoeState.SIDE_INSIDE_UP
        raise ValueError(f"{self.value} has no side complement")

    @property
    def roll(self) -> float:
        return _ROLL[self]


_ROLL = {
    ShoeState.TOP: 0.0,
    ShoeState.BOTTOM: math.pi,
    ShoeState.SIDE_INSIDE_UP: math.pi / 2,
    ShoeState.SIDE_OUTSIDE_UP: -math.pi / 2,
}


def state_from_orientation(matrix, tol: float = 1e-6) -> ShoeState:
    """Resting state whose up-facing body axis matches ``matrix``."""
    m = np.asarray(matrix)
    z_up, y_up = m[2, 2], m[2, 1]
    if z_up > 1 - tol:
        return ShoeState.TOP
    if z_up < -1 + tol:
        return ShoeState.BOTTOM
    if y_up > 1 - tol:
        return ShoeState.SIDE_INSIDE_UP
    if y_up < -1 + tol:
        return ShoeState.SIDE_OUTSIDE_UP
    raise ValueError("orientation is not a resting state")


def rest_height(model: ShoeModel, state: ShoeState) -> float:
    """Height of the toe/heel midpoint above the support when resting in ``state``."""
    if state is ShoeState.TOP:
        return 0.0
    if state is ShoeState.BOTTOM:
        return model.height
    return model.width / 2


def _vec(v) -> Optional[tuple[float, float, float]]:
    if v is None:
        return None
    t = tuple(float(c) for c in v)
    if len(t) != 3:
        raise ValueError("keypoints are 3-vectors")
    return t


@dataclass(frozen=True)
class KeypointSet:
    """Five named keypoints in the world frame; ``None`` means not visible."""

    toe: Optional[tuple] = None
    heel: Optional[tuple] = None
    topline: Optional[tuple] = None
    outside: Optional[tuple] = None
    inside: Optional[tuple] = None

    def __post_init__(self):
        for name in KEYPOINT_NAMES:
            object.__setattr__(self, name, _vec(getattr(self, name)))
        if self.toe is None or self.heel is None:
            raise InconsistentKeypoints("toe and heel must be visible")
        lateral_missing = (self.inside is None) + (self.outside is None)
        if lateral_missing == 2 or (lateral_missing and self.topline is None):
            raise InconsistentKeypoints("at most one keypoint may be hidden")

    def visible(self) -> dict[str, np.ndarray]:
        return {n: np.array(getattr(self, n)) for n in KEYPOINT_NAMES if getattr(self, n) is not None}

    def transformed(self, fn) -> "KeypointSet":
        """Apply ``fn`` (3-vector -> 3-vector) to every visible keypoint."""
        return KeypointSet(**{n: None if getattr(self, n) is None else fn(np.array(getattr(self, n)))
                              for n in KEYPOINT_NAMES})


def classify_state(k: KeypointSet) -> ShoeState:
    if k.topline is None:
        if k.inside is None or k.outside is None:
            raise InconsistentKeypoints("topline and a lateral keypoint both hidden")
        return ShoeState.BOTTOM
    if k.inside is None and k.outside is None:
        raise InconsistentKeypoints("both lateral keypoints hidden")
    if k.inside is None:
        return ShoeState.SIDE_OUTSIDE_UP
    if k.outside is None:
        return ShoeState.SIDE_INSIDE_UP
    return ShoeState.TOP


@dataclass(frozen=True)
class ShoePose:
    position: tuple[float, float, float]
    yaw: float
    roll: float

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        object.__setattr__(self, "roll", wrap_angle(self.roll))

    @classmethod
    def for_state(cls, position, yaw: float, state: ShoeState) -> "ShoePose":
        return cls(position, yaw, state.roll)

    def as_pose(self) -> Pose:
        return Pose(self.position, roll=self.roll, yaw=self.yaw)

    def matrix(self) -> np.ndarray:
        return self.as_pose().matrix()

    @property
    def x_axis(self) -> np.ndarray:
        """Horizontal heel->toe direction."""
        return np.array([math.cos(self.yaw), math.sin(self.yaw)])


@dataclass(frozen=True)
class GraspPose:
    position: tuple[float, float, float]
    yaw: float


def estimate_shoe_pose(k: KeypointSet, s: ShoeState, reference_axis=(1.0, 0.0)) -> ShoePose:
    toe, heel = np.array(k.toe), np.array(k.heel)
    heading = (toe - heel)[:2]
    if not np.any(heading):
        raise DegenerateInput("toe and heel coincide in the table plane")
    yaw = signed_angle(reference_axis, heading)
    return ShoePose(tuple((toe + heel) / 2), yaw, s.roll)


def grasp_pose(p: ShoePose) -> GraspPose:
    return GraspPose(p.position, p.yaw)


def synthesize_keypoints(model: ShoeModel, pose: ShoePose, state: ShoeState,
                         noise_sigma: float = 0.0, seed: int = 0) -> KeypointSet:
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if abs(wrap_angle(pose.roll - state.roll)) > 1e-9:
        raise InconsistentKeypoints(f"pose roll {pose.roll:.6f} does not match state {state.value}")
    hidden = {
        ShoeState.TOP: None,
        ShoeState.BOTTOM: "topline",
        ShoeState.SIDE_INSIDE_UP: "outside",
        ShoeState.SIDE_OUTSIDE_UP: "inside",
    }[state]
    R = pose.matrix()
    origin = np.array(pose.position)
    rng = np.random.default_rng(seed)
    out = {}
    for name, body in model.body_keypoints().items():
        if name == hidden:
            out[name] = None
            continue
        p = origin + R @ np.array(body)
        if noise_sigma > 0:
            p = p + rng.normal(0.0, noise_sigma, 3)
        out[name] = p
    return KeypointSet(**out)


# --- box ---------------------------------------------------------------------


@dataclass(frozen=True)
class BoxPose:
    """Four corners and three side poses.

    Each side pose sits at a side midpoint with its Y axis pointing into the
    box. pB and pC are on the short sides, pA on the hinge long side, and
    (pC - pB) x (pA - centre) > 0.
    """

    corners: tuple[Point2, Point2, Point2, Point2]
    pA: Pose
    pB: Pose
    pC: Pose

    @property
    def center(self) -> np.ndarray:
        return np.mean(np.array(self.corners), axis=0)

    @property
    def long_axis(self) -> np.ndarray:
        return unit(np.array(self.pC.position[:2]) - np.array(self.pB.position[:2]))

    @property
    def hinge_normal(self) -> np.ndarray:
        """Unit vector from the box centre toward the pA side."""
        return unit(np.array(self.pA.position[:2]) - self.center)

    @property
    def inner_length(self) -> float:
        return float(np.linalg.norm(np.array(self.pC.position[:2]) - np.array(self.pB.position[:2])))

    @property
    def inner_width(self) -> float:
        return 2.0 * float(np.dot(np.array(self.pA.position[:2]) - self.center, self.hinge_normal))

    def contains(self, xy, tol: float = 1e-6) -> bool:
        local = np.asarray(xy, dtype=float)[:2] - self.center
        a = abs(float(np.dot(local, self.long_axis)))
        b = abs(float(np.dot(local, self.hinge_normal)))
        return a <= self.inner_length / 2 + tol and b <= self.inner_width / 2 + tol

    def transformed(self, angle: float, shift) -> "BoxPose":
        r = rot2(angle)
        t = np.asarray(shift, dtype=float)

        def move(p: Pose) -> Pose:
            xy = r @ np.array(p.position[:2]) + t
            return Pose((xy[0], xy[1], p.position[2]), yaw=p.yaw + angle)

        corners = tuple(Point2(*(r @ np.array(c) + t)) for c in self.corners)
        return BoxPose(corners, move(self.pA), move(self.pB), move(self.pC))


def _side_pose(midpoint, inward, z: float) -> Pose:
    return Pose((midpoint[0], midpoint[1], z), yaw=math.atan2(inward[1], inward[0]) - math.pi / 2)


def _box_from_corners(corners: np.ndarray, hinge: int, z: float = 0.0) -> BoxPose:
    """``corners`` counter-clockwise; side i runs corners[i] -> corners[i+1]; ``hinge`` is a long side."""
    mids = [(corners[i] + corners[(i + 1) % 4]) / 2 for i in range(4)]
    centre = corners.mean(axis=0)
    a = mids[hinge]
    n = unit(a - centre)
    s1, s2 = mids[(hinge + 1) % 4], mids[(hinge + 3) % 4]
    b, c = (s1, s2) if cross2(s2 - s1, n) > 0 else (s2, s1)
    return BoxPose(
        tuple(Point2(float(x), float(y)) for x, y in corners),
        _side_pose(a, centre - a, z),
        _side_pose(b, c - b, z),
        _side_pose(c, b - c, z),
    )


def box_pose_from_center(model: BoxModel, center=(0.0, 0.0), yaw: float = 0.0, z: float = 0.0) -> BoxPose:
    """Ground-truth box pose: long axis along ``yaw``, hinge on the local +Y side."""
    hx, hy = model.length / 2, model.width / 2
    local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
    corners = local @ rot2(yaw).T + np.asarray(center, dtype=float)
    return _box_from_corners(corners, hinge=2, z=z)


def estimate_box_pose(contour: Sequence, dims: BoxModel, aspect_tolerance: float = 0.25,
                      lid_tolerance: float = 0.5) -> BoxPose:
    """Box corners from the hull points nearest the minimum-area rectangle corners."""
    pts = np.asarray(contour, dtype=float)
    if len(pts) < 4:
        raise DegenerateInput("need at least four contour points")
    hull = convex_hull(pts)
    rect = min_area_rect(hull)
    if rect.area < 1.0:
        raise DegenerateInput("contour hull is too small")
    long_side, short_side = max(rect.half_extents), min(rect.half_extents)
    if short_side <= 0:
        raise DegenerateInput("contour hull is degenerate")
    expected = dims.length / dims.width
    if abs(long_side / short_side - expected) > aspect_tolerance * expected:
        raise DegenerateInput(
            f"contour aspect {long_side / short_side:.3f} is not within "
            f"{aspect_tolerance:.0%} of the box aspect {expected:.3f}")
    hv = hull.array()
    if len(hv) < 4:
        raise AmbiguousCorners("hull has fewer than four vertices")
    rc = rect.corners()
    cost = np.linalg.norm(rc[:, None, :] - hv[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    corners = hv[cols[np.argsort(rows)]]
    if len(set(map(tuple, corners))) < 4:
        raise AmbiguousCorners("two rectangle corners share a hull point")

    side_len = [np.linalg.norm(corners[(i + 1) % 4] - corners[i]) for i in range(4)]
    long_ids = (0, 2) if side_len[0] + side_len[2] >= side_len[1] + side_len[3] else (1, 3)
    mass = []
    for i in long_ids:
        p, q = corners[i], corners[(i + 1) % 4]
        outward = -perp_ccw(unit(q - p))  # corners are counter-clockwise
        d = (pts - p) @ outward
        mass.append(float(np.sum(d[d > lid_tolerance])))
    if max(mass) > 0:
        hinge = long_ids[int(np.argmax(mass))]
    else:
        # no lid evidence: the long side nearest the scene origin
        dist = [np.linalg.norm((corners[i] + corners[(i + 1) % 4]) / 2) for i in long_ids]
        hinge = long_ids[int(np.argmin(dist))]
    return _box_from_corners(corners, hinge)


def synthetic_box_contour(model: BoxModel, center=(0.0, 0.0), yaw: float = 0.0,
                          n_lid: int = 0, max_bump: float = 8.0, seed: int = 0,
                          spacing: float = 5.0) -> np.ndarray:
    """Perimeter samples of a box outline plus lid points bulging past the hinge side.

    Lid points lie beyond the local +Y long side, within its central 80 %.
    """
    rng = np.random.default_rng(seed)
    hx, hy = model.length / 2, model.width / 2
    local = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
    pts = []
    for i in range(4):
        p, q = local[i], local[(i + 1) % 4]
        n = max(int(np.ceil(np.linalg.norm(q - p) / spacing)), 1)
        t = np.arange(n)[:, None] / n
        pts.append(p + t * (q - p))
    if n_lid:
        xs = rng.uniform(-0.8 * hx, 0.8 * hx, n_lid)
        ys = hy + rng.uniform(0.0, max_bump, n_lid)
        pts.append(np.stack([xs, ys], axis=1))
    local_pts = np.concatenate(pts)
    return local_pts @ rot2(yaw).T + np.asarray(center, dtype=float)
