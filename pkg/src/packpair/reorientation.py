"""Primitive-based reorientation: push plans and rotation toppling plans.

Rotation kinematics (side and top states): the contact point sits at radius
``r`` from the toppling edge and sweeps the toppling angle ``theta``; the
gripper tip sweeps ``alpha`` about a fixed wrist at distance ``L`` from the
tip, so both chords match::

    r sin(theta/2) = L sin(alpha/2)

with ``r = W`` for the side case and ``r = sqrt((W/2)^2 + H^2)`` for the top
case.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catalog import ShoeModel
from .errors import InconsistentKeypoints, Infeasible, NoSolution, WrongState
from .geometry import Pose, perp_ccw, unit
from .perception import (
    KeypointSet,
    ShoePose,
    ShoeState,
    classify_state,
    rest_height,
    state_from_orientation,
)

PUSH_OVERTRAVEL = 1.2
UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class GripperModel:
    length: float = 200.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("gripper length must be positive")


@dataclass(frozen=True)
class ShoeExtent:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("shoe extent must be positive")


@dataclass(frozen=True)
class TopplingSolution:
    theta: float
    alpha: float
    beta: float
    beta_max: float


class PlanKind(enum.Enum):
    PUSH = "push"
    ROTATE_SIDE = "rotate-side"
    ROTATE_TOP = "rotate-top"


@dataclass(frozen=True)
class TopplingPlan:
    """Gripper start/end poses for one primitive.

    ``direction`` is horizontal and perpendicular to the shoe X axis. For a
    push it is the push direction. For rotations it points from the toppling
    edge toward the contact side of the shoe; the shoe rolls the other way.
    """

    kind: PlanKind
    start: Pose
    end: Pose
    solution: Optional[TopplingSolution]
    direction: tuple[float, float]
    pivot: tuple[float, float, float]
    target_state: ShoeState

    @property
    def rolls_toward(self) -> np.ndarray:
        d = np.array(self.direction)
        return d if self.kind is PlanKind.PUSH else -d


def _lateral(pose: ShoePose) -> np.ndarray:
    return perp_ccw(pose.x_axis)


def _midpoint(k: KeypointSet) -> np.ndarray:
    return (np.array(k.toe) + np.array(k.heel)) / 2


def shoe_extent(k: KeypointSet, pose: ShoePose, state: ShoeState, table_height: float) -> ShoeExtent:
    """Cross-section (W, H) seen by the toppling kinematics.

    Top/bottom: W spans inside to outside. Side: W spans the sole line
    (toe/heel) to the topline. H is the highest visible keypoint above the table.
    """
    lat = _lateral(pose)
    vis = k.visible()
    if state.is_side:
        if k.topline is None:
            raise InconsistentKeypoints("side state needs a visible topline")
        w = abs(float((np.array(k.topline) - _midpoint(k))[:2] @ lat))
    else:
        if k.inside is None or k.outside is None:
            raise InconsistentKeypoints(f"{state.value} state needs both lateral keypoints")
        w = abs(float((np.array(k.inside) - np.array(k.outside))[:2] @ lat))
    h = max(float(p[2]) for p in vis.values()) - table_height
    if w <= 0 or h <= 0:
        raise InconsistentKeypoints("keypoints give a non-positive extent")
    return ShoeExtent(w, h)


def solve_side_toppling(ext: ShoeExtent, g: GripperModel) -> TopplingSolution:
    W, H, L = ext.width, ext.height, g.length
    theta = math.atan2(H, W)
    s = W / L * math.sin(theta / 2)
    if s > 1.0:
        raise NoSolution(f"side toppling needs sin(alpha/2) = {s:.4f} > 1")
    alpha = 2.0 * math.asin(s)
    beta = alpha / 2 + theta / 2
    if W >= L:
        raise Infeasible(f"shoe width {W:.1f} mm is not below the gripper length {L:.1f} mm")
    beta_max = math.acos(1.0 - W / L)
    sol = TopplingSolution(theta, alpha, beta, beta_max)
    if beta > beta_max:
        raise Infeasible(f"initial angle {math.degrees(beta):.2f} deg exceeds {math.degrees(beta_max):.2f} deg", sol)
    return sol


def solve_top_toppling(ext: ShoeExtent, g: GripperModel) -> TopplingSolution:
    W, H, L = ext.width, ext.height, g.length
    theta = math.atan2(W, H)
    radius = math.hypot(W / 2, H)
    s = radius / L * math.sin(theta / 2)
    if s > 1.0:
        raise NoSolution(f"top toppling needs sin(alpha/2) = {s:.4f} > 1")
    alpha = 2.0 * math.asin(s)
    beta = alpha / 2 + theta / 2 - math.atan2(W / 2, H)
    if H >= L:
        raise Infeasible(f"shoe height {H:.1f} mm is not below the gripper length {L:.1f} mm")
    beta_max = math.acos(1.0 - H / L)
    sol = TopplingSolution(theta, alpha, beta, beta_max)
    if beta < 0 or beta > beta_max:
        raise Infeasible(f"initial angle {math.degrees(beta):.2f} deg outside [0, {math.degrees(beta_max):.2f}] deg", sol)
    return sol


def topple_direction(k: KeypointSet, pose: ShoePose) -> np.ndarray:
    """Unit vector from the sole line toward the topline, perpendicular to the shoe X axis."""
    if k.topline is None or (k.inside is not None and k.outside is not None):
        raise InconsistentKeypoints("toppling direction needs a side-state keypoint set")
    lat = _lateral(pose)
    offset = float((np.array(k.topline) - _midpoint(k))[:2] @ lat)
    if abs(offset) < 1e-9:
        raise InconsistentKeypoints("topline lies on the sole line")
    return math.copysign(1.0, offset) * lat


def _rotation_poses(pivot, m, radius, phi0, sol: TopplingSolution, g: GripperModel, pose: ShoePose):
    """Gripper tip poses before and after sweeping ``alpha`` about the wrist."""
    theta, alpha, L = sol.theta, sol.alpha, g.length
    bis = phi0 + theta / 2
    wrist = (radius * math.cos(theta / 2) + L * math.cos(alpha / 2)) * np.array([math.cos(bis), math.sin(bis)])
    c0 = radius * np.array([math.cos(phi0), math.sin(phi0)])
    c1 = radius * np.array([math.cos(phi0 + theta), math.sin(phi0 + theta)])
    m3 = np.array([m[0], m[1], 0.0])
    sigma = math.copysign(1.0, float(m @ _lateral(pose)))

    def to_world(p):
        return np.asarray(pivot) + p[0] * m3 + p[1] * UP

    def tip_pose(c):
        a = unit(c - wrist)  # approach direction, wrist -> tip
        roll = math.atan2(sigma * a[0], -a[1])
        return Pose(tuple(to_world(c)), roll=roll, yaw=pose.yaw)

    return tip_pose(c0), tip_pose(c1)


def push_plan(k: KeypointSet, pose: ShoePose, target_side: ShoeState, table_height: float = 0.0,
              overtravel: float = PUSH_OVERTRAVEL) -> TopplingPlan:
    """Straight push over a lateral sole edge; the pushed-from face ends up."""
    if classify_state(k) is not ShoeState.BOTTOM:
        raise WrongState("push plans apply to bottom-state shoes")
    if not target_side.is_side:
        raise ValueError("push target must be a side variant")
    inside, outside = np.array(k.inside), np.array(k.outside)
    src, dst = (outside, inside) if target_side is ShoeState.SIDE_OUTSIDE_UP else (inside, outside)
    lat = _lateral(pose)
    across = float((dst - src)[:2] @ lat)
    if abs(across) < 1e-9:
        raise InconsistentKeypoints("inside and outside keypoints coincide laterally")
    d = math.copysign(1.0, across) * lat
    width = abs(across)
    mid = _midpoint(k)
    top = max(float(p[2]) for p in k.visible().values())
    z = table_height + (top - table_height) / 2
    contact = mid[:2] - d * width / 2
    start = contact - d * width
    end = start + d * width * overtravel
    yaw = math.atan2(d[1], d[0])
    pivot = mid[:2] + d * width / 2
    return TopplingPlan(
        PlanKind.PUSH,
        Pose((start[0], start[1], z), yaw=yaw),
        Pose((end[0], end[1], z), yaw=yaw),
        None,
        (float(d[0]), float(d[1])),
        (float(pivot[0]), float(pivot[1]), table_height),
        target_side,
    )


def plan_toppling(k: KeypointSet, pose: ShoePose, state: ShoeState, table_height: float,
                  g: GripperModel, target: Optional[ShoeState] = None) -> TopplingPlan:
    """Dispatch on state: push from bottom, rotate from side or top.

    ``target`` picks the side variant for bottom and top shoes; side shoes
    always go to top.
    """
    if state is ShoeState.BOTTOM:
        return push_plan(k, pose, target or ShoeState.SIDE_INSIDE_UP, table_height)
    mid = _midpoint(k)
    if state.is_side:
        m = topple_direction(k, pose)
        ext = shoe_extent(k, pose, state, table_height)
        sol = solve_side_toppling(ext, g)
        pivot = np.array([mid[0], mid[1], table_height])
        start, end = _rotation_poses(pivot, m, ext.width, 0.0, sol, g, pose)
        return TopplingPlan(PlanKind.ROTATE_SIDE, start, end, sol, (float(m[0]), float(m[1])),
                            tuple(float(c) for c in pivot), ShoeState.TOP)
    target = target or ShoeState.SIDE_INSIDE_UP
    if not target.is_side:
        raise ValueError("top toppling target must be a side variant")
    ext = shoe_extent(k, pose, state, table_height)
    sol = solve_top_toppling(ext, g)
    up_kp, down_kp = (k.outside, k.inside) if target is ShoeState.SIDE_OUTSIDE_UP else (k.inside, k.outside)
    lat = _lateral(pose)
    m = math.copysign(1.0, float((np.array(up_kp) - np.array(down_kp))[:2] @ lat)) * lat
    edge = mid[:2] - m * ext.width / 2
    pivot = np.array([edge[0], edge[1], table_height])
    phi0 = math.atan2(ext.height, ext.width / 2)
    start, end = _rotation_poses(pivot, m, math.hypot(ext.width / 2, ext.height), phi0, sol, g, pose)
    return TopplingPlan(PlanKind.ROTATE_TOP, start, end, sol, (float(m[0]), float(m[1])),
                        tuple(float(c) for c in pivot), target)


def _rodrigues(axis, angle: float) -> np.ndarray:
    k = unit(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def roll_over_edge(model: ShoeModel, pose: ShoePose, motion, table_height: float,
                   quarter_turns: int = 1) -> tuple[ShoePose, ShoeState]:
    """Rest pose after tipping the shoe's rectangular cross-section over its
    lower edge on the ``motion`` side, ``quarter_turns`` times."""
    lat = _lateral(pose)
    m = math.copysign(1.0, float(np.asarray(motion, dtype=float)[:2] @ lat)) * lat
    m3 = np.array([m[0], m[1], 0.0])
    R = pose.matrix()
    origin = np.array(pose.position)
    hw, h = model.width / 2, model.height
    section = [np.array([0.0, y, z]) for y in (-hw, hw) for z in (0.0, h)]
    rot = _rodrigues(np.cross(UP, m3), math.pi / 2)
    for _ in range(quarter_turns):
        corners = [origin + R @ c for c in section]
        low = min(c[2] for c in corners)
        edge = max((c for c in corners if c[2] < low + 1e-6), key=lambda c: float(c @ m3))
        origin = edge + rot @ (origin - edge)
        R = rot @ R
    state = state_from_orientation(R)
    yaw = math.atan2(R[1, 0], R[0, 0])
    z = table_height + rest_height(model, state)
    return ShoePose.for_state((origin[0], origin[1], z), yaw, state), state
