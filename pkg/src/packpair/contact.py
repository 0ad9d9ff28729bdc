"""Quasi-static reorientation of a top-state shoe released across the box rim.

Cross-section frame: lateral axis = shoe body +Y, rim edge at the origin, the
box interior (the step down) on the side given by the sign of the offset.
A positive offset rolls the shoe toward +Y, landing it on its inside face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catalog import ShoeModel
from .errors import Infeasible, NoRotation
from .geometry import Pose, perp_ccw
from .perception import BoxPose, ShoePose, ShoeState

DEFAULT_OFFSET = 10.0
TESTED_OFFSETS = (5.0, 10.0, 15.0, 20.0, 25.0)
TORQUE_EPS = 1e-9  # mm; lever arms below this do not start a rotation


@dataclass(frozen=True)
class CrossSection:
    width: float
    height: float
    com_height: float
    com_lateral: float = 0.0  # along body +Y from the midline

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("cross-section must have positive size")
        if not 0 < self.com_height < self.height:
            raise ValueError("com_height must lie strictly inside the section")
        if not abs(self.com_lateral) < self.width / 2:
            raise ValueError("|com_lateral| must be below half the width")

    @classmethod
    def of(cls, model: ShoeModel) -> "CrossSection":
        return cls(model.width, model.height, model.effective_com_height)


@dataclass(frozen=True)
class EdgePlacement:
    offset: float  # signed, mm; |offset| is the midline-to-rim distance
    contact_point: Pose
    drop_height: float
    release: Optional[ShoePose] = None

    def __post_init__(self):
        if self.offset == 0:
            raise ValueError("offset must be non-zero")
        if not self.drop_height >= 0:
            raise ValueError("drop_height must be non-negative")


@dataclass(frozen=True)
class ContactOutcome:
    final_state: ShoeState
    rotation_at_floor: float
    settled: bool
    settled_com_height: float  # relative to the rim; release height is com_height


def side_for_offset(offset: float) -> ShoeState:
    return ShoeState.SIDE_OUTSIDE_UP if offset > 0 else ShoeState.SIDE_INSIDE_UP


def predict_contact_outcome(cs: CrossSection, placement: EdgePlacement) -> ContactOutcome:
    """Two-phase pivot model.

    Phase 1 rotates about the rim until the leading sole corner meets the box
    floor (or the sole lies against the wall). Phase 2 moves the pivot to that
    floor corner: a centre of mass beyond it rolls on to the side pose,
    otherwise the shoe stays on its sole.
    """
    d = placement.offset
    s = math.copysign(1.0, d)
    a = abs(d)
    c = s * cs.com_lateral
    half = cs.width / 2
    if a >= half:
        raise ValueError("rim must lie under the sole (|offset| < width/2)")
    lever = a + c
    if lever <= TORQUE_EPS:
        raise NoRotation(f"centre of mass is {lever:.3g} mm past the rim")
    reach = a + half  # rim to leading sole corner
    h = placement.drop_height
    side = side_for_offset(d)
    if h >= reach:
        return ContactOutcome(side, math.pi / 2, True, -h + half - c)
    phi = math.asin(h / reach)
    com_x = lever * math.cos(phi) + cs.com_height * math.sin(phi)
    if com_x > reach * math.cos(phi):
        return ContactOutcome(side, phi, True, -h + half - c)
    resting = -lever * math.sin(phi) + cs.com_height * math.cos(phi)
    return ContactOutcome(ShoeState.BOTTOM, phi, True, resting)


def plan_edge_placement(box: BoxPose, model: ShoeModel, desired_final: ShoeState,
                        second_shoe: bool = True, *, wall_height: float,
                        first_pose: Optional[ShoePose] = None, table_height: float = 0.0,
                        offset: float = DEFAULT_OFFSET) -> EdgePlacement:
    """Rim contact point and signed offset that land the shoe in ``desired_final``.

    The shoe X axis runs along the box long axis, opposed to ``first_pose``
    (default: pC toward pB). The rim used is the long side the shoe rolls away from.
    """
    if not desired_final.is_side:
        raise ValueError("edge placement targets a side variant")
    u = box.long_axis
    if first_pose is not None:
        x = -np.sign(float(first_pose.x_axis @ u)) * u
    else:
        x = -u
    yaw = math.atan2(x[1], x[0])
    sign = 1.0 if desired_final is ShoeState.SIDE_OUTSIDE_UP else -1.0
    roll_dir = sign * perp_ccw(x)
    pB, pC = np.array(box.pB.position[:2]), np.array(box.pC.position[:2])
    along = pB + (2.0 / 3.0 if second_shoe else 1.0 / 3.0) * (pC - pB)
    centre = box.center
    rim = centre - roll_dir * box.inner_width / 2 + u * float((along - centre) @ u)
    rim_z = table_height + wall_height
    contact = Pose((rim[0], rim[1], rim_z), yaw=yaw)
    cs = CrossSection.of(model)
    tried = []
    for mag in dict.fromkeys((offset,) + TESTED_OFFSETS):
        if mag >= cs.width / 2:
            continue
        release_xy = rim + roll_dir * mag
        p = EdgePlacement(sign * mag, contact, wall_height,
                          ShoePose.for_state((release_xy[0], release_xy[1], rim_z), yaw, ShoeState.TOP))
        try:
            out = predict_contact_outcome(cs, p)
        except NoRotation:
            continue
        tried.append(mag)
        if out.final_state is desired_final:
            return p
    raise Infeasible(f"no offset in {tried} lands {model.name} in {desired_final.value}")
