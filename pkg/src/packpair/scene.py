"""World snapshot shared by the planner and the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from shapely.geometry import MultiPoint, Polygon as ShapelyPolygon

from .catalog import BoxModel, ShoeModel
from .perception import BoxPose, KeypointSet, ShoePose, ShoeState, synthesize_keypoints
from .reorientation import GripperModel


@dataclass(frozen=True)
class ShoeRecord:
    id: int
    model: ShoeModel
    state: ShoeState
    pose: ShoePose
    in_box: bool = False
    # perceived keypoints; None means "read them off the pose without noise"
    keypoints: Optional[KeypointSet] = field(default=None, compare=False)

    def observed_keypoints(self) -> KeypointSet:
        if self.keypoints is not None:
            return self.keypoints
        return synthesize_keypoints(self.model, self.pose, self.state)

    def footprint(self) -> ShapelyPolygon:
        """Planar convex hull of the shoe's bounding box under its pose."""
        m = self.model
        R = self.pose.matrix()
        o = np.array(self.pose.position)
        corners = [o + R @ np.array([x, y, z])
                   for x in (-m.length / 2, m.length / 2)
                   for y in (-m.width / 2, m.width / 2)
                   for z in (0.0, m.height)]
        return MultiPoint([(c[0], c[1]) for c in corners]).convex_hull


@dataclass(frozen=True)
class SceneState:
    shoes: tuple[ShoeRecord, ShoeRecord]
    box_model: BoxModel
    box: BoxPose
    table_height: float = 0.0
    gripper: GripperModel = GripperModel()
    placed_order: tuple[int, ...] = ()
    held: Optional[int] = None

    def __post_init__(self):
        ids = sorted(r.id for r in self.shoes)
        if ids != [1, 2]:
            raise ValueError("a scene holds shoes 1 and 2")
        object.__setattr__(self, "shoes", tuple(sorted(self.shoes, key=lambda r: r.id)))

    def shoe(self, shoe_id: int) -> ShoeRecord:
        return self.shoes[shoe_id - 1]

    def other(self, shoe_id: int) -> ShoeRecord:
        return self.shoes[2 - shoe_id]

    def with_shoe(self, rec: ShoeRecord, **changes) -> "SceneState":
        shoes = tuple(rec if r.id == rec.id else r for r in self.shoes)
        return replace(self, shoes=shoes, **changes)

    def box_footprint(self) -> ShapelyPolygon:
        return ShapelyPolygon([tuple(c) for c in self.box.corners])

    def distance_to_box(self, shoe_id: int) -> float:
        p = np.array(self.shoe(shoe_id).pose.position[:2])
        return float(np.linalg.norm(p - self.box.center))

    def overlaps(self) -> list[str]:
        """Violations of the table-layout invariants (empty when valid)."""
        problems = []
        table = [r for r in self.shoes if not r.in_box]
        if len(table) == 2 and table[0].footprint().intersection(table[1].footprint()).area > 1e-6:
            problems.append("shoes overlap")
        for r in table:
            if r.footprint().intersection(self.box_footprint()).area > 1e-6:
                problems.append(f"shoe {r.id} overlaps the box")
        return problems

    def summary(self) -> str:
        parts = []
        for r in self.shoes:
            x, y, _ = r.pose.position
            where = "box" if r.in_box else "table"
            parts.append(f"s{r.id}={r.state.value}@{where}({x:.1f},{y:.1f},{math.degrees(r.pose.yaw):.1f})")
        return " ".join(parts)
