"""Pair-packing task planner and target-configuration check.

A plan has a pre-placement stage (push/topple primitives until the pair is
placeable) and a placement stage (side shoe first, the other shoe second,
either placed directly or released across the box rim).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .catalog import ShoeModel
from .contact import EdgePlacement, plan_edge_placement
from .errors import Infeasible, NoSolution, NotPlaced, ShoeBoxMismatch, Unplannable
from .geometry import Pose
from .perception import (
    BoxPose,
    GraspPose,
    ShoePose,
    ShoeState,
    grasp_pose,
    rest_height,
    state_from_orientation,
    synthesize_keypoints,
)
from .reorientation import PlanKind, TopplingPlan, plan_toppling, roll_over_edge
from .scene import SceneState

T, B = ShoeState.TOP, ShoeState.BOTTOM
SI, SO = ShoeState.SIDE_INSIDE_UP, ShoeState.SIDE_OUTSIDE_UP
ANGLE_TOL = math.radians(5.0)


class Mode(enum.Enum):
    WITH = "with"
    WITHOUT = "without"


class PairCombination(enum.Enum):
    TOP_TOP = "top+top"
    TOP_SIDE = "top+side"
    TOP_BOTTOM = "top+bottom"
    SIDE_SIDE_MISMATCHED = "side+side(mismatched)"
    SIDE_SIDE_MATCHED = "side+side(matched)"
    SIDE_BOTTOM = "side+bottom"
    BOTTOM_BOTTOM = "bottom+bottom"


# toppling counts per initial combination, in PairCombination order
TOPPLE_TABLE = {
    Mode.WITHOUT: dict(zip(PairCombination, (2, 1, 2, 2, 0, 1, 2))),
    Mode.WITH: dict(zip(PairCombination, (1, 0, 1, 1, 0, 1, 2))),
}


def classify_pair(s1: ShoeState, s2: ShoeState) -> PairCombination:
    kinds = sorted("side" if s.is_side else s.value for s in (s1, s2))
    if kinds == ["side", "side"]:
        return PairCombination.SIDE_SIDE_MATCHED if s1 is not s2 else PairCombination.SIDE_SIDE_MISMATCHED
    return {
        ("top", "top"): PairCombination.TOP_TOP,
        ("side", "top"): PairCombination.TOP_SIDE,
        ("bottom", "top"): PairCombination.TOP_BOTTOM,
        ("bottom", "side"): PairCombination.SIDE_BOTTOM,
        ("bottom", "bottom"): PairCombination.BOTTOM_BOTTOM,
    }[tuple(kinds)]


def required_topples(c: PairCombination, mode: Mode) -> int:
    return TOPPLE_TABLE[mode][c]


# --- actions -----------------------------------------------------------------


@dataclass(frozen=True)
class DetectScene:
    kind = "detect"
    shoe = None


@dataclass(frozen=True)
class Push:
    shoe: int
    plan: TopplingPlan
    kind = "push"


@dataclass(frozen=True)
class Topple:
    shoe: int
    plan: TopplingPlan
    kind = "topple"


@dataclass(frozen=True)
class Grasp:
    shoe: int
    grasp: GraspPose
    kind = "grasp"


@dataclass(frozen=True)
class PlaceDirect:
    shoe: int
    target: Pose
    kind = "place-direct"


@dataclass(frozen=True)
class PlaceOnEdge:
    shoe: int
    placement: EdgePlacement
    kind = "place-on-edge"


Action = Union[DetectScene, Push, Topple, Grasp, PlaceDirect, PlaceOnEdge]


@dataclass(frozen=True)
class PackingPlan:
    actions: tuple
    mode: Mode
    predicted_topple_count: int
    combination: Optional[PairCombination] = None

    @property
    def topple_count(self) -> int:
        return sum(isinstance(a, (Push, Topple)) for a in self.actions)

    @property
    def place_actions(self) -> list:
        return [a for a in self.actions if isinstance(a, (PlaceDirect, PlaceOnEdge))]


# --- placement poses ----------------------------------------------------------


def _trisection(box: BoxPose, fraction: float) -> np.ndarray:
    pB, pC = np.array(box.pB.position[:2]), np.array(box.pC.position[:2])
    return pB + fraction * (pC - pB)


def placement_pose_first(box: BoxPose, shoe: ShoeModel, state: ShoeState = SO,
                         table_height: float = 0.0) -> Pose:
    """One third of the way from pB to pC, sole normal toward the pA side."""
    if not state.is_side:
        raise ValueError("the first shoe is placed in a side state")
    if shoe.length > box.inner_length:
        raise ShoeBoxMismatch(f"{shoe.name} ({shoe.length:g} mm) is longer than the box ({box.inner_length:g} mm)")
    u = box.long_axis
    # outside-up puts the sole normal on the left of X, inside-up on the right
    x = u if state is SO else -u
    xy = _trisection(box, 1.0 / 3.0)
    return Pose((xy[0], xy[1], table_height + rest_height(shoe, state)),
                roll=state.roll, yaw=math.atan2(x[1], x[0]))


def placement_pose_second(box: BoxPose, first: Pose, second_state: ShoeState, shoe: ShoeModel,
                          *, wall_height: float, table_height: float = 0.0) -> Union[Pose, EdgePlacement]:
    """Direct pose two thirds along pB->pC for a side shoe, rim placement for a top shoe."""
    if shoe.length > box.inner_length:
        raise ShoeBoxMismatch(f"{shoe.name} ({shoe.length:g} mm) is longer than the box ({box.inner_length:g} mm)")
    first_state = state_from_orientation(first.matrix())
    first_shoe = ShoePose(first.position, first.yaw, first.roll)
    if second_state is T:
        return plan_edge_placement(box, shoe, first_state.complement, True, wall_height=wall_height,
                                   first_pose=first_shoe, table_height=table_height)
    if not second_state.is_side:
        raise ValueError("the second shoe is placed in a side or top state")
    xy = _trisection(box, 2.0 / 3.0)
    return Pose((xy[0], xy[1], table_height + rest_height(shoe, second_state)),
                roll=second_state.roll, yaw=first.yaw + math.pi)


# --- planning -------------------------------------------------------------------


class _Work:
    """Mutable copy of the shoes' predicted states while a plan is built."""

    def __init__(self, scene: SceneState):
        self.scene = scene
        self.state = {r.id: r.state for r in scene.shoes}
        self.pose = {r.id: r.pose for r in scene.shoes}
        self.keypoints = {r.id: r.observed_keypoints() for r in scene.shoes if not r.in_box}
        self.actions: list = []

    def topple(self, sid: int, target: ShoeState) -> None:
        rec = self.scene.shoe(sid)
        plan = plan_toppling(self.keypoints[sid], self.pose[sid], self.state[sid],
                             self.scene.table_height, self.scene.gripper, target)
        pose, state = roll_over_edge(rec.model, self.pose[sid], plan.rolls_toward, self.scene.table_height)
        if state is not plan.target_state:
            raise Unplannable(f"shoe {sid}: {plan.kind.value} lands in {state.value}, not {plan.target_state.value}")
        self.actions.append((Push if plan.kind is PlanKind.PUSH else Topple)(sid, plan))
        self.pose[sid], self.state[sid] = pose, state
        self.keypoints[sid] = synthesize_keypoints(rec.model, pose, state)


def _by_clearance(scene: SceneState, ids) -> list[int]:
    """Farther from the box first; ties to the lower id."""
    return sorted(ids, key=lambda i: (-round(scene.distance_to_box(i), 9), i))


def _branches(scene: SceneState, mode: Mode):
    """Candidate (pre-placement steps, first id, second id) in preference order."""
    s = {r.id: r.state for r in scene.shoes}
    c = classify_pair(s[1], s[2])
    with_contact = mode is Mode.WITH
    ids = (1, 2)

    def one(kind):
        return next(i for i in ids if (s[i].is_side if kind == "side" else s[i] is kind))

    if c is PairCombination.SIDE_SIDE_MATCHED:
        yield [], 1, 2
    elif c is PairCombination.TOP_SIDE:
        side, top = one("side"), one(T)
        yield ([] if with_contact else [(top, s[side].complement)]), side, top
    elif c is PairCombination.TOP_TOP:
        for t in _by_clearance(scene, ids):
            o = 3 - t
            if with_contact:
                yield [(t, SI)], t, o
            else:
                yield [(t, SI), (o, SO)], t, o
    elif c is PairCombination.TOP_BOTTOM:
        bot, top = one(B), one(T)
        yield ([(bot, SI)] if with_contact else [(bot, SI), (top, SO)]), bot, top
    elif c is PairCombination.SIDE_SIDE_MISMATCHED:
        for t in _by_clearance(scene, ids):
            o = 3 - t
            if with_contact:
                yield [(t, T)], o, t
            else:
                yield [(t, T), (t, s[o].complement)], o, t
    elif c is PairCombination.SIDE_BOTTOM:
        side, bot = one("side"), one(B)
        yield [(bot, s[side].complement)], side, bot
    else:
        a, b = _by_clearance(scene, ids)
        yield [(a, SI), (b, SO)], min(ids), max(ids)


def _place_second_only(scene: SceneState, mode: Mode) -> PackingPlan:
    """Finish a scene whose first shoe is already boxed."""
    first_id = scene.placed_order[0]
    first = scene.shoe(first_id)
    sid = 3 - first_id
    w = _Work(scene)
    want = first.state.complement
    st = w.state[sid]
    if st is B:
        w.topple(sid, want)
    elif st.is_side and st is not want:
        w.topple(sid, T)
        if mode is Mode.WITHOUT:
            w.topple(sid, want)
    elif st is T and mode is Mode.WITHOUT:
        w.topple(sid, want)
    n = len(w.actions)
    _append_second(w, sid, first.pose.as_pose())
    return PackingPlan(tuple([DetectScene()] + w.actions), mode, n)


def _append_second(w: _Work, sid: int, first_target: Pose) -> None:
    scene = w.scene
    rec = scene.shoe(sid)
    w.actions.append(Grasp(sid, grasp_pose(w.pose[sid])))
    target = placement_pose_second(scene.box, first_target, w.state[sid], rec.model,
                                   wall_height=scene.box_model.wall_height,
                                   table_height=scene.table_height)
    w.actions.append(PlaceOnEdge(sid, target) if isinstance(target, EdgePlacement) else PlaceDirect(sid, target))


def plan_packing(scene: SceneState, mode: Mode = Mode.WITH) -> PackingPlan:
    if len(scene.placed_order) == 2:
        return PackingPlan((DetectScene(),), mode, 0)
    if len(scene.placed_order) == 1:
        return _place_second_only(scene, mode)
    combo = classify_pair(scene.shoe(1).state, scene.shoe(2).state)
    errors = []
    for steps, first, second in _branches(scene, mode):
        w = _Work(scene)
        try:
            for sid, target in steps:
                w.topple(sid, target)
            n = len(w.actions)
            first_rec = scene.shoe(first)
            w.actions.append(Grasp(first, grasp_pose(w.pose[first])))
            target = placement_pose_first(scene.box, first_rec.model, w.state[first], scene.table_height)
            w.actions.append(PlaceDirect(first, target))
            _append_second(w, second, target)
        except (NoSolution, Infeasible) as e:
            errors.append(str(e))
            continue
        return PackingPlan(tuple([DetectScene()] + w.actions), mode, n, combo)
    raise Unplannable(f"{combo.value}: " + "; ".join(errors))


# --- verification ------------------------------------------------------------------


@dataclass(frozen=True)
class TargetConfigReport:
    states_ok: bool
    pairing_ok: bool
    box_alignment_ok: bool
    mutual_opposition_ok: bool

    @property
    def overall(self) -> bool:
        return self.states_ok and self.pairing_ok and self.box_alignment_ok and self.mutual_opposition_ok

    def lines(self) -> list[str]:
        return [
            f"states_ok={str(self.states_ok).lower()}",
            f"pairing_ok={str(self.pairing_ok).lower()}",
            f"box_alignment_ok={str(self.box_alignment_ok).lower()}",
            f"mutual_opposition_ok={str(self.mutual_opposition_ok).lower()}",
            f"overall={str(self.overall).lower()}",
        ]


def _angle(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    c = float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(max(-1.0, min(1.0, c)))


def verify_target_config(scene: SceneState) -> TargetConfigReport:
    for r in scene.shoes:
        if not r.in_box or not scene.box.contains(r.pose.position[:2]):
            raise NotPlaced(f"shoe {r.id} is not inside the box footprint")
    s1, s2 = scene.shoe(1).state, scene.shoe(2).state
    states_ok = s1.is_side and s2.is_side
    pairing_ok = states_ok and s1 is not s2
    first_id = scene.placed_order[0] if scene.placed_order else 1
    first, second = scene.shoe(first_id), scene.other(first_id)
    z = first.pose.matrix()[:, 2]
    n = scene.box.hinge_normal
    alignment = abs(z[2]) <= math.sin(ANGLE_TOL) and _angle(z[:2], n) <= ANGLE_TOL
    opposed = abs(_angle(first.pose.x_axis, second.pose.x_axis) - math.pi) <= ANGLE_TOL
    return TargetConfigReport(states_ok, pairing_ok, alignment, opposed)
