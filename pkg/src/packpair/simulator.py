"""Deterministic quasi-static execution of packing plans.

Actions are discrete transitions: toppling primitives tip the shoe's
rectangular cross-section over a lower edge, placements set the pose, and a
rim release follows the contact model. Failures are injected from a seeded
generator; every action consumes the same number of draws so traces depend
only on (scene, plan, failure model).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .contact import CrossSection, predict_contact_outcome, side_for_offset
from .errors import InapplicableAction, NotPlaced, Unplannable
from .perception import (
    ShoePose,
    ShoeState,
    classify_state,
    estimate_shoe_pose,
    rest_height,
    synthesize_keypoints,
)
from .planner import (
    DetectScene,
    Grasp,
    Mode,
    PackingPlan,
    PlaceDirect,
    PlaceOnEdge,
    Push,
    TargetConfigReport,
    Topple,
    plan_packing,
    verify_target_config,
)
from .reorientation import PlanKind, roll_over_edge
from .scene import SceneState, ShoeRecord

GRASP_POSITION_TOL = 15.0  # mm
GRASP_YAW_TOL = math.radians(10.0)
MAX_REPLANS = 5


class Outcome(enum.Enum):
    SUCCESS = "success"
    OVER_ROTATION = "over-rotation"
    SIDE_SWAP = "side-swap"
    GRASP_MISS = "grasp-miss"
    CONTACT_MISS = "contact-miss"

    @property
    def failed(self) -> bool:
        return self is not Outcome.SUCCESS


@dataclass(frozen=True)
class FailureModel:
    keypoint_noise_sigma: float = 0.0
    side_swap_probability: float = 0.0
    over_rotation_probability: float = 0.0
    seed: int = 0
    # over-rotation chance for side->top on structurally hard shoes
    hard_side_topple_probability: float = 0.0
    # (global step index, outcome) pairs that always fire
    forced: tuple[tuple[int, Outcome], ...] = ()

    def __post_init__(self):
        if self.keypoint_noise_sigma < 0:
            raise ValueError("keypoint_noise_sigma must be non-negative")
        for name in ("side_swap_probability", "over_rotation_probability", "hard_side_topple_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def forced_at(self, step: Optional[int]) -> set:
        return {o for s, o in self.forced if s == step}


@dataclass(frozen=True)
class TraceStep:
    index: int
    action: object
    pre: str
    post: str
    outcome: Outcome

    def line(self) -> str:
        shoe = "-" if self.action.shoe is None else self.action.shoe
        return f"step={self.index} action={self.action.kind} shoe={shoe} outcome={self.outcome.value}"


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[TraceStep, ...]
    final_report: TargetConfigReport
    placed: bool
    replans: int = 0
    final_scene: Optional[SceneState] = field(default=None, compare=False)

    @property
    def success(self) -> bool:
        return self.placed and self.final_report.overall

    @property
    def failed_step(self) -> Optional[TraceStep]:
        return next((s for s in self.steps if s.outcome.failed), None)

    def text(self) -> str:
        return "\n".join(s.line() for s in self.steps)


def _applicable(rec: ShoeRecord, a) -> bool:
    if isinstance(a, Push):
        return rec.state is ShoeState.BOTTOM
    kind = a.plan.kind
    if kind is PlanKind.ROTATE_SIDE:
        return rec.state.is_side
    return rec.state is ShoeState.TOP


def execute_action(scene: SceneState, a, f: FailureModel, rng: np.random.Generator,
                   step: Optional[int] = None) -> tuple[SceneState, Outcome]:
    draws = rng.random(2)  # [side swap, over-rotation]
    forced = f.forced_at(step)
    if isinstance(a, DetectScene):
        return scene, Outcome.SUCCESS
    rec = scene.shoe(a.shoe)

    if isinstance(a, (Push, Topple)):
        if rec.in_box or scene.held is not None or not _applicable(rec, a):
            raise InapplicableAction(f"{a.kind} {a.plan.kind.value} on shoe {rec.id} in {rec.state.value}")
        motion = a.plan.rolls_toward
        turns = 1
        outcome = Outcome.SUCCESS
        swappable = a.plan.kind in (PlanKind.PUSH, PlanKind.ROTATE_TOP)
        if swappable and (Outcome.SIDE_SWAP in forced or draws[0] < f.side_swap_probability):
            motion, outcome = -motion, Outcome.SIDE_SWAP
        p_over = f.over_rotation_probability
        if a.plan.kind is PlanKind.ROTATE_SIDE and rec.model.hard_side_topple:
            p_over = max(p_over, f.hard_side_topple_probability)
        if Outcome.OVER_ROTATION in forced or draws[1] < p_over:
            turns, outcome = 2, Outcome.OVER_ROTATION
        pose, state = roll_over_edge(rec.model, rec.pose, motion, scene.table_height, turns)
        if state is a.plan.target_state:
            outcome = Outcome.SUCCESS
        return scene.with_shoe(replace(rec, pose=pose, state=state, keypoints=None)), outcome

    if isinstance(a, Grasp):
        if rec.in_box or scene.held is not None:
            raise InapplicableAction(f"cannot grasp shoe {rec.id}")
        dp = np.linalg.norm(np.array(a.grasp.position[:2]) - np.array(rec.pose.position[:2]))
        dyaw = abs(math.remainder(a.grasp.yaw - rec.pose.yaw, 2 * math.pi))
        if dp > GRASP_POSITION_TOL or dyaw > GRASP_YAW_TOL:
            return scene, Outcome.GRASP_MISS
        return replace(scene, held=rec.id), Outcome.SUCCESS

    if scene.held != rec.id:
        raise InapplicableAction(f"shoe {rec.id} is not held")
    order = scene.placed_order + (rec.id,)

    if isinstance(a, PlaceDirect):
        t = a.target
        pose = ShoePose.for_state((t.position[0], t.position[1], scene.table_height + rest_height(rec.model, rec.state)),
                                  t.yaw, rec.state)
        new = replace(rec, pose=pose, in_box=True, keypoints=None)
        return scene.with_shoe(new, placed_order=order, held=None), Outcome.SUCCESS

    if isinstance(a, PlaceOnEdge):
        if rec.state is not ShoeState.TOP:
            raise InapplicableAction("rim placement needs a top-state shoe")
        pl = a.placement
        out = predict_contact_outcome(CrossSection.of(rec.model), pl)
        state = out.final_state
        second = len(scene.placed_order) > 0
        if state.is_side and not second and (Outcome.OVER_ROTATION in forced or draws[1] < f.over_rotation_probability):
            # past the side pose onto the sole-up face; a boxed first shoe blocks this
            state = ShoeState.BOTTOM
        release = pl.release
        u = scene.box.long_axis
        c = scene.box.center
        xy = c + u * float((np.array(release.position[:2]) - c) @ u)
        pose = ShoePose.for_state((xy[0], xy[1], scene.table_height + rest_height(rec.model, state)),
                                  release.yaw, state)
        new = replace(rec, pose=pose, state=state, in_box=True, keypoints=None)
        outcome = Outcome.SUCCESS if state is side_for_offset(pl.offset) else Outcome.CONTACT_MISS
        return scene.with_shoe(new, placed_order=order, held=None), outcome

    raise InapplicableAction(f"unknown action {a!r}")


def perceive(scene: SceneState, sigma: float, seed: int) -> SceneState:
    """Replace table shoes' states/poses by estimates from (noisy) synthetic keypoints."""
    out = scene
    for r in scene.shoes:
        if r.in_box:
            continue
        k = synthesize_keypoints(r.model, r.pose, r.state, sigma, seed * 7919 + r.id)
        st = classify_state(k)
        est = estimate_shoe_pose(k, st)
        out = out.with_shoe(replace(r, state=st, pose=est, keypoints=k))
    return out


def run_plan(scene: SceneState, plan: PackingPlan, f: FailureModel = FailureModel(),
             replan_on_failure: bool = False, max_replans: int = MAX_REPLANS) -> ExecutionTrace:
    rng = np.random.default_rng(f.seed)
    steps = []
    replans = 0
    queue = list(plan.actions)
    i = 0
    while queue:
        a = queue.pop(0)
        pre = scene.summary()
        scene, outcome = execute_action(scene, a, f, rng, step=i)
        steps.append(TraceStep(i, a, pre, scene.summary(), outcome))
        i += 1
        if not outcome.failed:
            continue
        if not replan_on_failure or replans >= max_replans or scene.held is not None:
            break
        replans += 1
        try:
            queue = list(plan_packing(perceive(scene, f.keypoint_noise_sigma, f.seed + replans), plan.mode).actions)
        except Unplannable:
            break
    try:
        report = verify_target_config(scene)
        placed = True
    except NotPlaced:
        report = TargetConfigReport(False, False, False, False)
        placed = False
    return ExecutionTrace(tuple(steps), report, placed, replans, scene)


def simulate(scene: SceneState, mode: Mode = Mode.WITH, f: FailureModel = FailureModel(),
             replan_on_failure: bool = False) -> tuple[PackingPlan, ExecutionTrace]:
    """Perceive, plan, execute."""
    plan = plan_packing(perceive(scene, f.keypoint_noise_sigma, f.seed), mode)
    return plan, run_plan(scene, plan, f, replan_on_failure)
