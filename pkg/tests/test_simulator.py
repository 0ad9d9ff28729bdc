import numpy as np
import pytest

from packpair.catalog import SHOES
from packpair.errors import InapplicableAction, NoBottomState
from packpair.perception import ShoeState
from packpair.planner import Grasp, Mode, PairCombination, Push, Topple, classify_pair, plan_packing
from packpair.reorientation import PlanKind
from packpair.scenario import admissible, random_scene
from packpair.simulator import FailureModel, Outcome, execute_action, perceive, run_plan, simulate

T, B, SI, SO = ShoeState.TOP, ShoeState.BOTTOM, ShoeState.SIDE_INSIDE_UP, ShoeState.SIDE_OUTSIDE_UP
PC = PairCombination


def first_of(plan, cls):
    return next(a for a in plan.actions if isinstance(a, cls))


def rng():
    return np.random.default_rng(0)


def test_push_reaches_commanded_variant():
    scene = random_scene(0, PC.SIDE_BOTTOM, 1)
    push = first_of(plan_packing(scene), Push)
    after, outcome = execute_action(scene, push, FailureModel(), rng())
    assert outcome is Outcome.SUCCESS
    assert after.shoe(push.shoe).state is push.plan.target_state


def test_rotate_top_lands_on_side():
    scene = random_scene(0, PC.TOP_TOP, 2)
    topple = first_of(plan_packing(scene), Topple)
    assert topple.plan.kind is PlanKind.ROTATE_TOP
    after, outcome = execute_action(scene, topple, FailureModel(), rng())
    assert outcome is Outcome.SUCCESS
    rec = after.shoe(topple.shoe)
    assert rec.state is topple.plan.target_state
    moved = np.subtract(rec.pose.position[:2], scene.shoe(topple.shoe).pose.position[:2])
    assert moved @ topple.plan.rolls_toward > 0


def test_over_rotated_push_ends_top():
    scene = random_scene(0, PC.BOTTOM_BOTTOM, 3)
    push = first_of(plan_packing(scene), Push)
    after, outcome = execute_action(scene, push, FailureModel(over_rotation_probability=1.0), rng())
    assert outcome is Outcome.OVER_ROTATION
    assert after.shoe(push.shoe).state is T


def test_side_swap_on_push():
    scene = random_scene(0, PC.BOTTOM_BOTTOM, 3)
    push = first_of(plan_packing(scene), Push)
    after, outcome = execute_action(scene, push, FailureModel(side_swap_probability=1.0), rng())
    assert outcome is Outcome.SIDE_SWAP
    assert after.shoe(push.shoe).state is push.plan.target_state.complement


def test_hard_side_topple_flag_keys_on_model():
    heel = SHOES[1]
    assert heel.hard_side_topple
    scene = random_scene(1, PC.SIDE_SIDE_MISMATCHED, 4)
    topple = first_of(plan_packing(scene), Topple)
    f = FailureModel(hard_side_topple_probability=1.0)
    _, outcome = execute_action(scene, topple, f, rng())
    assert outcome is Outcome.OVER_ROTATION
    sports = random_scene(0, PC.SIDE_SIDE_MISMATCHED, 4)
    _, outcome = execute_action(sports, first_of(plan_packing(sports), Topple), f, rng())
    assert outcome is Outcome.SUCCESS


def test_inapplicable_action():
    scene = random_scene(0, PC.BOTTOM_BOTTOM, 3)
    push = first_of(plan_packing(scene), Push)
    after, _ = execute_action(scene, push, FailureModel(), rng())
    with pytest.raises(InapplicableAction):
        execute_action(after, push, FailureModel(), rng())


def test_grasp_miss_on_bad_estimate():
    scene = random_scene(0, PC.SIDE_SIDE_MATCHED, 5)
    grasp = first_of(plan_packing(scene), Grasp)
    far = Grasp(grasp.shoe, type(grasp.grasp)((grasp.grasp.position[0] + 40, *grasp.grasp.position[1:]),
                                             grasp.grasp.yaw))
    after, outcome = execute_action(scene, far, FailureModel(), rng())
    assert outcome is Outcome.GRASP_MISS and after.held is None


CASES = [(ci, c) for ci in range(4) for c in PC if admissible(ci, c)]


@pytest.mark.parametrize("mode", list(Mode), ids=lambda m: m.value)
@pytest.mark.parametrize("ci,combo", CASES, ids=lambda x: getattr(x, "name", str(x)))
def test_zero_failure_runs_succeed(mode, ci, combo):
    for seed in range(3):
        _, trace = simulate(random_scene(ci, combo, seed), mode)
        assert trace.success
        assert all(s.outcome is Outcome.SUCCESS for s in trace.steps)


@pytest.mark.parametrize("ci", range(4))
def test_forced_over_rotation_recovers_in_one_replan(ci):
    scene = random_scene(ci, PC.TOP_TOP, 8)
    plan = plan_packing(scene)
    idx = next(i for i, a in enumerate(plan.actions) if isinstance(a, Topple))
    f = FailureModel(forced=((idx, Outcome.OVER_ROTATION),))
    failed = run_plan(scene, plan, f)
    assert not failed.success and failed.failed_step.index == idx
    trace = run_plan(scene, plan, f, replan_on_failure=True)
    assert trace.success and trace.replans == 1


def test_noisy_failing_runs_are_reproducible():
    f = FailureModel(keypoint_noise_sigma=2.0, side_swap_probability=0.2, over_rotation_probability=0.2, seed=9)
    scene = random_scene(3, PC.BOTTOM_BOTTOM, 9)
    a = simulate(scene, Mode.WITH, f, replan_on_failure=True)[1]
    b = simulate(scene, Mode.WITH, f, replan_on_failure=True)[1]
    assert a.text() == b.text() and a == b


def test_replanning_is_bounded():
    f = FailureModel(over_rotation_probability=1.0, seed=1)
    scene = random_scene(0, PC.BOTTOM_BOTTOM, 2)
    _, trace = simulate(scene, Mode.WITH, f, replan_on_failure=True)
    assert trace.replans == 5
    assert not trace.success


def test_trace_line_format():
    _, trace = simulate(random_scene(0, PC.TOP_SIDE, 0))
    lines = trace.text().splitlines()
    assert lines[0] == "step=0 action=detect shoe=- outcome=success"
    assert lines[1].startswith("step=1 action=grasp shoe=")


def test_perceive_noise_free_matches_truth():
    scene = random_scene(2, PC.TOP_SIDE, 3)
    seen = perceive(scene, 0.0, 0)
    for a, b in zip(scene.shoes, seen.shoes):
        assert a.state is b.state
        assert np.allclose(a.pose.position[:2], b.pose.position[:2])


def test_failure_model_validation():
    with pytest.raises(ValueError):
        FailureModel(over_rotation_probability=1.5)
    with pytest.raises(ValueError):
        FailureModel(keypoint_noise_sigma=-1)


def test_random_scene_contract():
    assert random_scene(0, PC.TOP_TOP, 0) == random_scene(0, PC.TOP_TOP, 0)
    with pytest.raises(NoBottomState):
        random_scene(1, PC.BOTTOM_BOTTOM, 0)
    with pytest.raises(NoBottomState):
        random_scene(2, PC.SIDE_BOTTOM, 0)
    for seed in range(200):
        ci = seed % 4
        combo = list(PC)[seed % 7]
        if not admissible(ci, combo):
            continue
        s = random_scene(ci, combo, seed)
        assert not s.overlaps()
        assert classify_pair(s.shoe(1).state, s.shoe(2).state) is combo
