"""Plan and simulate packing a pair of shoes into their box from any initial state."""

from .catalog import BOXES, SHOES, BoxModel, ShoeModel, Softness
from .contact import CrossSection, EdgePlacement, plan_edge_placement, predict_contact_outcome
from .errors import *  # noqa: F401,F403
from .geometry import Polygon, Pose, convex_hull, min_area_rect
from .metrics import LossWeights, dimensionless_keypoint_error, mse_loss, ned_loss, overall_loss
from .perception import (
    BoxPose,
    KeypointSet,
    ShoePose,
    ShoeState,
    classify_state,
    estimate_box_pose,
    estimate_shoe_pose,
    grasp_pose,
)
from .planner import (
    Mode,
    PackingPlan,
    PairCombination,
    TargetConfigReport,
    classify_pair,
    plan_packing,
    required_topples,
    verify_target_config,
)
from .reorientation import GripperModel, plan_toppling, solve_side_toppling, solve_top_toppling
from .scenario import Scenario, random_scenario, random_scene, read_scenario, write_scenario
from .scene import SceneState, ShoeRecord
from .simulator import ExecutionTrace, FailureModel, Outcome, run_plan, simulate

__version__ = "0.1.0"
