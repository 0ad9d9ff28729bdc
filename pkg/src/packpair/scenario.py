"""Scenario files: a TOML body under a mandatory version header line.

Example::

    packpair-scenario v1
    seed = 7
    mode = "with"
    table_height = 0.0
    gripper_length = 200.0

    [box]
    model = "sports"          # or length / width / wall_height
    center = [0.0, 0.0]
    yaw_rad = 0.0

    [failure]
    over_rotation_probability = 0.0
    forced = [{step = 1, outcome = "over-rotation"}]

    [[shoe]]
    id = 1
    model = "sports"          # or length / width / height / mass / softness ...
    state = "top"
    position = [420.0, 35.0]
    yaw_rad = 1.2

Angles are stored in radians so that files round-trip exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .catalog import BOXES, SHOES, BoxModel, ShoeModel, Softness
from .errors import NoBottomState, ScenarioError
from .perception import ShoePose, ShoeState, box_pose_from_center, rest_height
from .planner import Mode, PairCombination
from .reorientation import GripperModel
from .scene import SceneState, ShoeRecord
from .simulator import FailureModel, Outcome

HEADER = "packpair-scenario v1"


@dataclass(frozen=True)
class ShoeSpec:
    id: int
    model: ShoeModel
    state: ShoeState
    position: tuple[float, float]
    yaw: float


@dataclass(frozen=True)
class Scenario:
    shoes: tuple[ShoeSpec, ShoeSpec]
    box_model: BoxModel
    box_center: tuple[float, float] = (0.0, 0.0)
    box_yaw: float = 0.0
    table_height: float = 0.0
    gripper_length: float = 200.0
    mode: Mode = Mode.WITH
    failure: FailureModel = field(default_factory=FailureModel)

    @property
    def seed(self) -> int:
        return self.failure.seed

    def to_scene(self) -> SceneState:
        box = box_pose_from_center(self.box_model, self.box_center, self.box_yaw, self.table_height)
        recs = []
        for s in self.shoes:
            if s.state is ShoeState.BOTTOM and not s.model.has_bottom:
                raise NoBottomState(f"{s.model.name} shoes have no bottom state")
            z = self.table_height + rest_height(s.model, s.state)
            recs.append(ShoeRecord(s.id, s.model, s.state,
                                   ShoePose.for_state((s.position[0], s.position[1], z), s.yaw, s.state)))
        return SceneState(tuple(recs), self.box_model, box, self.table_height,
                          GripperModel(self.gripper_length))


# --- writing -----------------------------------------------------------------------


def _model_table(model, catalog, cls):
    if model in catalog:
        return {"model": model.name}
    out = {}
    for f in fields(cls):
        v = getattr(model, f.name)
        if v is None:
            continue
        out[f.name] = v.value if isinstance(v, Softness) else v
    return out


def dumps(sc: Scenario) -> str:
    f = sc.failure
    failure = {
        "keypoint_noise_sigma": f.keypoint_noise_sigma,
        "side_swap_probability": f.side_swap_probability,
        "over_rotation_probability": f.over_rotation_probability,
        "hard_side_topple_probability": f.hard_side_topple_probability,
        "forced": [{"step": s, "outcome": o.value} for s, o in f.forced],
    }
    doc = {
        "seed": f.seed,
        "mode": sc.mode.value,
        "table_height": sc.table_height,
        "gripper_length": sc.gripper_length,
        "box": {**_model_table(sc.box_model, BOXES, BoxModel),
                "center": list(sc.box_center), "yaw_rad": sc.box_yaw},
        "failure": failure,
        "shoe": [{"id": s.id, **_model_table(s.model, SHOES, ShoeModel), "state": s.state.value,
                  "position": list(s.position), "yaw_rad": s.yaw} for s in sc.shoes],
    }
    return HEADER + "\n" + tomli_w.dumps(doc)


def write_scenario(path, sc: Scenario) -> None:
    Path(path).write_text(dumps(sc), encoding="utf-8")


# --- reading -----------------------------------------------------------------------


class _Locator:
    """Best-effort line numbers for semantic errors in an already parsed document."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def section(self, name: str, index: int = 0) -> int | None:
        pat = re.compile(r"^\s*\[\[?\s*" + re.escape(name) + r"\s*\]\]?\s*(#.*)?$")
        hits = [i + 1 for i, ln in enumerate(self.lines) if pat.match(ln)]
        return hits[index] if index < len(hits) else None

    def key(self, key: str, start: int | None = None) -> tuple[int | None, int | None]:
        pat = re.compile(r"^(\s*)" + re.escape(key) + r"\s*=")
        first = (start or 1) - 1
        for i in range(first, len(self.lines)):
            if i > first and start is not None and self.lines[i].lstrip().startswith("["):
                break
            m = pat.match(self.lines[i])
            if m:
                return i + 1, len(m.group(1)) + 1
        return start, None


_TOP_KEYS = {"seed", "mode", "table_height", "gripper_length", "box", "failure", "shoe"}
_BOX_KEYS = {"model", "length", "width", "wall_height", "name", "center", "yaw_rad"}
_SHOE_KEYS = {"id", "model", "name", "length", "width", "height", "mass", "softness",
              "has_bottom", "hard_side_topple", "com_height", "state", "position", "yaw_rad"}
_FAILURE_KEYS = {"keypoint_noise_sigma", "side_swap_probability", "over_rotation_probability",
                 "hard_side_topple_probability", "forced"}


class _Reader:
    def __init__(self, text: str):
        self.loc = _Locator(text)

    def fail(self, msg, key=None, section=None, index=0):
        start = self.loc.section(section, index) if section else None
        if key is None:
            raise ScenarioError(msg, start, 1 if start else None)
        line, col = self.loc.key(key, start)
        raise ScenarioError(msg, line, col)

    def check_keys(self, table: dict, allowed: set, section=None, index=0):
        for k in table:
            if k not in allowed:
                self.fail(f"unknown key '{k}'", k, section, index)

    def number(self, table, key, default=None, section=None, index=0, integer=False):
        if key not in table:
            if default is None:
                self.fail(f"missing key '{key}'", None, section, index)
            return default
        v = table[key]
        ok = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok or (not integer and not math.isfinite(v)):
            kind = "an integer" if integer else "a finite number"
            self.fail(f"'{key}' must be {kind}", key, section, index)
        return int(v) if integer else float(v)

    def pair(self, table, key, section, index=0):
        v = table.get(key)
        if (not isinstance(v, list) or len(v) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
            self.fail(f"'{key}' must be a list of two numbers", key if key in table else None, section, index)
        return (float(v[0]), float(v[1]))

    def choice(self, table, key, enum_cls, section=None, index=0, default=None):
        if key not in table:
            if default is None:
                self.fail(f"missing key '{key}'", None, section, index)
            return default
        try:
            return enum_cls(table[key])
        except ValueError:
            names = ", ".join(e.value for e in enum_cls)
            self.fail(f"'{key}' must be one of: {names}", key, section, index)

    def model(self, table, catalog, cls, section, index=0):
        if "model" in table:
            extra = set(table) & {f.name for f in fields(cls)}
            if extra:
                self.fail(f"'model' cannot be combined with explicit '{sorted(extra)[0]}'",
                          sorted(extra)[0], section, index)
            names = [m.name for m in catalog]
            if table["model"] not in names:
                self.fail(f"unknown catalog model {table['model']!r}", "model", section, index)
            return catalog[names.index(table["model"])]
        kw = {}
        for f in fields(cls):
            if f.name not in table:
                continue
            v = table[f.name]
            if f.name == "softness":
                v = self.choice(table, "softness", Softness, section, index)
            elif f.name in ("has_bottom", "hard_side_topple"):
                if not isinstance(v, bool):
                    self.fail(f"'{f.name}' must be true or false", f.name, section, index)
            elif f.name == "name":
                if not isinstance(v, str):
                    self.fail("'name' must be a string", "name", section, index)
            else:
                v = self.number(table, f.name, section=section, index=index)
            kw[f.name] = v
        try:
            return cls(**kw)
        except (TypeError, ValueError) as e:
            self.fail(f"invalid {section} model: {e}", None, section, index)


def loads(text: str) -> Scenario:
    lines = text.splitlines()
    if not lines or lines[0].rstrip() != HEADER:
        raise ScenarioError(f"first line must be '{HEADER}'", 1, 1)
    try:
        # blank the header so TOML line numbers match the file
        doc = tomli.loads("\n" + "\n".join(lines[1:]))
    except tomli.TOMLDecodeError as e:
        raise ScenarioError(e.msg, e.lineno, e.colno) from None
    r = _Reader(text)
    r.check_keys(doc, _TOP_KEYS)
    seed = r.number(doc, "seed", 0, integer=True)
    mode = r.choice(doc, "mode", Mode, default=Mode.WITH)
    table_height = r.number(doc, "table_height", 0.0)
    gripper_length = r.number(doc, "gripper_length", 200.0)
    if gripper_length <= 0:
        r.fail("'gripper_length' must be positive", "gripper_length")

    box = doc.get("box")
    if not isinstance(box, dict):
        raise ScenarioError("missing [box] section", None, None)
    r.check_keys(box, _BOX_KEYS, "box")
    box_model = r.model(box, BOXES, BoxModel, "box")
    center = r.pair(box, "center", "box") if "center" in box else (0.0, 0.0)
    box_yaw = r.number(box, "yaw_rad", 0.0, "box")

    fail_doc = doc.get("failure", {})
    if not isinstance(fail_doc, dict):
        r.fail("'failure' must be a section", "failure")
    r.check_keys(fail_doc, _FAILURE_KEYS, "failure")
    forced = []
    entries = fail_doc.get("forced", [])
    if not isinstance(entries, list):
        r.fail("'forced' must be a list", "forced", "failure")
    for item in entries:
        if not isinstance(item, dict) or set(item) != {"step", "outcome"}:
            r.fail("'forced' entries need exactly 'step' and 'outcome'", "forced", "failure")
        step = r.number(item, "step", section="failure", integer=True)
        outcome = r.choice(item, "outcome", Outcome, "failure")
        forced.append((step, outcome))
    try:
        failure = FailureModel(
            keypoint_noise_sigma=r.number(fail_doc, "keypoint_noise_sigma", 0.0, "failure"),
            side_swap_probability=r.number(fail_doc, "side_swap_probability", 0.0, "failure"),
            over_rotation_probability=r.number(fail_doc, "over_rotation_probability", 0.0, "failure"),
            hard_side_topple_probability=r.number(fail_doc, "hard_side_topple_probability", 0.0, "failure"),
            seed=seed,
            forced=tuple(forced),
        )
    except ValueError as e:
        r.fail(str(e), None, "failure")

    shoes_doc = doc.get("shoe")
    if not isinstance(shoes_doc, list) or len(shoes_doc) != 2:
        raise ScenarioError("exactly two [[shoe]] sections are required", r.loc.section("shoe"), None)
    shoes = []
    for i, t in enumerate(shoes_doc):
        r.check_keys(t, _SHOE_KEYS, "shoe", i)
        sid = r.number(t, "id", section="shoe", index=i, integer=True)
        model = r.model(t, SHOES, ShoeModel, "shoe", i)
        state = r.choice(t, "state", ShoeState, "shoe", i)
        if state is ShoeState.BOTTOM and not model.has_bottom:
            r.fail(f"{model.name} shoes have no bottom state", "state", "shoe", i)
        shoes.append(ShoeSpec(sid, model, state, r.pair(t, "position", "shoe", i),
                              r.number(t, "yaw_rad", 0.0, "shoe", i)))
    if sorted(s.id for s in shoes) != [1, 2]:
        r.fail("shoe ids must be 1 and 2", "id", "shoe", 0)
    sc = Scenario(tuple(sorted(shoes, key=lambda s: s.id)), box_model, center, box_yaw,
                  table_height, gripper_length, mode, failure)
    problems = sc.to_scene().overlaps()
    if problems:
        r.fail("; ".join(problems), None, "shoe", 0)
    return sc


def read_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ScenarioError(f"cannot read {path}: {e}") from None
    return loads(text)


# --- random generation -------------------------------------------------------------

_COMBO_STATES = {
    PairCombination.TOP_TOP: lambda v: (ShoeState.TOP, ShoeState.TOP),
    PairCombination.TOP_SIDE: lambda v: (ShoeState.TOP, v),
    PairCombination.TOP_BOTTOM: lambda v: (ShoeState.TOP, ShoeState.BOTTOM),
    PairCombination.SIDE_SIDE_MISMATCHED: lambda v: (v, v),
    PairCombination.SIDE_SIDE_MATCHED: lambda v: (v, v.complement),
    PairCombination.SIDE_BOTTOM: lambda v: (v, ShoeState.BOTTOM),
    PairCombination.BOTTOM_BOTTOM: lambda v: (ShoeState.BOTTOM, ShoeState.BOTTOM),
}

SCENE_RADIUS = 700.0  # mm, table area around the box
CLEARANCE = 60.0  # mm between footprints in generated scenes


def admissible(catalog_index: int, combination: PairCombination) -> bool:
    states = _COMBO_STATES[combination](ShoeState.SIDE_INSIDE_UP)
    return SHOES[catalog_index].has_bottom or ShoeState.BOTTOM not in states


def random_scenario(catalog_index: int, combination: PairCombination, seed: int,
                    table_height: float = 0.0, gripper_length: float = 200.0,
                    mode: Mode = Mode.WITH, failure: FailureModel | None = None) -> Scenario:
    """Catalog pair and box with the requested initial combination, laid out without overlap."""
    model, box_model = SHOES[catalog_index], BOXES[catalog_index]
    if not admissible(catalog_index, combination):
        raise NoBottomState(f"{model.name} shoes have no bottom state")
    rng = np.random.default_rng(seed)
    variant = ShoeState.SIDE_INSIDE_UP if rng.random() < 0.5 else ShoeState.SIDE_OUTSIDE_UP
    states = list(_COMBO_STATES[combination](variant))
    if rng.random() < 0.5:
        states.reverse()
    centre = tuple(float(c) for c in rng.uniform(-50, 50, 2))
    box_yaw = float(rng.uniform(-math.pi, math.pi))
    failure = replace(failure or FailureModel(), seed=seed)
    inner = math.hypot(box_model.length, box_model.width) / 2 + model.length / 2 + CLEARANCE
    for _ in range(10_000):
        shoes = []
        for sid, st in zip((1, 2), states):
            r = rng.uniform(inner, SCENE_RADIUS)
            phi = rng.uniform(-math.pi, math.pi)
            xy = (centre[0] + r * math.cos(phi), centre[1] + r * math.sin(phi))
            shoes.append(ShoeSpec(sid, model, st, (float(xy[0]), float(xy[1])),
                                  float(rng.uniform(-math.pi, math.pi))))
        sc = Scenario(tuple(shoes), box_model, centre, box_yaw, table_height, gripper_length, mode, failure)
        scene = sc.to_scene()
        a, b = scene.shoes
        if a.footprint().distance(b.footprint()) >= CLEARANCE and not scene.overlaps():
            return sc
    raise RuntimeError("could not place two shoes without overlap")  # pragma: no cover


def random_scene(catalog_index: int, combination: PairCombination, seed: int, **kw) -> SceneState:
    return random_scenario(catalog_index, combination, seed, **kw).to_scene()
