"""Command-line entry point: plan, simulate, batch, eval-keypoints.

Exit codes: 0 success, 1 task failure, 2 input error, 3 unplannable.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .catalog import NAMES, SHOES
from .errors import NoVisibleKeypoints, PackPairError, ScenarioError, ShapeMismatch, Unplannable
from .metrics import (
    LossWeights,
    dimensionless_keypoint_error,
    keypoints_from_heatmaps,
    load_heatmaps,
    mse_loss,
    ned_loss,
    visible_channels,
)
from .planner import (
    DetectScene,
    Grasp,
    Mode,
    PackingPlan,
    PairCombination,
    PlaceDirect,
    PlaceOnEdge,
    Push,
    Topple,
    TOPPLE_TABLE,
    plan_packing,
)
from .scenario import admissible, random_scenario, read_scenario
from .simulator import FailureModel, perceive, run_plan, simulate

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_UNPLANNABLE = 0, 1, 2, 3

log = logging.getLogger("packpair")


def _deg(rad: float) -> str:
    return f"{math.degrees(rad):.2f}"


def _xyz(p) -> str:
    return f"x={p[0]:.2f} y={p[1]:.2f} z={p[2]:.2f}"


def _heading(v) -> str:
    return _deg(math.atan2(v[1], v[0]))


def format_action(a) -> str:
    if isinstance(a, DetectScene):
        return "detect"
    head = f"{a.kind} shoe={a.shoe}"
    if isinstance(a, Push):
        return f"{head} target={a.plan.target_state.value} direction_deg={_heading(a.plan.direction)}"
    if isinstance(a, Topple):
        s = a.plan.solution
        return (f"{head} primitive={a.plan.kind.value} target={a.plan.target_state.value} "
                f"theta_deg={_deg(s.theta)} alpha_deg={_deg(s.alpha)} beta_deg={_deg(s.beta)} "
                f"beta_max_deg={_deg(s.beta_max)} rolls_toward_deg={_heading(a.plan.rolls_toward)}")
    if isinstance(a, Grasp):
        return f"{head} {_xyz(a.grasp.position)} yaw_deg={_deg(a.grasp.yaw)}"
    if isinstance(a, PlaceDirect):
        t = a.target
        return f"{head} {_xyz(t.position)} roll_deg={_deg(t.roll)} yaw_deg={_deg(t.yaw)}"
    if isinstance(a, PlaceOnEdge):
        pl = a.placement
        r = pl.release
        return (f"{head} offset={pl.offset:.2f} rim {_xyz(pl.contact_point.position)} "
                f"drop={pl.drop_height:.2f} release_yaw_deg={_deg(r.yaw)}")
    raise TypeError(f"unknown action {a!r}")


def format_plan(plan: PackingPlan) -> list[str]:
    combo = plan.combination.value if plan.combination else "-"
    out = [f"combination={combo} mode={plan.mode.value} predicted_topples={plan.predicted_topple_count}"]
    out += [f"{i} {format_action(a)}" for i, a in enumerate(plan.actions)]
    return out


def _load(args):
    sc = read_scenario(args.scenario)
    if getattr(args, "mode", None):
        sc = replace(sc, mode=Mode(args.mode))
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, failure=replace(sc.failure, seed=args.seed))
    return sc


def cmd_plan(args) -> int:
    sc = _load(args)
    scene = sc.to_scene()
    plan = _plan(sc, scene)
    print("\n".join(format_plan(plan)))
    return EXIT_OK


def _plan(sc, scene):
    return plan_packing(perceive(scene, sc.failure.keypoint_noise_sigma, sc.failure.seed), sc.mode)


def cmd_simulate(args) -> int:
    sc = _load(args)
    scene = sc.to_scene()
    plan = _plan(sc, scene)
    trace = run_plan(scene, plan, sc.failure, replan_on_failure=args.replan)
    lines = []
    for s in trace.steps:
        lines.append(s.line())
        if args.trace:
            lines.append(f"  pre  {s.pre}")
            lines.append(f"  post {s.post}")
    lines.append("report")
    lines.append(f"replans={trace.replans}")
    if not trace.placed:
        lines.append("placed=false")
    bad = trace.failed_step
    if bad is not None and not trace.success:
        lines.append(f"failed_step={bad.index} action={bad.action.kind} outcome={bad.outcome.value}")
    lines += trace.final_report.lines()
    print("\n".join(lines))
    return EXIT_OK if trace.success else EXIT_FAILED


# --- batch ------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioResult:
    index: int
    shoe: str
    combination: PairCombination
    mode: Mode
    predicted_topples: int
    executed_actions: int
    overall: bool
    unplannable: bool = False
    wall_time: float = 0.0  # seconds; never printed, so reports stay reproducible


@dataclass(frozen=True)
class RunReport:
    results: tuple[ScenarioResult, ...]

    def for_mode(self, mode: Mode) -> list[ScenarioResult]:
        return sorted((r for r in self.results if r.mode is mode), key=lambda r: r.index)

    def lines(self) -> list[str]:
        out = []
        for mode in Mode:
            rs = self.for_mode(mode)
            if not rs:
                continue
            n = len(rs)
            ok = sum(r.overall for r in rs)
            topples = sum(r.predicted_topples for r in rs)
            out.append(f"mode={mode.value} scenarios={n} success={ok} success_fraction={ok / n:.6g} "
                       f"unplannable={sum(r.unplannable for r in rs)} total_topples={topples} "
                       f"mean_topples={topples / n:.6g}")
            hist = Counter(r.predicted_topples for r in rs)
            out.append("  topple_histogram " + " ".join(f"{k}:{hist[k]}" for k in sorted(hist)))
            for c in PairCombination:
                sub = [r for r in rs if r.combination is c]
                if sub:
                    out.append(f"  {c.value:<22} n={len(sub):<5} success={sum(r.overall for r in sub):<5} "
                               f"topples={sum(r.predicted_topples for r in sub):<5} "
                               f"expected_per_scene={TOPPLE_TABLE[mode][c]}")
        return out


def draw_batch_case(seed: int, index: int, shoe: str | None = None,
                    combination: PairCombination | None = None) -> tuple[int, PairCombination, int]:
    """(catalog index, combination, scene seed) for one batch slot; classes are uniform."""
    rng = np.random.default_rng([seed, index])
    combos = list(PairCombination)
    if shoe and combination and not admissible(NAMES.index(shoe), combination):
        raise ValueError(f"{shoe} shoes cannot start in {combination.value}")
    c = combination or combos[int(rng.integers(len(combos)))]
    while True:
        ci = NAMES.index(shoe) if shoe else int(rng.integers(len(SHOES)))
        if admissible(ci, c):
            break
        log.debug("slot %d: %s excluded for %s, resampling", index, c.value, NAMES[ci])
        if shoe:
            c = combos[int(rng.integers(len(combos)))]
    return ci, c, int(rng.integers(2**31))


def _run_case(job) -> list[ScenarioResult]:
    index, ci, combo, scene_seed, modes, failure, replan = job
    out = []
    for mode in modes:
        t0 = time.perf_counter()
        sc = random_scenario(ci, combo, scene_seed, mode=mode, failure=failure)
        scene = sc.to_scene()
        try:
            plan, trace = simulate(scene, mode, sc.failure, replan)
        except Unplannable:
            out.append(ScenarioResult(index, NAMES[ci], combo, mode, 0, 0, False, True,
                                      time.perf_counter() - t0))
            continue
        out.append(ScenarioResult(index, NAMES[ci], combo, mode, plan.predicted_topple_count,
                                  len(trace.steps), trace.success, False, time.perf_counter() - t0))
    return out


def run_batch(count: int, seed: int, modes=(Mode.WITH,), failure: FailureModel = FailureModel(),
              replan: bool = False, shoe: str | None = None, combination: PairCombination | None = None,
              jobs: int = 1) -> RunReport:
    cases = [draw_batch_case(seed, i, shoe, combination) for i in range(count)]
    work = [(i, ci, c, s, tuple(modes), failure, replan) for i, (ci, c, s) in enumerate(cases)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            chunks = list(ex.map(_run_case, work, chunksize=max(1, count // (4 * jobs))))
    else:
        chunks = [_run_case(w) for w in work]
    return RunReport(tuple(r for ch in chunks for r in ch))


def cmd_batch(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be at least 1")
    modes = tuple(Mode) if args.mode == "both" else (Mode(args.mode),)
    combo = PairCombination(args.combination) if args.combination else None
    failure = FailureModel(keypoint_noise_sigma=args.noise, side_swap_probability=args.side_swap,
                           over_rotation_probability=args.over_rotation)
    try:
        report = run_batch(args.count, args.seed, modes, failure, args.replan, args.shoe, combo, args.jobs)
    except ValueError as e:
        raise _UsageError(str(e)) from None
    print("\n".join(report.lines()))
    return EXIT_OK


# --- metrics ----------------------------------------------------------------------


def _sig(v: float) -> str:
    return "%#.6g" % v


def cmd_eval_keypoints(args) -> int:
    truth, pred = load_heatmaps(args.truth), load_heatmaps(args.pred)
    if truth.shape != pred.shape:
        raise ShapeMismatch(f"truth {truth.shape} vs prediction {pred.shape}")
    w = LossWeights(args.alpha)
    l_mse, l_ned = mse_loss(truth, pred), ned_loss(truth, pred)
    print(f"L_mse={_sig(l_mse)}")
    print(f"L_ned={_sig(l_ned)}")
    print(f"L_all={_sig(w.alpha * l_mse + (1 - w.alpha) * l_ned)}")
    ks = visible_channels(truth)
    if truth.shape[0] == 5 and {0, 1} <= set(ks):
        err = dimensionless_keypoint_error(keypoints_from_heatmaps(pred, ks), keypoints_from_heatmaps(truth, ks))
        print(f"keypoint_error={_sig(err)}")
    else:
        print("keypoint_error=n/a")
    return EXIT_OK


# --- entry point ------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="packpair", description="Plan and simulate packing a pair of shoes into a box.")
    p.add_argument("--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, fn, text in (("plan", cmd_plan, "print the packing plan for a scenario"),
                           ("simulate", cmd_simulate, "plan and execute a scenario")):
        q = sub.add_parser(name, help=text)
        q.add_argument("--scenario", required=True, metavar="PATH")
        q.add_argument("--seed", type=int, help="override the scenario seed")
        q.add_argument("--mode", choices=[m.value for m in Mode], help="override the scenario mode")
        if name == "simulate":
            q.add_argument("--trace", action="store_true", help="show scene summaries around each step")
            q.add_argument("--replan", action="store_true", help="re-perceive and replan after a failed step")
        q.set_defaults(func=fn)

    b = sub.add_parser("batch", help="run seeded random scenarios and aggregate")
    b.add_argument("--count", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=["with", "without", "both"], default="with")
    b.add_argument("--replan", action="store_true")
    b.add_argument("--shoe", choices=NAMES, help="restrict to one catalog shoe")
    b.add_argument("--combination", choices=[c.value for c in PairCombination])
    b.add_argument("--noise", type=float, default=0.0, help="keypoint noise sigma, mm")
    b.add_argument("--side-swap", type=_probability, default=0.0)
    b.add_argument("--over-rotation", type=_probability, default=0.0)
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.set_defaults(func=cmd_batch)

    e = sub.add_parser("eval-keypoints", help="heatmap losses between two stacks")
    e.add_argument("truth", metavar="TRUTH")
    e.add_argument("pred", metavar="PRED")
    e.add_argument("--alpha", type=float, default=LossWeights().alpha)
    e.set_defaults(func=cmd_eval_keypoints)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except Unplannable as e:
        print(f"unplannable: {e}", file=sys.stderr)
        return EXIT_UNPLANNABLE
    except (ScenarioError, ShapeMismatch, NoVisibleKeypoints, _UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (PackPairError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
