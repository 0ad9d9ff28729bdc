import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from packpair.catalog import BoxModel, ShoeModel, Softness
from packpair.cli import main
from packpair.errors import ScenarioError
from packpair.metrics import save_heatmaps
from packpair.planner import Mode, PairCombination
from packpair.scenario import HEADER, admissible, dumps, loads, random_scenario, write_scenario
from packpair.simulator import FailureModel, Outcome

PC = PairCombination
CASES = [(ci, c) for ci in range(4) for c in PC if admissible(ci, c)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CASES), st.integers(0, 2**31 - 1))
def test_generated_scenarios_round_trip(case, seed):
    sc = random_scenario(*case, seed)
    back = loads(dumps(sc))
    assert back == sc
    assert back.to_scene() == sc.to_scene()


def test_custom_models_round_trip():
    sc = random_scenario(0, PC.TOP_SIDE, 3, table_height=720.0, gripper_length=180.0, mode=Mode.WITHOUT,
                         failure=FailureModel(side_swap_probability=0.25, forced=((2, Outcome.SIDE_SWAP),)))
    odd = ShoeModel("trainer", 270.0, 95.0, 105.0, 300.0, Softness.RIGID, com_height=40.0)
    sc = replace(sc, shoes=tuple(replace(s, model=odd) for s in sc.shoes),
                 box_model=BoxModel(310.0, 200.0, 100.0, "plain"))
    text = dumps(sc)
    assert 'model = "' not in text
    assert loads(text) == sc


def base_text():
    return dumps(random_scenario(0, PC.TOP_TOP, 1))


@pytest.mark.parametrize("mutate,line", [
    (lambda t: t.replace(HEADER, "packpair-scenario v2"), 1),
    (lambda t: t.replace('mode = "with"', 'mode = "sometimes"'), 3),
    (lambda t: t.replace("table_height = 0.0", "table_height = 0.0\ncolour = 1"), 5),
    (lambda t: t.replace('state = "top"', 'state = "upside"', 1), None),
    (lambda t: t.replace("seed = 1", "seed = 1 1"), 2),
])
def test_malformed_files_report_location(mutate, line):
    with pytest.raises(ScenarioError) as info:
        loads(mutate(base_text()))
    if line is not None:
        assert info.value.line == line
    else:
        assert info.value.line is not None
    assert info.value.column is not None


def test_unknown_model_and_bottom_exclusion():
    t = dumps(random_scenario(1, PC.TOP_TOP, 1))
    with pytest.raises(ScenarioError, match="unknown catalog model"):
        loads(t.replace('model = "high-heel"', 'model = "clog"', 1))
    with pytest.raises(ScenarioError, match="no bottom state"):
        loads(t.replace('state = "top"', 'state = "bottom"', 1))


def test_overlapping_shoes_rejected():
    sc = random_scenario(0, PC.TOP_TOP, 1)
    a, b = sc.shoes
    sc = replace(sc, shoes=(a, replace(b, position=a.position)))
    with pytest.raises(ScenarioError, match="overlap"):
        loads(dumps(sc))


# --- commands -----------------------------------------------------------------------


@pytest.fixture
def scenario_file(tmp_path):
    def make(ci, combo, seed=1, **kw):
        path = tmp_path / f"{combo.name.lower()}_{ci}_{seed}.toml"
        write_scenario(path, random_scenario(ci, combo, seed, **kw))
        return str(path)
    return make


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_plan_top_side_has_no_topples(scenario_file, capsys):
    code, out, _ = run(["plan", "--scenario", scenario_file(0, PC.TOP_SIDE)], capsys)
    assert code == 0
    assert "predicted_topples=0" in out.splitlines()[0]
    assert "place-on-edge" in out


def test_plan_bottom_bottom_two_pushes(scenario_file, capsys):
    code, out, _ = run(["plan", "--scenario", scenario_file(0, PC.BOTTOM_BOTTOM)], capsys)
    assert code == 0
    pushes = [ln for ln in out.splitlines() if " push " in f" {ln} "]
    assert len(pushes) == 2
    assert {"target=side-inside-up", "target=side-outside-up"} == {ln.split()[3] for ln in pushes}


def test_plan_prints_angles_in_degrees(scenario_file, capsys):
    _, out, _ = run(["plan", "--scenario", scenario_file(0, PC.TOP_TOP), "--mode", "without"], capsys)
    topple = next(ln for ln in out.splitlines() if " topple " in ln)
    beta = next(tok for tok in topple.split() if tok.startswith("beta_deg="))
    assert len(beta.split(".")[1]) == 2


def test_malformed_file_exit_2_without_output(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(HEADER + "\nseed = 1\n[box\n")
    code, out, err = run(["plan", "--scenario", str(bad)], capsys)
    assert code == 2 and out == ""
    assert "line 3" in err


def test_missing_file_exit_2(tmp_path, capsys):
    code, out, _ = run(["simulate", "--scenario", str(tmp_path / "none.toml")], capsys)
    assert code == 2 and out == ""


def test_unplannable_exit_3(scenario_file, capsys):
    code, out, err = run(["plan", "--scenario", scenario_file(0, PC.TOP_TOP, gripper_length=60.0)], capsys)
    assert code == 3 and out == ""
    assert "unplannable" in err


@pytest.mark.parametrize("ci,combo", CASES, ids=lambda x: getattr(x, "name", str(x)))
def test_simulate_zero_failure_exit_0(ci, combo, scenario_file, capsys):
    code, out, _ = run(["simulate", "--scenario", scenario_file(ci, combo)], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "overall=true"


def test_simulate_output_is_reproducible(scenario_file, capsys):
    path = scenario_file(3, PC.BOTTOM_BOTTOM, failure=FailureModel(keypoint_noise_sigma=2.0,
                                                                   side_swap_probability=0.3))
    outs = [run(["simulate", "--scenario", path, "--seed", "4", "--replan", "--trace"], capsys)[1]
            for _ in range(2)]
    assert outs[0] == outs[1]


def test_forced_failure_without_replan_exit_1(scenario_file, capsys):
    f = FailureModel(forced=((1, Outcome.OVER_ROTATION),))
    path = scenario_file(0, PC.TOP_TOP, failure=f)
    code, out, _ = run(["simulate", "--scenario", path], capsys)
    assert code == 1
    assert "failed_step=1 action=topple outcome=over-rotation" in out
    code, out, _ = run(["simulate", "--scenario", path, "--replan"], capsys)
    assert code == 0 and "replans=1" in out


def batch_summary(out, mode):
    line = next(ln for ln in out.splitlines() if ln.startswith(f"mode={mode} "))
    return dict(tok.split("=") for tok in line.split())


def test_batch_mode_comparison(capsys):
    code, out, _ = run(["batch", "--count", "140", "--seed", "3", "--mode", "both"], capsys)
    assert code == 0
    w, wo = batch_summary(out, "with"), batch_summary(out, "without")
    assert w["success_fraction"] == wo["success_fraction"] == "1"
    assert float(w["mean_topples"]) < float(wo["mean_topples"])


def test_batch_is_reproducible(capsys):
    a = run(["batch", "--count", "30", "--seed", "7", "--noise", "2", "--side-swap", "0.2", "--replan"], capsys)
    b = run(["batch", "--count", "30", "--seed", "7", "--noise", "2", "--side-swap", "0.2", "--replan"], capsys)
    assert a == b


def test_batch_parallel_matches_serial(capsys):
    serial = run(["batch", "--count", "24", "--seed", "2", "--mode", "both"], capsys)
    parallel = run(["batch", "--count", "24", "--seed", "2", "--mode", "both", "--jobs", "2"], capsys)
    assert serial == parallel


def test_batch_filters(capsys):
    code, out, _ = run(["batch", "--count", "20", "--shoe", "high-heel"], capsys)
    assert code == 0 and "bottom" not in out.split("topple_histogram")[1]
    code, _, err = run(["batch", "--count", "5", "--shoe", "leather", "--combination", "bottom+bottom"], capsys)
    assert code == 2 and "cannot start" in err


def test_batch_rejects_bad_count(capsys):
    assert run(["batch", "--count", "0"], capsys)[0] == 2


def stacks(tmp_path):
    truth = np.zeros((1, 2, 2))
    truth[0, 0, 0] = 1.0
    pred = np.zeros((1, 2, 2))
    pred[0, 0, 0] = 0.5
    t, p = tmp_path / "t.bin", tmp_path / "p.bin"
    save_heatmaps(t, truth)
    save_heatmaps(p, pred)
    return str(t), str(p)


def test_eval_keypoints_worked_pair(tmp_path, capsys):
    t, p = stacks(tmp_path)
    code, out, _ = run(["eval-keypoints", t, p], capsys)
    assert code == 0
    assert "L_mse=0.0625000" in out and "L_ned=0.00000" in out and "L_all=0.0386250" in out
    _, out, _ = run(["eval-keypoints", t, p, "--alpha", "1"], capsys)
    assert "L_all=0.0625000" in out


def test_eval_keypoints_identical_files(tmp_path, capsys):
    rng = np.random.default_rng(0)
    stack = rng.random((5, 8, 8)) * 0.9
    for k in range(5):
        stack[k, k, 7 - k] = 1.0
    f = tmp_path / "s.bin"
    save_heatmaps(f, stack)
    code, out, _ = run(["eval-keypoints", str(f), str(f)], capsys)
    assert code == 0
    values = [float(ln.split("=")[1]) for ln in out.splitlines()]
    assert values == [0.0, 0.0, 0.0, 0.0]


def test_eval_keypoints_shape_mismatch(tmp_path, capsys):
    t, _ = stacks(tmp_path)
    other = tmp_path / "o.bin"
    save_heatmaps(other, np.zeros((1, 3, 2)))
    assert run(["eval-keypoints", t, str(other)], capsys)[0] == 2
    (tmp_path / "junk.bin").write_bytes(b"abc")
    assert run(["eval-keypoints", t, str(tmp_path / "junk.bin")], capsys)[0] == 2


def test_console_script_entry_point(scenario_file):
    path = scenario_file(0, PC.SIDE_SIDE_MATCHED)
    res = subprocess.run([sys.executable, "-m", "packpair.cli", "simulate", "--scenario", path],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "step=0 action=detect shoe=- outcome=success"
