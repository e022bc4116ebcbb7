import json

import numpy as np
import pytest

from test_sim import write_minimal_scenario

from navloop.cli import main
from navloop.grid import OCCUPIED, OccupancyGrid, save_occupancy_file
from navloop.semantic import save_feature_grid, save_vocabulary, FeatureGrid


def test_run_reached_exit_0_and_report(tmp_path, capsys):
    scenario = write_minimal_scenario(tmp_path)
    out = tmp_path / "report.json"
    code = main(["run", "--scenario", str(scenario), "--out", str(out),
                 "--headless"])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["schema"] == "mission-report/1"
    assert report["reached"] is True and report["queries"] == []
    stdout = capsys.readouterr().out
    assert "reached" in stdout and "0 queries" in stdout
    # metrics land next to the report by default
    metrics = json.loads((tmp_path / "report.json.metrics.json").read_text())
    assert metrics["schema"] == "metrics/1"
    assert metrics["rows"][0]["route"] == "mini"


def test_run_reports_identical_bytes_across_invocations(tmp_path):
    scenario = write_minimal_scenario(tmp_path)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--scenario", str(scenario), "--out", str(a)]) == 0
    assert main(["run", "--scenario", str(scenario), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_timeout_exit_2(tmp_path, capsys):
    # the corridor is walled off before the robot ever has a reference plan,
    # so there is nothing to deviate from: it idles until the tick budget ends
    scenario = write_minimal_scenario(tmp_path, extra={
        "start": [2.25, 0.75, 0.0],  # door already inside sensor range
        "mission": {"waypoints": [[6.25, 0.75, 0.0]]},
        "change_events": [
            {"time": 0.0, "rect": [1, 7, 1, 7], "state": "occupied"}],
        "timeout_factor": 2.0,
    })
    code = main(["run", "--scenario", str(scenario)])
    assert code == 2
    assert "timeout" in capsys.readouterr().out


def test_run_stall_without_feedback_is_exit_2(tmp_path):
    scenario = write_minimal_scenario(tmp_path, extra={
        "change_events": [
            {"time": 0.0, "rect": [1, 7, 1, 7], "state": "occupied"}],
    })
    assert main(["run", "--scenario", str(scenario)]) == 2


def test_run_bad_scenario_exit_1(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{nope", encoding="utf-8")
    code = main(["run", "--scenario", str(p)])
    assert code == 1
    err = capsys.readouterr().err
    assert "error:" in err and "broken.json:1" in err


def test_run_missing_scenario_file_exit_1(tmp_path, capsys):
    code = main(["run", "--scenario", str(tmp_path / "none.json")])
    assert code == 1
    assert "no such file" in capsys.readouterr().err


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["run"])  # --scenario is required
    assert ei.value.code == 1
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 1


def test_tau_override_changes_behavior(tmp_path):
    """A fork forces a detour; tau decides whether the robot asks or goes."""
    # 5-row map: lanes row 1 and row 3 from a shared west column, door in
    # the row-1 lane; the detour through row 3 roughly doubles the length.
    cells = np.full((5, 18), OCCUPIED, np.int8)
    cells[1, 1:17] = 0
    cells[3, 1:17] = 0
    cells[1:4, 1] = 0
    cells[1:4, 16] = 0
    grid = OccupancyGrid(0.5, (0.0, 0.0), cells)
    save_occupancy_file(grid, tmp_path / "true.occ")
    prior = grid.with_cells(grid.cells)
    save_occupancy_file(prior, tmp_path / "prior.occ")
    raw = {
        "name": "fork",
        "true_grid": "true.occ",
        "prior_grid": "prior.occ",
        "start": [0.75, 0.75, 0.0],
        "mission": {"waypoints": [[8.25, 0.75, 0.0]]},
        "change_events": [
            {"time": 0.2, "rect": [1, 8, 1, 8], "state": "occupied"}],
    }
    p = tmp_path / "fork.json"
    p.write_text(json.dumps(raw), encoding="utf-8")
    # default tau 0.25: detour ratio is a clear deviation -> query -> stall
    assert main(["run", "--scenario", str(p)]) == 2
    # huge tau: same detour sails through without asking
    out = tmp_path / "r.json"
    assert main(["run", "--scenario", str(p), "--tau", "5.0",
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["tau"] == 5.0 and report["queries"] == []


def test_run_with_feedback_script(tmp_path):
    # block the lane, then answer the query with a phrase near the goal
    grid_cells = np.full((5, 18), OCCUPIED, np.int8)
    grid_cells[1, 1:17] = 0
    grid_cells[3, 1:17] = 0
    grid_cells[1:4, 1] = 0
    grid_cells[1:4, 16] = 0
    grid = OccupancyGrid(0.5, (0.0, 0.0), grid_cells)
    save_occupancy_file(grid, tmp_path / "true.occ")
    save_occupancy_file(grid, tmp_path / "prior.occ")
    feat = np.zeros((5, 18, 1), np.float32)
    feat[..., 0] = 0.05
    feat[2:5, 14:17, 0] = 1.0
    save_feature_grid(FeatureGrid(feat, np.ones((5, 18), bool)),
                      tmp_path / "feat.fgrid")
    save_vocabulary({"the loading bay": np.array([1.0])},
                    tmp_path / "vocab.tsv")
    raw = {
        "name": "fork-fb",
        "true_grid": "true.occ",
        "prior_grid": "prior.occ",
        "feature_grid": "feat.fgrid",
        "vocabulary": "vocab.tsv",
        "semantic": {"k": 2},
        "start": [0.75, 0.75, 0.0],
        "mission": {"waypoints": [[8.25, 0.75, 0.0]]},
        "change_events": [
            {"time": 0.2, "rect": [1, 8, 1, 8], "state": "occupied"}],
    }
    p = tmp_path / "fork.json"
    p.write_text(json.dumps(raw), encoding="utf-8")
    fb = tmp_path / "fb.json"
    fb.write_text('[["the loading bay"]]', encoding="utf-8")
    out = tmp_path / "r.json"
    code = main(["run", "--scenario", str(p), "--feedback", str(fb),
                 "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["reached"] is True
    assert len(report["queries"]) == 1
    assert report["queries"][0]["phrases"] == ["the loading bay"]


def test_metrics_out_with_reference_route(tmp_path):
    scenario_path = write_minimal_scenario(tmp_path, extra={
        "reference_route": "ref.json",
    })
    ref = [[0.75 + 0.1 * i, 0.75, 0.0] for i in range(41)]
    (tmp_path / "ref.json").write_text(json.dumps(ref), encoding="utf-8")
    metrics_path = tmp_path / "metrics.json"
    code = main(["run", "--scenario", str(scenario_path),
                 "--metrics-out", str(metrics_path)])
    assert code == 0
    rows = json.loads(metrics_path.read_text())["rows"]
    assert rows[0]["n_runs"] == 1
    assert rows[0]["rmse_mean"] is not None
    assert rows[0]["rmse_mean"] < 0.25  # straight lane vs straight reference
