"""Generate and verify the committed scenario corpus.

Everything here is deterministic; rerunning overwrites the same bytes.
Each scenario is executed after generation and its intended behavior is
asserted, so a geometry edit that breaks the choreography fails loudly
here instead of in the test suite.

Corridor family (res 0.5, 7x26): a single-lane corridor with a doorway at
column 8 that closes at t=0.2. The detour duct west/east of the door adds
exactly 2k rectilinear steps, and the lane is sized so the reference plan
at the sensing tick is exactly 10.0 m, which pins the deviation ratio to
k/10: k=3 -> 0.30 (one query), k=2 -> 0.20 (no query). The "block"
variant has no duct, so the closure means NoPath.

House (res 0.25, 60x60): four rooms, doors between them; the west door in
the middle wall closes almost immediately, the resulting deviation raises
one query. The scripted two-phrase answer routes the robot through the
south-east and north-east rooms before it resumes its three mission
waypoints. The reference route is the concatenation of planned legs on
the post-closure map.
"""

from __future__ import annotations

import json
import pathlib

import numpy as np

from navloop.grid import FREE, OCCUPIED, OccupancyGrid, WorldPose, save_occupancy_file
from navloop.metrics import TrajectoryPair, rmse
from navloop.planner import PlannerConfig, plan
from navloop.semantic import (
    FeatureGrid,
    SemanticParams,
    VocabularyEmbedding,
    candidates_for,
    save_feature_grid,
    save_vocabulary,
)
from navloop.sim import ScriptedFeedback, init_state, load_scenario, run, step

HERE = pathlib.Path(__file__).parent


def write_json(path: pathlib.Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


# ---------- corridor family ----------

CORRIDOR_LANE = 5      # row of the main lane
CORRIDOR_DOOR = 8      # column of the closing doorway
CORRIDOR_GOAL = 24     # goal column; 20 cells from the sensing cell = 10.0 m


def corridor_grid(duct_k: int | None) -> OccupancyGrid:
    cells = np.full((7, 26), OCCUPIED, np.int8)
    cells[CORRIDOR_LANE, 1:CORRIDOR_GOAL + 1] = FREE
    if duct_k:
        top = CORRIDOR_LANE - duct_k
        cells[top, CORRIDOR_DOOR - 1:CORRIDOR_DOOR + 2] = FREE
        cells[top + 1:CORRIDOR_LANE, CORRIDOR_DOOR - 1] = FREE
        cells[top + 1:CORRIDOR_LANE, CORRIDOR_DOOR + 1] = FREE
    return OccupancyGrid(0.5, (0.0, 0.0), cells)


def corridor_scenario_raw(name: str, with_semantic: bool) -> dict:
    raw = {
        "name": name,
        "true_grid": f"{name}.occ",
        "prior_grid": f"{name}.occ",
        "start": [0.75, 2.75, 0.0],
        "mission": {"waypoints": [[12.25, 2.75, 0.0]],
                    "goal_tolerance": 0.3, "heading_tolerance": 0.5},
        "change_events": [
            {"time": 0.2, "cells": [[CORRIDOR_LANE, CORRIDOR_DOOR]],
             "state": "occupied"}],
        "sensor_radius": 2.0,
        "speed": 1.0,
        "replan_rate": 5.0,
        "tau": 0.25,
        "seed": 0,
    }
    if with_semantic:
        raw["feature_grid"] = f"{name}.fgrid"
        raw["vocabulary"] = f"{name}.tsv"
        raw["semantic"] = {"k": 2}
    return raw


def corridor_semantics(name: str) -> None:
    """One hot region around the goal end of the lane."""
    feat = np.zeros((7, 26, 1), np.float32)
    feat[..., 0] = 0.05
    feat[CORRIDOR_LANE - 1:CORRIDOR_LANE + 2,
         CORRIDOR_GOAL - 2:CORRIDOR_GOAL + 1, 0] = 1.0
    save_feature_grid(FeatureGrid(feat, np.ones((7, 26), bool)),
                      HERE / f"{name}.fgrid")
    save_vocabulary({"the loading dock": np.array([1.0])}, HERE / f"{name}.tsv")


def build_corridors() -> None:
    # 30% detour: duct k=3 -> deviation exactly 0.30 at the sensing tick
    save_occupancy_file(corridor_grid(3), HERE / "corridor30.occ")
    corridor_semantics("corridor30")
    write_json(HERE / "corridor30.json", corridor_scenario_raw("corridor30", True))
    write_json(HERE / "corridor30.feedback.json", [["the loading dock"]])

    # 20% detour: duct k=2 -> deviation exactly 0.20, below tau
    save_occupancy_file(corridor_grid(2), HERE / "corridor20.occ")
    write_json(HERE / "corridor20.json", corridor_scenario_raw("corridor20", False))

    # no duct: the closure is a full blockage (NoPath)
    save_occupancy_file(corridor_grid(None), HERE / "corridor_block.occ")
    write_json(HERE / "corridor_block.json",
               corridor_scenario_raw("corridor_block", False))


def verify_corridors() -> None:
    sc30 = load_scenario(HERE / "corridor30.json")
    report = run(sc30, ScriptedFeedback([["the loading dock"]]))
    assert report.reached, "corridor30 must complete after feedback"
    assert len(report.queries) == 1, f"corridor30 queries: {report.queries}"
    dev = report.queries[0]["deviation"]
    assert abs(dev - 0.30) < 1e-9, f"corridor30 deviation {dev}"
    print(f"corridor30: reached in {report.tick_count} ticks, "
          f"1 query at deviation {dev:.2f}")

    sc20 = load_scenario(HERE / "corridor20.json")
    report = run(sc20)
    assert report.reached and not report.queries and not report.stalled
    # confirm the detour really was taken and assessed at 0.20: replay and
    # watch the monitor state at the sensing tick
    state = init_state(sc20)
    seen = []
    while not state.completed:
        step(state, sc20)
        if state.monitor.last_deviation is not None:
            seen.append(state.monitor.last_deviation)
    peak = max(seen)
    assert abs(peak - 0.20) < 1e-9, f"corridor20 peak deviation {peak}"
    print(f"corridor20: reached in {report.tick_count} ticks, "
          f"0 queries, peak deviation {peak:.2f}")

    scb = load_scenario(HERE / "corridor_block.json")
    report = run(scb)
    assert report.stalled and not report.reached
    state = init_state(scb)
    door = (CORRIDOR_LANE, CORRIDOR_DOOR)
    seen_tick = None
    while state.pending_query is None:
        step(state, scb)
        if seen_tick is None and state.live_grid.cells[door] == OCCUPIED:
            seen_tick = state.tick_count
    assert state.tick_count == seen_tick, "query must land on the sensing tick"
    assert state.pending_query.reason == "no_path"
    print(f"corridor_block: no-path query on sensing tick {seen_tick}")


# ---------- house ----------

H = 60
RES = 0.25
MID = 30                      # shared wall row/col
D1 = slice(14, 17)            # west door in the middle wall (closes)
D2 = slice(44, 47)            # east door in the middle wall
DOOR_N = slice(14, 17)        # door in the north half of the col-30 wall
DOOR_S = slice(44, 47)        # door in the south half of the col-30 wall


def house_grid() -> OccupancyGrid:
    cells = np.zeros((H, H), np.int8)
    cells[0, :] = cells[-1, :] = OCCUPIED
    cells[:, 0] = cells[:, -1] = OCCUPIED
    cells[MID, :] = OCCUPIED           # east-west wall
    cells[:, MID] = OCCUPIED           # north-south wall
    cells[MID, D1] = FREE
    cells[MID, D2] = FREE
    cells[DOOR_N, MID] = FREE
    cells[DOOR_S, MID] = FREE
    return OccupancyGrid(RES, (0.0, 0.0), cells)


def cell_center(r: int, c: int) -> list[float]:
    return [c * RES + RES / 2.0, r * RES + RES / 2.0, 0.0]


HOUSE_START = cell_center(36, 15)          # south-west room, below the west door
HOUSE_WPS = [cell_center(20, 15),          # north-west room
             cell_center(20, 45),          # north-east room
             cell_center(45, 45)]          # south-east room
HOUSE_PHRASES = ["the dining table", "the reading lamp"]


def house_semantics() -> tuple[FeatureGrid, VocabularyEmbedding]:
    feat = np.zeros((H, H, 2), np.float32)
    feat[..., :] = 0.05
    feat[33:36, 44:47, 0] = 1.0   # dining table: south-east room, by the east door
    feat[24:27, 44:47, 1] = 1.0   # reading lamp: north-east room, by the east door
    fg = FeatureGrid(feat, np.ones((H, H), bool))
    vocab = VocabularyEmbedding({
        HOUSE_PHRASES[0]: np.array([1.0, 0.0]),
        HOUSE_PHRASES[1]: np.array([0.0, 1.0]),
    })
    return fg, vocab


def house_reference_route(closed: OccupancyGrid,
                          fg: FeatureGrid,
                          vocab: VocabularyEmbedding) -> list[list[float]]:
    """Planned legs start -> candidate1 -> candidate2 -> wp1 -> wp2 -> wp3
    on the post-closure map; this is the route an ideal follower traces."""
    params = SemanticParams(k=2)
    c1 = candidates_for(HOUSE_PHRASES[0], fg, closed, vocab, params)[0].pose
    c2 = candidates_for(HOUSE_PHRASES[1], fg, closed, vocab, params)[0].pose
    stops = [WorldPose(*HOUSE_START), c1, c2] + [WorldPose(*wp) for wp in HOUSE_WPS]
    cfg = PlannerConfig()
    route: list[list[float]] = []
    for a, b in zip(stops, stops[1:]):
        leg = plan(closed, cfg, a, b)
        assert leg is not None, f"reference leg {a} -> {b} unplannable"
        poses = leg.poses if not route else leg.poses[1:]
        route.extend([p.x, p.y, p.theta] for p in poses)
    return route


def build_house() -> None:
    grid = house_grid()
    save_occupancy_file(grid, HERE / "house.occ")
    fg, vocab = house_semantics()
    save_feature_grid(fg, HERE / "house.fgrid")
    save_vocabulary({p: vocab.embed(p).vector for p in HOUSE_PHRASES},
                    HERE / "house.tsv")

    closed_cells = grid.cells.copy()
    closed_cells[MID, D1] = OCCUPIED
    closed = grid.with_cells(closed_cells)
    write_json(HERE / "house.reference.json",
               house_reference_route(closed, fg, vocab))
    write_json(HERE / "house.feedback.json", [HOUSE_PHRASES])

    raw = {
        "name": "house",
        "true_grid": "house.occ",
        "prior_grid": "house.occ",
        "feature_grid": "house.fgrid",
        "vocabulary": "house.tsv",
        "semantic": {"k": 2},
        "start": HOUSE_START,
        "mission": {"waypoints": HOUSE_WPS,
                    "goal_tolerance": 0.3, "heading_tolerance": 0.5},
        "change_events": [
            {"time": 0.4, "rect": [MID, D1.start, MID, D1.stop - 1],
             "state": "occupied"}],
        "sensor_radius": 2.0,
        "speed": 1.0,
        "replan_rate": 5.0,
        "tau": 0.25,
        "seed": 0,
        "reference_route": "house.reference.json",
    }
    write_json(HERE / "house.json", raw)


def verify_house() -> None:
    import time

    sc = load_scenario(HERE / "house.json")
    t0 = time.monotonic()
    report = run(sc, ScriptedFeedback([HOUSE_PHRASES]))
    wall = time.monotonic() - t0
    assert report.reached, "house mission must complete"
    assert len(report.queries) == 1, f"house queries: {len(report.queries)}"
    assert report.queries[0]["spliced"] == 2
    pair = TrajectoryPair(
        executed=tuple(p for _, p in report.trajectory),
        reference=sc.reference_route,
    )
    err = rmse(pair)
    assert err <= 3 * RES, f"house RMSE {err:.3f} > {3 * RES}"
    print(f"house: reached in {report.tick_count} ticks ({wall:.2f} s wall), "
          f"1 query, 2 spliced, RMSE {err:.3f} m (limit {3 * RES})")


def main() -> None:
    build_corridors()
    verify_corridors()
    build_house()
    verify_house()
    print("all scenario assets verified")


if __name__ == "__main__":
    main()
