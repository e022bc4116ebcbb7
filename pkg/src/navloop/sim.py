"""Discrete-time mission executor with human-in-the-loop replanning.

Each tick: apply due world changes, reveal truth within sensor range into
the live map, replan to the current target, run the deviation check, then
either freeze and raise a query or advance along the plan. Feedback
phrases resolve a pending query by turning each phrase into candidate
waypoints, selecting the cheapest layered route, and splicing it ahead of
the interrupted target.

Everything is deterministic: fixed tick = 1/replan_rate, no wall-clock
coupling, scripted feedback. The same scenario and script always produce
the same report bytes.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    FeedbackExhausted,
    NavloopError,
    ScenarioError,
)
from .grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    GridIndex,
    OccupancyGrid,
    WorldPose,
    load_occupancy_file,
)
from .planner import PlannedPath, PlannerConfig, plan
from .query import Decision, DeviationMonitor
from .semantic import (
    FeatureGrid,
    SemanticParams,
    VocabularyEmbedding,
    candidates_for,
    load_feature_grid,
    load_vocabulary,
)
from .waygraph import build_graph, select_route

_STATE_NAMES = {"free": FREE, "occupied": OCCUPIED, "unknown": UNKNOWN}


@dataclass(frozen=True)
class Mission:
    """Operator waypoints the robot must visit, in order."""

    waypoints: tuple[WorldPose, ...]
    goal_tolerance: float
    heading_tolerance: float

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ValueError("mission needs at least one waypoint")
        if self.goal_tolerance <= 0 or self.heading_tolerance <= 0:
            raise ValueError("mission tolerances must be positive")


@dataclass(frozen=True)
class ChangeEvent:
    """World mutation applied to the true grid once its time is due."""

    time: float
    cells: tuple[GridIndex, ...]
    state: int

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("event time must be >= 0")
        if self.state not in (FREE, OCCUPIED, UNKNOWN):
            raise ValueError(f"bad event state {self.state}")


@dataclass(frozen=True)
class Scenario:
    name: str
    true_grid: OccupancyGrid
    prior_grid: OccupancyGrid
    feature_grid: FeatureGrid | None
    vocabulary: VocabularyEmbedding | None
    start: WorldPose
    mission: Mission
    change_events: tuple[ChangeEvent, ...] = ()
    sensor_radius: float = 2.0
    speed: float = 1.0
    replan_rate: float = 5.0
    tau: float = 0.25
    seed: int = 0
    planner: PlannerConfig = PlannerConfig()
    semantic: SemanticParams = SemanticParams()
    splice_mode: str = "extend"  # "extend" keeps pending queue, "replace" drops spliced leftovers
    timeout_factor: float = 10.0
    reference_route: tuple[WorldPose, ...] | None = None  # for RMSE reporting
    arrival_window: float | None = None  # meters; None -> derived, see arrival_window_m

    def __post_init__(self):
        t, p = self.true_grid, self.prior_grid
        if (t.height, t.width) != (p.height, p.width):
            raise ScenarioError("true and prior grids differ in size")
        if self.feature_grid is not None and (
            self.feature_grid.height, self.feature_grid.width
        ) != (t.height, t.width):
            raise ScenarioError("feature grid not aligned with occupancy grids")
        if self.replan_rate <= 0:
            raise ScenarioError("replan_rate must be > 0")
        if self.speed <= 0:
            raise ScenarioError("speed must be > 0")
        if self.sensor_radius < 0:
            raise ScenarioError("sensor_radius must be >= 0")
        if self.splice_mode not in ("extend", "replace"):
            raise ScenarioError(f"unknown splice_mode {self.splice_mode!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.replan_rate

    @property
    def arrival_window_m(self) -> float:
        """Range within which shrinking plans stop feeding the monitor.

        Cell-center quantization makes a plan lose up to sqrt(2)*res per
        crossed boundary; against a reference shorter than this window
        that single jump alone exceeds tau, so deviation checks there
        would fire on plain progress.
        """
        if self.arrival_window is not None:
            return self.arrival_window
        res = self.true_grid.resolution
        crossings = max(1.0, math.ceil(self.speed * self.dt / res))
        return crossings * math.sqrt(2.0) * res / self.tau


@dataclass(frozen=True)
class QueueEntry:
    pose: WorldPose
    mission_index: int | None  # None for feedback-spliced waypoints
    label: str


@dataclass(frozen=True)
class PendingQuery:
    query_id: int
    time: float
    robot: WorldPose
    reason: str  # "deviation" | "no_path"
    deviation: float | None


@dataclass
class SimState:
    """Single-writer simulation state; snapshots for observers are dicts."""

    time: float
    tick_count: int
    robot: WorldPose
    true_grid: OccupancyGrid
    live_grid: OccupancyGrid
    queue: list[QueueEntry]
    monitor: DeviationMonitor
    current_plan: PlannedPath | None = None
    pending_query: PendingQuery | None = None
    executed_trajectory: list[tuple[float, WorldPose]] = field(default_factory=list)
    query_log: list[dict] = field(default_factory=list)
    feedback_errors: list[dict] = field(default_factory=list)
    event_log: list[dict] = field(default_factory=list)
    last_candidates: list[list[dict]] = field(default_factory=list)
    events_applied: int = 0
    queries_raised: int = 0
    waypoints_reached: int = 0

    @property
    def completed(self) -> bool:
        return not self.queue

    def emit(self, kind: str, **payload) -> None:
        self.event_log.append(
            {"seq": len(self.event_log), "kind": kind, "time": self.time, **payload}
        )


def init_state(scenario: Scenario) -> SimState:
    queue = [
        QueueEntry(pose, i, f"mission-{i}")
        for i, pose in enumerate(scenario.mission.waypoints)
    ]
    state = SimState(
        time=0.0,
        tick_count=0,
        robot=scenario.start,
        true_grid=scenario.true_grid,
        live_grid=scenario.prior_grid,
        queue=queue,
        monitor=DeviationMonitor(scenario.tau),
    )
    state.executed_trajectory.append((0.0, scenario.start))
    return state


# ---------- per-tick pieces ----------

def _apply_due_events(state: SimState, scenario: Scenario) -> None:
    cells = None
    while state.events_applied < len(scenario.change_events):
        ev = scenario.change_events[state.events_applied]
        if ev.time > state.time + 1e-9:
            break
        if cells is None:
            cells = state.true_grid.cells.copy()
        for r, c in ev.cells:
            cells[r, c] = ev.state
        state.events_applied += 1
    if cells is not None:
        state.true_grid = state.true_grid.with_cells(cells)


def _sense(state: SimState, scenario: Scenario) -> None:
    """Omnidirectional reveal: truth overwrites the live map within range."""
    g = state.live_grid
    res = g.resolution
    rows = g.origin.y + (np.arange(g.height) + 0.5) * res
    cols = g.origin.x + (np.arange(g.width) + 0.5) * res
    d2 = (cols[None, :] - state.robot.x) ** 2 + (rows[:, None] - state.robot.y) ** 2
    mask = d2 <= scenario.sensor_radius**2 + 1e-9
    if not mask.any():
        return
    if (g.cells[mask] == state.true_grid.cells[mask]).all():
        return
    cells = g.cells.copy()
    cells[mask] = state.true_grid.cells[mask]
    state.live_grid = g.with_cells(cells)


def _advance_along(path: PlannedPath, robot: WorldPose, budget: float) -> WorldPose:
    """Walk `budget` meters along robot -> path polyline, heading follows.

    The plan's first pose is the robot's own cell center; steering back to
    it would oscillate, so the walk heads for the next center instead.
    """
    rest = path.poses[1:] if len(path.poses) > 1 else path.poses
    pts = [(robot.x, robot.y)] + [(p.x, p.y) for p in rest]
    x, y = pts[0]
    theta = robot.theta
    for nx, ny in pts[1:]:
        seg = math.hypot(nx - x, ny - y)
        if seg <= 1e-12:
            continue
        heading = math.atan2(ny - y, nx - x)
        if budget < seg:
            f = budget / seg
            return WorldPose(x + f * (nx - x), y + f * (ny - y), heading)
        x, y, theta = nx, ny, heading
        budget -= seg
    return WorldPose(x, y, theta)


def step(state: SimState, scenario: Scenario) -> SimState:
    """One tick of the sense/replan/assess/move loop."""
    if state.pending_query is not None:
        raise ValueError("cannot step while a query is pending")
    if state.completed:
        raise ValueError("mission already complete")

    state.tick_count += 1
    state.time = state.tick_count * scenario.dt
    _apply_due_events(state, scenario)
    _sense(state, scenario)

    target = state.queue[0]
    new_plan = plan(state.live_grid, scenario.planner, state.robot, target.pose)
    prev_cells = None if state.current_plan is None else state.current_plan.cells
    state.current_plan = new_plan
    if new_plan is not None and new_plan.cells != prev_cells:
        state.emit(
            "plan_updated",
            length=new_plan.length,
            n_cells=len(new_plan.cells),
            target=[target.pose.x, target.pose.y],
        )

    ref = state.monitor.reference_length
    if (
        new_plan is not None
        and ref is not None
        and new_plan.length < ref
        and new_plan.length <= scenario.arrival_window_m
    ):
        # closing on the goal: shrinkage here is progress, not deviation
        state.monitor.adopt(new_plan.length)
        decision = Decision.CONTINUE
    else:
        decision = state.monitor.assess(new_plan)
    if decision is Decision.QUERY:
        query = PendingQuery(
            query_id=state.queries_raised,
            time=state.time,
            robot=state.robot,
            reason="no_path" if new_plan is None else "deviation",
            deviation=state.monitor.last_deviation,
        )
        state.queries_raised += 1
        state.pending_query = query
        state.emit(
            "query_raised",
            query_id=query.query_id,
            reason=query.reason,
            deviation=query.deviation,
            robot=[state.robot.x, state.robot.y, state.robot.theta],
        )
        state.executed_trajectory.append((state.time, state.robot))
        return state

    if new_plan is not None:
        state.robot = _advance_along(new_plan, state.robot, scenario.speed * scenario.dt)
        if state.robot.distance_to(target.pose) <= scenario.mission.goal_tolerance:
            # ideal follower: heading snaps to the waypoint's on arrival
            state.robot = WorldPose(state.robot.x, state.robot.y, target.pose.theta)
            state.queue.pop(0)
            state.monitor.reset()
            state.current_plan = None
            if target.mission_index is not None:
                state.waypoints_reached += 1
            state.emit("waypoint_reached", label=target.label,
                       mission_index=target.mission_index)
            if state.completed:
                state.emit("mission_complete", waypoints=state.waypoints_reached)
    state.executed_trajectory.append((state.time, state.robot))
    return state


def handle_feedback(state: SimState, scenario: Scenario, phrases: list[str]) -> SimState:
    """Resolve the pending query with ordered description phrases.

    Candidates come from the live grid as it stands now. The selected
    route is spliced ahead of the interrupted target; the remaining queue
    is kept ("extend") or reduced to mission waypoints ("replace"). On any
    error the query stays pending so the source can retry.
    """
    if state.pending_query is None:
        raise ValueError("no pending query")
    if not phrases:
        raise ScenarioError("feedback must contain at least one phrase")
    if scenario.feature_grid is None or scenario.vocabulary is None:
        raise ScenarioError("scenario has no semantic layer to answer queries")

    query = state.pending_query
    try:
        layers = [
            candidates_for(
                phrase,
                scenario.feature_grid,
                state.live_grid,
                scenario.vocabulary,
                scenario.semantic,
                description_index=i,
            )
            for i, phrase in enumerate(phrases)
        ]
        graph = build_graph(state.robot, layers, state.live_grid, scenario.planner)
        route = select_route(graph)
    except NavloopError as e:
        record = {
            "time": state.time,
            "query_id": query.query_id,
            "error": type(e).__name__,
            "detail": str(e),
            "phrases": list(phrases),
        }
        state.feedback_errors.append(record)
        state.emit("error", **record)
        raise

    spliced = route.poses[1:]  # drop the robot-pose source vertex
    assert len(spliced) == len(phrases), "route must carry one waypoint per phrase"
    entries = [
        QueueEntry(pose, None, f"feedback-{query.query_id}-{j}")
        for j, pose in enumerate(spliced)
    ]
    if scenario.splice_mode == "extend":
        state.queue = entries + state.queue
    else:
        state.queue = entries + [e for e in state.queue if e.mission_index is not None]

    state.last_candidates = [
        [
            {
                "x": c.pose.x,
                "y": c.pose.y,
                "region_id": c.region_id,
                "clearance": c.clearance,
                "phrase": phrases[i],
            }
            for c in layer
        ]
        for i, layer in enumerate(layers)
    ]
    entry = {
        "query_id": query.query_id,
        "time": query.time,
        "reason": query.reason,
        "deviation": query.deviation,
        "robot": [query.robot.x, query.robot.y, query.robot.theta],
        "phrases": list(phrases),
        "route": [[p.x, p.y, p.theta] for p in spliced],
        "route_length": route.length,
        "spliced": len(spliced),
    }
    state.query_log.append(entry)
    state.pending_query = None
    state.monitor.reset()
    state.emit(
        "plan_updated",
        length=route.length,
        n_cells=0,
        target=[spliced[0].x, spliced[0].y],
        spliced=len(spliced),
        query_id=query.query_id,
    )
    return state


# ---------- scripted execution ----------

class ScriptedFeedback:
    """Fixed list of phrase sequences, one handed out per query (or retry)."""

    def __init__(self, scripts: list[list[str]]):
        self._scripts = [list(s) for s in scripts]
        self._cursor = 0

    def next_phrases(self) -> list[str]:
        if self._cursor >= len(self._scripts):
            raise FeedbackExhausted(
                f"feedback script exhausted after {self._cursor} answers"
            )
        out = self._scripts[self._cursor]
        self._cursor += 1
        return list(out)


def nominal_time(scenario: Scenario) -> float:
    """Straight-line mission traversal time, the timeout yardstick."""
    legs = 0.0
    prev = scenario.start
    for wp in scenario.mission.waypoints:
        legs += prev.distance_to(wp)
        prev = wp
    return max(legs / scenario.speed, scenario.dt)


@dataclass
class MissionReport:
    scenario: str
    seed: int
    tau: float
    reached: bool
    timed_out: bool
    stalled: bool
    tick_count: int
    sim_time: float
    final_pose: WorldPose
    waypoints_total: int
    waypoints_reached: int
    queries: list[dict]
    feedback_errors: list[dict]
    trajectory: list[tuple[float, WorldPose]]
    wall_clock_s: float  # excluded from canonical bytes: not reproducible

    def to_dict(self) -> dict:
        return {
            "schema": "mission-report/1",
            "scenario": self.scenario,
            "seed": self.seed,
            "tau": self.tau,
            "reached": self.reached,
            "timed_out": self.timed_out,
            "stalled": self.stalled,
            "tick_count": self.tick_count,
            "sim_time": self.sim_time,
            "final_pose": [self.final_pose.x, self.final_pose.y, self.final_pose.theta],
            "waypoints_total": self.waypoints_total,
            "waypoints_reached": self.waypoints_reached,
            "queries": self.queries,
            "feedback_errors": self.feedback_errors,
            "trajectory": [[t, p.x, p.y, p.theta] for t, p in self.trajectory],
        }

    def to_json_bytes(self) -> bytes:
        return (
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
        ).encode("utf-8")


def run(scenario: Scenario, feedback: ScriptedFeedback | None = None) -> MissionReport:
    """Execute the mission to completion, timeout, or feedback stall."""
    t0 = _time.monotonic()
    state = init_state(scenario)
    max_ticks = math.ceil(scenario.timeout_factor * nominal_time(scenario) / scenario.dt)
    stalled = False
    while not state.completed and state.tick_count < max_ticks:
        if state.pending_query is not None:
            if feedback is None:
                stalled = True
                break
            try:
                phrases = feedback.next_phrases()
            except FeedbackExhausted:
                stalled = True
                break
            try:
                handle_feedback(state, scenario, phrases)
            except NavloopError:
                continue  # logged; query stays pending, source may retry
        else:
            step(state, scenario)
    return MissionReport(
        scenario=scenario.name,
        seed=scenario.seed,
        tau=scenario.tau,
        reached=state.completed,
        timed_out=not state.completed and not stalled,
        stalled=stalled,
        tick_count=state.tick_count,
        sim_time=state.time,
        final_pose=state.robot,
        waypoints_total=len(scenario.mission.waypoints),
        waypoints_reached=state.waypoints_reached,
        queries=list(state.query_log),
        feedback_errors=list(state.feedback_errors),
        trajectory=list(state.executed_trajectory),
        wall_clock_s=_time.monotonic() - t0,
    )


# ---------- scenario files ----------

def _pose_from(value, where: str) -> WorldPose:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ScenarioError(f"{where}: pose must be [x, y, theta]")
    return WorldPose(float(value[0]), float(value[1]), float(value[2]))


def _event_cells(spec: dict, where: str) -> tuple[GridIndex, ...]:
    if "rect" in spec:
        r0, c0, r1, c1 = (int(v) for v in spec["rect"])
        if r1 < r0 or c1 < c0:
            raise ScenarioError(f"{where}: rect corners out of order")
        return tuple(
            GridIndex(r, c)
            for r in range(r0, r1 + 1)
            for c in range(c0, c1 + 1)
        )
    if "cells" in spec:
        return tuple(GridIndex(int(r), int(c)) for r, c in spec["cells"])
    raise ScenarioError(f"{where}: change event needs 'rect' or 'cells'")


def _load_route(path) -> tuple[WorldPose, ...]:
    """Route file: JSON array of [x, y, theta] poses."""
    raw = json.loads(open(path, encoding="utf-8").read())
    return tuple(_pose_from(p, f"{path}[{i}]") for i, p in enumerate(raw))


def load_scenario(path) -> Scenario:
    """Scenario JSON; grid/vocabulary paths resolve relative to the file."""
    import pathlib

    path = pathlib.Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}: {e.msg}") from None

    def resolve(rel):
        return path.parent / rel

    try:
        true_grid = load_occupancy_file(resolve(raw["true_grid"]))
        prior_grid = load_occupancy_file(resolve(raw["prior_grid"]))
        feature_grid = (
            load_feature_grid(resolve(raw["feature_grid"]))
            if raw.get("feature_grid")
            else None
        )
        vocabulary = (
            load_vocabulary(resolve(raw["vocabulary"]))
            if raw.get("vocabulary")
            else None
        )
        m = raw["mission"]
        mission = Mission(
            waypoints=tuple(
                _pose_from(w, f"mission.waypoints[{i}]")
                for i, w in enumerate(m["waypoints"])
            ),
            goal_tolerance=float(m.get("goal_tolerance", 0.3)),
            heading_tolerance=float(m.get("heading_tolerance", 0.5)),
        )
        events = tuple(
            ChangeEvent(
                time=float(ev["time"]),
                cells=_event_cells(ev, f"change_events[{i}]"),
                state=_STATE_NAMES[str(ev["state"]).lower()],
            )
            for i, ev in enumerate(raw.get("change_events", ()))
        )
        planner_raw = raw.get("planner", {})
        semantic_raw = raw.get("semantic", {})
        scenario = Scenario(
            name=str(raw.get("name", path.stem)),
            true_grid=true_grid,
            prior_grid=prior_grid,
            feature_grid=feature_grid,
            vocabulary=vocabulary,
            start=_pose_from(raw["start"], "start"),
            mission=mission,
            change_events=events,
            sensor_radius=float(raw.get("sensor_radius", 2.0)),
            speed=float(raw.get("speed", 1.0)),
            replan_rate=float(raw.get("replan_rate", 5.0)),
            tau=float(raw.get("tau", 0.25)),
            seed=int(raw.get("seed", 0)),
            planner=PlannerConfig(
                inflation_radius=float(planner_raw.get("inflation_radius", 0.0)),
                treat_unknown_as=str(
                    planner_raw.get("treat_unknown_as", "obstacle")
                ),
            ),
            semantic=SemanticParams(
                k=int(semantic_raw.get("k", 3)),
                seed=int(semantic_raw.get("seed", 0)),
                radius=(
                    float(semantic_raw["radius"])
                    if semantic_raw.get("radius") is not None
                    else None
                ),
                clearance_policy=str(
                    semantic_raw.get("clearance_policy", "occupied_and_unknown")
                ),
                filter_ops=tuple(semantic_raw.get("filter_ops", ("open", "close"))),
            ),
            splice_mode=str(raw.get("splice_mode", "extend")),
            timeout_factor=float(raw.get("timeout_factor", 10.0)),
            arrival_window=(
                float(raw["arrival_window"])
                if raw.get("arrival_window") is not None
                else None
            ),
            reference_route=_load_route(resolve(raw["reference_route"]))
            if raw.get("reference_route")
            else None,
        )
    except ScenarioError:
        raise
    except KeyError as e:
        raise ScenarioError(f"{path}: missing required field {e.args[0]!r}") from None
    except (TypeError, ValueError, NavloopError) as e:
        raise ScenarioError(f"{path}: {e}") from None

    # keep event order stable for equal times: sort is stable on time only
    if any(
        events[i].time > events[i + 1].time for i in range(len(events) - 1)
    ):
        scenario = replace(
            scenario,
            change_events=tuple(sorted(events, key=lambda ev: ev.time)),
        )
    return scenario


def load_feedback_script(path) -> ScriptedFeedback:
    """Feedback JSON: ordered array of phrase arrays, one per expected query."""
    import pathlib

    path = pathlib.Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}:{e.lineno}: {e.msg}") from None
    if not isinstance(raw, list) or not all(
        isinstance(seq, list) and all(isinstance(p, str) for p in seq) for seq in raw
    ):
        raise ScenarioError(f"{path}: expected a JSON array of string arrays")
    return ScriptedFeedback(raw)
