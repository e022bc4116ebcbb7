"""Deterministic grid-world navigation with human-in-the-loop replanning.

A robot follows operator waypoints on an occupancy grid, replans at a
fixed rate as the world changes under it, asks for help when the fresh
plan deviates too far from what it expected, and turns the human's
descriptive phrases into new waypoints through a semantic feature map.
"""

from .errors import (
    DegenerateTrajectory,
    DimensionMismatch,
    EmptyInput,
    FeedbackExhausted,
    NavloopError,
    NegativeWeight,
    NoFeasibleRoute,
    NoMatch,
    OutOfBounds,
    ScenarioError,
    TooFewSamples,
    UnknownPhrase,
)
from .grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    GridIndex,
    OccupancyGrid,
    WorldPose,
    connected_components,
    distance_transform,
    dump_occupancy_text,
    filter_mask,
    grid_to_world,
    load_occupancy_file,
    load_occupancy_text,
    save_occupancy_file,
    world_to_grid,
)
from .metrics import TrajectoryPair, TrialOutcome, rmse, success_rate
from .planner import PlannedPath, PlannerConfig, inflate, path_length, plan
from .query import Decision, DeviationMonitor
from .semantic import (
    CandidateWaypoint,
    FeatureGrid,
    GmmModel,
    ScoreMap,
    SemanticParams,
    VocabularyEmbedding,
    candidates_for,
    fit_gmm,
    fit_gmm_samples,
    load_feature_grid,
    load_vocabulary,
    match_mask,
    save_feature_grid,
    save_vocabulary,
    score_map,
)
from .sim import (
    ChangeEvent,
    Mission,
    MissionReport,
    Scenario,
    ScriptedFeedback,
    SimState,
    handle_feedback,
    init_state,
    load_feedback_script,
    load_scenario,
    run,
    step,
)
from .waygraph import Route, WaypointGraph, build_graph, floyd_warshall, select_route

__version__ = "0.1.0"

__all__ = [
    "FREE", "OCCUPIED", "UNKNOWN",
    "GridIndex", "OccupancyGrid", "WorldPose",
    "world_to_grid", "grid_to_world",
    "distance_transform", "filter_mask", "connected_components",
    "load_occupancy_text", "dump_occupancy_text",
    "load_occupancy_file", "save_occupancy_file",
    "PlannerConfig", "PlannedPath", "plan", "inflate", "path_length",
    "Decision", "DeviationMonitor",
    "FeatureGrid", "ScoreMap", "GmmModel", "SemanticParams",
    "VocabularyEmbedding", "CandidateWaypoint",
    "score_map", "fit_gmm", "fit_gmm_samples", "match_mask", "candidates_for",
    "load_feature_grid", "save_feature_grid",
    "load_vocabulary", "save_vocabulary",
    "WaypointGraph", "Route", "build_graph", "floyd_warshall", "select_route",
    "Mission", "Scenario", "ChangeEvent", "SimState", "MissionReport",
    "ScriptedFeedback", "init_state", "step", "handle_feedback", "run",
    "load_scenario", "load_feedback_script",
    "TrajectoryPair", "TrialOutcome", "rmse", "success_rate",
    "NavloopError", "OutOfBounds", "DimensionMismatch", "UnknownPhrase",
    "TooFewSamples", "NoMatch", "NegativeWeight", "NoFeasibleRoute",
    "DegenerateTrajectory", "EmptyInput", "FeedbackExhausted", "ScenarioError",
]
