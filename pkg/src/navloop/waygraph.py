"""Layered waypoint graph and shortest-route selection.

The robot pose is layer 0; the candidates for the i-th description form
layer i. Directed edges connect consecutive layers only, so any route from
the source to the terminal layer visits exactly one waypoint per
description, in order. Edge weights come from the live-grid planner except
for near-coincident pairs, which keep their Euclidean length and skip the
planner call entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeWeight, NoFeasibleRoute
from .grid import OccupancyGrid, WorldPose
from .planner import PlannerConfig, plan
from .semantic import CandidateWaypoint


@dataclass(frozen=True)
class GraphVertex:
    pose: WorldPose
    layer: int


@dataclass(frozen=True)
class WaypointGraph:
    vertices: tuple[GraphVertex, ...]
    layers: tuple[tuple[int, ...], ...]
    weights: np.ndarray = field(repr=False)  # (V, V) float64, +inf = no edge

    @property
    def n(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Route:
    """One vertex per layer, source first; length is the sum of edge weights."""

    vertices: tuple[int, ...]
    poses: tuple[WorldPose, ...]
    length: float


def default_prune_eps(grid: OccupancyGrid) -> float:
    return 2.0 * grid.resolution


def build_graph(
    robot_pose: WorldPose,
    candidate_layers: list[list[CandidateWaypoint]],
    grid: OccupancyGrid,
    cfg: PlannerConfig = PlannerConfig(),
    prune_eps: float | None = None,
) -> WaypointGraph:
    """Weight consecutive-layer pairs with planned path lengths.

    Pairs closer than ``prune_eps`` (Euclidean, default 2x resolution) take
    the straight-line length without consulting the planner. Unreachable
    pairs keep +inf.
    """
    eps = default_prune_eps(grid) if prune_eps is None else prune_eps
    vertices = [GraphVertex(robot_pose, 0)]
    layers: list[tuple[int, ...]] = [(0,)]
    for i, cands in enumerate(candidate_layers, start=1):
        if not cands:
            raise ValueError(f"layer {i} has no candidates")
        ids = []
        for c in cands:
            ids.append(len(vertices))
            vertices.append(GraphVertex(c.pose, i))
        layers.append(tuple(ids))

    n = len(vertices)
    weights = np.full((n, n), np.inf)
    for src_layer, dst_layer in zip(layers[:-1], layers[1:]):
        for u in src_layer:
            for v in dst_layer:
                a, b = vertices[u].pose, vertices[v].pose
                euclid = math.hypot(b.x - a.x, b.y - a.y)
                if euclid < eps:
                    weights[u, v] = euclid
                    continue
                path = plan(grid, cfg, a, b)
                if path is not None:
                    weights[u, v] = path.length
    return WaypointGraph(tuple(vertices), tuple(layers), weights)


def floyd_warshall(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs shortest paths with a successor matrix.

    Returns (dist, nxt); nxt[i, j] is the vertex after i on the best i->j
    path, -1 when unreachable. Ties keep the earliest-discovered path so
    the result is deterministic. Raises NegativeWeight on any weight < 0.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weight matrix must be square, got {w.shape}")
    if (w[np.isfinite(w)] < 0).any():
        raise NegativeWeight("negative edge weight")
    n = w.shape[0]
    dist = w.copy()
    nxt = np.where(np.isfinite(w), np.arange(n)[None, :], -1).astype(np.int64)
    np.fill_diagonal(dist, 0.0)
    np.fill_diagonal(nxt, np.arange(n))
    for k in range(n):
        alt = dist[:, k, None] + dist[None, k, :]
        better = alt < dist
        if better.any():
            dist = np.where(better, alt, dist)
            nxt = np.where(better, nxt[:, k, None], nxt)
    return dist, nxt


def reconstruct(nxt: np.ndarray, i: int, j: int) -> list[int] | None:
    """Vertex sequence i..j from a successor matrix, None if unreachable."""
    if nxt[i, j] < 0:
        return None
    path = [i]
    while i != j:
        i = int(nxt[i, j])
        path.append(i)
    return path


def select_route(graph: WaypointGraph) -> Route:
    """Cheapest source-to-terminal-layer route.

    Among equally short terminals the lowest vertex index wins. Raises
    NoFeasibleRoute when the terminal layer is unreachable.
    """
    dist, nxt = floyd_warshall(graph.weights)
    terminals = graph.layers[-1]
    best = min(terminals, key=lambda v: (dist[0, v], v))
    if not np.isfinite(dist[0, best]):
        raise NoFeasibleRoute("terminal layer unreachable from the robot pose")
    seq = reconstruct(nxt, 0, best)
    assert seq is not None
    poses = tuple(graph.vertices[v].pose for v in seq)
    return Route(tuple(seq), poses, float(dist[0, best]))


def dump_graph(graph: WaypointGraph) -> dict:
    """JSON-ready snapshot: vertices with layer tags plus finite edges."""
    edges = []
    finite = np.argwhere(np.isfinite(graph.weights))
    for u, v in finite:
        edges.append({"u": int(u), "v": int(v),
                      "weight": float(graph.weights[u, v])})
    return {
        "vertices": [
            {"x": vert.pose.x, "y": vert.pose.y, "theta": vert.pose.theta,
             "layer": vert.layer}
            for vert in graph.vertices
        ],
        "layers": [list(layer) for layer in graph.layers],
        "edges": edges,
    }
