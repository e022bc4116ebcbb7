"""Shared fixtures and independent oracles.

The oracles here deliberately reimplement the interesting algorithms with
different code (plain loops, heapq Dijkstra, brute-force scans) so the
library is checked against something it does not share internals with.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
import pytest

from navloop.grid import FREE, OCCUPIED, GridIndex, OccupancyGrid

SQRT2 = math.sqrt(2.0)

_MOVES_AXIS = ((-1, 0), (1, 0), (0, -1), (0, 1))
_MOVES_DIAG = ((-1, -1), (-1, 1), (1, -1), (1, 1))


def random_grid(rng: np.random.Generator, height: int, width: int,
                density: float, resolution: float = 0.5,
                origin=(0.0, 0.0)) -> OccupancyGrid:
    cells = np.where(rng.random((height, width)) < density, OCCUPIED, FREE)
    return OccupancyGrid(resolution, origin, cells.astype(np.int8))


def dijkstra_counts(blocked: np.ndarray, start: GridIndex,
                    goal: GridIndex) -> tuple[int, int] | None:
    """Independent shortest-path oracle.

    8-connected, diagonal moves forbidden when either adjacent axis cell
    is blocked (no corner cutting). Returns (straight, diagonal) step
    counts of an optimal path, or None when unreachable. Costs 1 and
    sqrt(2) make the optimal (s, d) pair unique, so any optimal path
    reports the same counts.
    """
    h, w = blocked.shape
    if blocked[start] or blocked[goal]:
        return None
    dist = np.full((h, w), np.inf)
    counts = {}
    dist[start] = 0.0
    counts[start] = (0, 0)
    heap = [(0.0, start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if d > dist[cell]:
            continue
        if cell == goal:
            return counts[cell]
        r, c = cell
        for dr, dc in _MOVES_AXIS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and not blocked[nr, nc]:
                nd = d + 1.0
                if nd < dist[nr, nc]:
                    dist[nr, nc] = nd
                    s, g = counts[cell]
                    counts[(nr, nc)] = (s + 1, g)
                    heapq.heappush(heap, (nd, GridIndex(nr, nc)))
        for dr, dc in _MOVES_DIAG:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or blocked[nr, nc]:
                continue
            if blocked[r, nc] or blocked[nr, c]:
                continue
            nd = d + SQRT2
            if nd < dist[nr, nc]:
                dist[nr, nc] = nd
                s, g = counts[cell]
                counts[(nr, nc)] = (s, g + 1)
                heapq.heappush(heap, (nd, GridIndex(nr, nc)))
    return None


def brute_distance_transform(obstacles: np.ndarray, resolution: float) -> np.ndarray:
    """Min Euclidean distance to any obstacle cell, by full scan."""
    h, w = obstacles.shape
    if not obstacles.any():
        return np.full((h, w), np.inf)
    obs = np.argwhere(obstacles)
    rows = np.arange(h)[:, None, None]
    cols = np.arange(w)[None, :, None]
    d2 = (rows - obs[:, 0][None, None, :]) ** 2 + (cols - obs[:, 1][None, None, :]) ** 2
    return np.sqrt(d2.min(axis=2)) * resolution


def flood_components(mask: np.ndarray) -> list[list[tuple[int, int]]]:
    """8-connected components via BFS, ordered by first row-major cell."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for r in range(h):
        for c in range(w):
            if not mask[r, c] or seen[r, c]:
                continue
            queue = [(r, c)]
            seen[r, c] = True
            cells = []
            while queue:
                cr, cc = queue.pop()
                cells.append((cr, cc))
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        nr, nc = cr + dr, cc + dc
                        if (0 <= nr < h and 0 <= nc < w and mask[nr, nc]
                                and not seen[nr, nc]):
                            seen[nr, nc] = True
                            queue.append((nr, nc))
            comps.append(sorted(cells))
    return comps


def erode_oracle(mask: np.ndarray) -> np.ndarray:
    """3x3 erosion by definition; outside the array counts as False."""
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    for r in range(h):
        for c in range(w):
            keep = True
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nr, nc = r + dr, c + dc
                    if not (0 <= nr < h and 0 <= nc < w) or not mask[nr, nc]:
                        keep = False
            out[r, c] = keep
    return out


def dilate_oracle(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    for r in range(h):
        for c in range(w):
            hit = False
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
                        hit = True
            out[r, c] = hit
    return out


def plan_between(grid, cfg, start_idx, goal_idx):
    """Cell-to-cell planning with a config, for tests that think in cells."""
    from navloop.planner import blocked_mask, plan_cells

    return plan_cells(grid, blocked_mask(grid, cfg), start_idx, goal_idx)


def matrix_dijkstra(weights: np.ndarray, src: int) -> np.ndarray:
    """Single-source shortest distances on a dense weight matrix (inf = no edge)."""
    n = weights.shape[0]
    dist = np.full(n, np.inf)
    dist[src] = 0.0
    done = [False] * n
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in range(n):
            w = weights[u, v]
            if not np.isfinite(w):
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def random_layered_graph(rng, max_layers=5, max_per_layer=5, drop=0.3,
                         dyadic=True):
    """Random layered WaypointGraph; dyadic weights keep float sums exact."""
    from navloop.grid import WorldPose
    from navloop.waygraph import GraphVertex, WaypointGraph

    n_layers = int(rng.integers(1, max_layers + 1))
    vertices = [GraphVertex(WorldPose(0.0, 0.0), 0)]
    layers = [(0,)]
    for i in range(1, n_layers + 1):
        size = int(rng.integers(1, max_per_layer + 1))
        ids = tuple(range(len(vertices), len(vertices) + size))
        for j, v in enumerate(ids):
            vertices.append(GraphVertex(WorldPose(float(i), float(j)), i))
        layers.append(ids)
    n = len(vertices)
    weights = np.full((n, n), np.inf)
    for src_layer, dst_layer in zip(layers[:-1], layers[1:]):
        for u in src_layer:
            for v in dst_layer:
                if rng.random() < drop:
                    continue
                if dyadic:
                    weights[u, v] = float(rng.integers(1, 81)) / 8.0
                else:
                    weights[u, v] = float(rng.uniform(0.1, 10.0))
    return WaypointGraph(tuple(vertices), tuple(layers), weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
