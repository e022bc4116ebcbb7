"""Global grid planner: costmap inflation plus 8-connected A*.

Path costs are octile: ``resolution`` per axis step, ``sqrt(2)*resolution``
per diagonal step. Costs are carried as integer (straight, diagonal) step
counts and only rendered to floats through one canonical formula, so equal
optimal costs compare bit-equal (the Dijkstra oracle in the tests does the
same).

``plan`` returns ``None`` when the goal is unreachable (NoPath).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .grid import (
    FREE,
    OCCUPIED,
    GridIndex,
    OccupancyGrid,
    WorldPose,
    grid_to_world,
    world_to_grid,
)

SQRT2 = math.sqrt(2.0)

# (dr, dc) moves; diagonals last so axis moves win heap ties at equal cost
_AXIS_MOVES = ((-1, 0), (0, -1), (0, 1), (1, 0))
_DIAG_MOVES = ((-1, -1), (-1, 1), (1, -1), (1, 1))


@dataclass(frozen=True)
class PlannerConfig:
    """Inflation radius in meters; unknown cells block by default."""

    inflation_radius: float = 0.0
    treat_unknown_as: str = "obstacle"  # "obstacle" | "free"

    def __post_init__(self):
        if self.inflation_radius < 0:
            raise ValueError("inflation_radius must be >= 0")
        if self.treat_unknown_as not in ("obstacle", "free"):
            raise ValueError(f"bad treat_unknown_as: {self.treat_unknown_as!r}")


@dataclass(frozen=True)
class PlannedPath:
    """8-connected cell path with matching cell-center poses."""

    cells: tuple[GridIndex, ...]
    poses: tuple[WorldPose, ...] = field(repr=False)
    length: float
    resolution: float


def step_cost_length(n_straight: int, n_diag: int, resolution: float) -> float:
    """Canonical metric length of a mixed step count."""
    return n_straight * resolution + n_diag * (SQRT2 * resolution)


def octile_distance(a: GridIndex, b: GridIndex, resolution: float) -> float:
    dr = abs(a.row - b.row)
    dc = abs(a.col - b.col)
    lo, hi = (dr, dc) if dr < dc else (dc, dr)
    return step_cost_length(hi - lo, lo, resolution)


def path_length(path: PlannedPath) -> float:
    """Sum of per-step metric costs along the cell sequence."""
    n_straight = 0
    n_diag = 0
    cells = path.cells
    for i in range(1, len(cells)):
        dr = abs(cells[i].row - cells[i - 1].row)
        dc = abs(cells[i].col - cells[i - 1].col)
        if dr + dc == 1:
            n_straight += 1
        elif dr == 1 and dc == 1:
            n_diag += 1
        else:
            raise ValueError(f"cells {cells[i - 1]} and {cells[i]} are not 8-adjacent")
    return step_cost_length(n_straight, n_diag, path.resolution)


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    """Occupy every Free cell within Euclidean radius of an Occupied cell."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return grid
    occupied = grid.cells == OCCUPIED
    if not occupied.any():
        return grid
    dist_cells = ndimage.distance_transform_edt(~occupied)
    within = dist_cells <= radius / grid.resolution + 1e-9
    cells = grid.cells.copy()
    cells[within & (grid.cells == FREE)] = OCCUPIED
    return grid.with_cells(cells)


def blocked_mask(grid: OccupancyGrid, cfg: PlannerConfig) -> np.ndarray:
    """Cells the planner may not enter, after inflation."""
    inflated = inflate(grid, cfg.inflation_radius)
    if cfg.treat_unknown_as == "obstacle":
        return inflated.cells != FREE
    return inflated.cells == OCCUPIED


def plan(
    grid: OccupancyGrid, cfg: PlannerConfig, start: WorldPose, goal: WorldPose
) -> PlannedPath | None:
    """Minimum-length 8-connected path on the inflated grid, or None.

    A* with the octile heuristic; ties broken by lower heuristic then lower
    row-major index, which makes the returned path deterministic.
    """
    start_idx = world_to_grid(start, grid)
    goal_idx = world_to_grid(goal, grid)
    blocked = blocked_mask(grid, cfg)
    return plan_cells(grid, blocked, start_idx, goal_idx)


def plan_cells(
    grid: OccupancyGrid,
    blocked: np.ndarray,
    start_idx: GridIndex,
    goal_idx: GridIndex,
) -> PlannedPath | None:
    if blocked[start_idx.row, start_idx.col] or blocked[goal_idx.row, goal_idx.col]:
        return None
    height, width = blocked.shape
    res = grid.resolution
    n = height * width
    start_rm = start_idx.row * width + start_idx.col
    goal_rm = goal_idx.row * width + goal_idx.col

    if start_rm == goal_rm:
        pose = grid_to_world(start_idx, grid)
        return PlannedPath((start_idx,), (pose,), 0.0, res)

    g_straight = np.zeros(n, dtype=np.int32)
    g_diag = np.zeros(n, dtype=np.int32)
    g_cost = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=bool)
    blocked_flat = blocked.ravel()

    def heuristic(rm: int) -> float:
        dr = abs(rm // width - goal_idx.row)
        dc = abs(rm % width - goal_idx.col)
        lo, hi = (dr, dc) if dr < dc else (dc, dr)
        return (hi - lo) * res + lo * (SQRT2 * res)

    g_cost[start_rm] = 0.0
    h0 = heuristic(start_rm)
    heap = [(h0, h0, start_rm)]
    while heap:
        _, _, rm = heapq.heappop(heap)
        if closed[rm]:
            continue
        if rm == goal_rm:
            break
        closed[rm] = True
        row, col = rm // width, rm % width
        base_s = int(g_straight[rm])
        base_d = int(g_diag[rm])

        for dr, dc in _AXIS_MOVES:
            nr, nc = row + dr, col + dc
            if not (0 <= nr < height and 0 <= nc < width):
                continue
            nrm = nr * width + nc
            if blocked_flat[nrm] or closed[nrm]:
                continue
            cand = step_cost_length(base_s + 1, base_d, res)
            if cand < g_cost[nrm]:
                g_cost[nrm] = cand
                g_straight[nrm] = base_s + 1
                g_diag[nrm] = base_d
                parent[nrm] = rm
                h = heuristic(nrm)
                heapq.heappush(heap, (cand + h, h, nrm))

        for dr, dc in _DIAG_MOVES:
            nr, nc = row + dr, col + dc
            if not (0 <= nr < height and 0 <= nc < width):
                continue
            # no corner cutting: both adjacent axis neighbors must be open
            if blocked_flat[row * width + nc] or blocked_flat[nr * width + col]:
                continue
            nrm = nr * width + nc
            if blocked_flat[nrm] or closed[nrm]:
                continue
            cand = step_cost_length(base_s, base_d + 1, res)
            if cand < g_cost[nrm]:
                g_cost[nrm] = cand
                g_straight[nrm] = base_s
                g_diag[nrm] = base_d + 1
                parent[nrm] = rm
                h = heuristic(nrm)
                heapq.heappush(heap, (cand + h, h, nrm))
    else:
        return None

    cells_rm = [goal_rm]
    while cells_rm[-1] != start_rm:
        cells_rm.append(int(parent[cells_rm[-1]]))
    cells_rm.reverse()
    cells = tuple(GridIndex(rm // width, rm % width) for rm in cells_rm)
    poses = tuple(grid_to_world(c, grid) for c in cells)
    length = step_cost_length(int(g_straight[goal_rm]), int(g_diag[goal_rm]), res)
    return PlannedPath(cells, poses, length, res)
