"""Metric occupancy grids and the low-level grid algorithms built on them.

Cell states are small ints (FREE / OCCUPIED / UNKNOWN) stored in a row-major
(height, width) int8 array. Binary masks are plain (height, width) bool
arrays aligned to the grid. All functions here are pure: inputs are never
mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import OutOfBounds

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

_CHAR_TO_STATE = {".": FREE, "#": OCCUPIED, "?": UNKNOWN}
_STATE_TO_CHAR = {FREE: ".", OCCUPIED: "#", UNKNOWN: "?"}

# 3x3 square structuring element; out-of-bounds neighbors count as False.
_STRUCT = np.ones((3, 3), dtype=bool)

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    t = theta % TWO_PI
    if t > math.pi:
        t -= TWO_PI
    return t


@dataclass(frozen=True)
class WorldPose:
    """Planar pose in world coordinates (meters, radians)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def distance_to(self, other: "WorldPose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class GridIndex(NamedTuple):
    """Discrete cell coordinate (row from y, col from x)."""

    row: int
    col: int


@dataclass(frozen=True)
class OccupancyGrid:
    """2D metric grid of FREE / OCCUPIED / UNKNOWN cells.

    ``origin`` is the world coordinate of the (0, 0) cell corner; a cell
    spans ``resolution`` meters per side.
    """

    resolution: float
    origin: WorldPose
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        if not isinstance(self.origin, WorldPose):
            x, y = self.origin
            object.__setattr__(self, "origin", WorldPose(float(x), float(y)))
        cells = np.asarray(self.cells, dtype=np.int8)
        if cells.ndim != 2:
            raise ValueError(f"cells must be 2D, got shape {cells.shape}")
        object.__setattr__(self, "cells", cells)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def in_bounds(self, idx: GridIndex) -> bool:
        return 0 <= idx.row < self.height and 0 <= idx.col < self.width

    def state_at(self, idx: GridIndex) -> int:
        if not self.in_bounds(idx):
            raise OutOfBounds(f"cell {idx} outside {self.height}x{self.width} grid")
        return int(self.cells[idx.row, idx.col])

    def is_free(self, idx: GridIndex) -> bool:
        return self.state_at(idx) == FREE

    def with_cells(self, cells: np.ndarray) -> "OccupancyGrid":
        """Same geometry, new cell array."""
        return OccupancyGrid(self.resolution, self.origin, cells)


def world_to_grid(pose: WorldPose, grid: OccupancyGrid) -> GridIndex:
    """Cell containing a world point: floor((pose - origin) / resolution)."""
    col = math.floor((pose.x - grid.origin.x) / grid.resolution)
    row = math.floor((pose.y - grid.origin.y) / grid.resolution)
    idx = GridIndex(row, col)
    if not grid.in_bounds(idx):
        raise OutOfBounds(
            f"pose ({pose.x}, {pose.y}) maps to {idx}, outside "
            f"{grid.height}x{grid.width} grid"
        )
    return idx


def grid_to_world(idx: GridIndex, grid: OccupancyGrid) -> WorldPose:
    """World coordinate of the cell center; theta = 0."""
    if not grid.in_bounds(idx):
        raise OutOfBounds(f"cell {idx} outside {grid.height}x{grid.width} grid")
    x = grid.origin.x + (idx.col + 0.5) * grid.resolution
    y = grid.origin.y + (idx.row + 0.5) * grid.resolution
    return WorldPose(x, y, 0.0)


def obstacle_mask(grid: OccupancyGrid, policy: str) -> np.ndarray:
    """Boolean mask of cells treated as obstacles under a clearance policy."""
    if policy == "occupied":
        return grid.cells == OCCUPIED
    if policy == "occupied_and_unknown":
        return grid.cells != FREE
    raise ValueError(f"unknown obstacle policy: {policy!r}")


def distance_transform(
    grid: OccupancyGrid, obstacle_policy: str = "occupied_and_unknown"
) -> np.ndarray:
    """Exact Euclidean clearance map in meters.

    Each cell holds the center-to-center distance to the nearest obstacle
    cell under the policy; obstacle cells hold 0. With no obstacles at all,
    every cell is +inf.
    """
    obstacles = obstacle_mask(grid, obstacle_policy)
    if not obstacles.any():
        return np.full(grid.cells.shape, np.inf)
    dist_cells = ndimage.distance_transform_edt(~obstacles)
    return dist_cells * grid.resolution


def erode(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_erosion(mask, structure=_STRUCT, border_value=0)


def dilate(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=_STRUCT, border_value=0)


def open_mask(mask: np.ndarray) -> np.ndarray:
    """Morphological opening: dilate(erode(m)). Removes speckle."""
    return dilate(erode(mask))


def close_mask(mask: np.ndarray) -> np.ndarray:
    """Morphological closing: erode(dilate(m)). Fills small holes."""
    return erode(dilate(mask))

_FILTER_OPS = {
    "open": open_mask,
    "close": close_mask,
    "erode": erode,
    "dilate": dilate,
}


def filter_mask(mask: np.ndarray, ops: tuple[str, ...] = ("open", "close")) -> np.ndarray:
    """Apply a configurable sequence of morphology passes (default open, close)."""
    out = mask
    for op in ops:
        try:
            out = _FILTER_OPS[op](out)
        except KeyError:
            raise ValueError(f"unknown morphology op: {op!r}") from None
    return out


def connected_components(mask: np.ndarray) -> list[np.ndarray]:
    """8-connected components of the true cells.

    Returns one (n_i, 2) array of [row, col] per component, cells sorted
    row-major within a component, components ordered by their smallest
    row-major cell index.
    """
    labels, count = ndimage.label(mask, structure=_STRUCT)
    if count == 0:
        return []
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    # leading zeros are background; the rest group by label in scan order
    nonzero = order[flat[order] != 0]
    starts = np.searchsorted(flat[nonzero], np.arange(1, count + 1))
    width = mask.shape[1]
    regions = []
    bounds = list(starts) + [len(nonzero)]
    for i in range(count):
        cells_flat = np.sort(nonzero[bounds[i]:bounds[i + 1]])
        regions.append(np.stack([cells_flat // width, cells_flat % width], axis=1))
    regions.sort(key=lambda r: int(r[0, 0]) * width + int(r[0, 1]))
    return regions


def load_occupancy_text(text: str) -> OccupancyGrid:
    """Parse the P-OCC text format.

    Header ``P-OCC <width> <height> <resolution> <origin_x> <origin_y>``,
    then ``height`` rows (row 0 first) of ``width`` chars from ``.#?``.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise ValueError("empty occupancy grid text")
    header = lines[0].split()
    if len(header) != 6 or header[0] != "P-OCC":
        raise ValueError(f"bad P-OCC header: {lines[0]!r}")
    width, height = int(header[1]), int(header[2])
    resolution = float(header[3])
    origin = WorldPose(float(header[4]), float(header[5]))
    rows = lines[1:]
    if len(rows) != height:
        raise ValueError(f"expected {height} rows, got {len(rows)}")
    cells = np.empty((height, width), dtype=np.int8)
    for r, line in enumerate(rows):
        if len(line) != width:
            raise ValueError(f"row {r} has {len(line)} chars, expected {width}")
        for c, ch in enumerate(line):
            try:
                cells[r, c] = _CHAR_TO_STATE[ch]
            except KeyError:
                raise ValueError(f"bad cell char {ch!r} at row {r} col {c}") from None
    return OccupancyGrid(resolution, origin, cells)


def dump_occupancy_text(grid: OccupancyGrid) -> str:
    header = (
        f"P-OCC {grid.width} {grid.height} {grid.resolution!r} "
        f"{grid.origin.x!r} {grid.origin.y!r}"
    )
    rows = [
        "".join(_STATE_TO_CHAR[int(v)] for v in grid.cells[r])
        for r in range(grid.height)
    ]
    return "\n".join([header] + rows) + "\n"


def load_occupancy_file(path) -> OccupancyGrid:
    with open(path, "r", encoding="utf-8") as f:
        return load_occupancy_text(f.read())


def save_occupancy_file(grid: OccupancyGrid, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_occupancy_text(grid))
