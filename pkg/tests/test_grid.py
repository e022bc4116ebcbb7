import math

import numpy as np
import pytest

from navloop.errors import OutOfBounds
from navloop.grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    GridIndex,
    OccupancyGrid,
    WorldPose,
    close_mask,
    connected_components,
    dilate,
    distance_transform,
    dump_occupancy_text,
    erode,
    filter_mask,
    grid_to_world,
    load_occupancy_text,
    normalize_angle,
    open_mask,
    world_to_grid,
)

from conftest import (
    brute_distance_transform,
    dilate_oracle,
    erode_oracle,
    flood_components,
    random_grid,
)


def make_grid(cells, res=0.5, origin=(-1.0, -1.0)):
    return OccupancyGrid(res, origin, np.asarray(cells, dtype=np.int8))


# ---------- coordinates ----------

def test_world_to_grid_origin_example():
    g = make_grid(np.zeros((6, 6)))
    assert world_to_grid(WorldPose(0.0, 0.0, 0.0), g) == GridIndex(2, 2)


def test_grid_to_world_cell_center_example():
    g = make_grid(np.zeros((6, 6)))
    p = grid_to_world(GridIndex(2, 3), g)
    assert (p.x, p.y) == (0.75, 0.25)


def test_world_to_grid_floor_semantics():
    g = make_grid(np.zeros((4, 4)), res=1.0, origin=(0.0, 0.0))
    # a point exactly on a cell edge belongs to the higher cell
    assert world_to_grid(WorldPose(1.0, 0.0), g) == GridIndex(0, 1)
    assert world_to_grid(WorldPose(0.999999, 0.0), g) == GridIndex(0, 0)


def test_world_to_grid_out_of_bounds():
    g = make_grid(np.zeros((4, 4)), res=1.0, origin=(0.0, 0.0))
    with pytest.raises(OutOfBounds):
        world_to_grid(WorldPose(-0.01, 0.0), g)
    with pytest.raises(OutOfBounds):
        world_to_grid(WorldPose(0.0, 4.0), g)


def test_round_trip_grid_world_grid(rng):
    g = random_grid(rng, 12, 17, 0.2, resolution=0.25, origin=(-2.0, 3.0))
    for _ in range(50):
        idx = GridIndex(int(rng.integers(12)), int(rng.integers(17)))
        assert world_to_grid(grid_to_world(idx, g), g) == idx


def test_normalize_angle_wraps():
    assert normalize_angle(math.pi) == pytest.approx(math.pi)
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
    assert normalize_angle(0.5) == pytest.approx(0.5)
    assert -math.pi < normalize_angle(123.456) <= math.pi


# ---------- distance transform ----------

def test_distance_transform_single_obstacle_example():
    cells = np.zeros((3, 3), np.int8)
    cells[1, 1] = OCCUPIED
    g = OccupancyGrid(1.0, (0.0, 0.0), cells)
    d = distance_transform(g)
    assert d[0, 0] == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert d[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert d[1, 1] == 0.0


def test_distance_transform_no_obstacles_is_inf():
    g = OccupancyGrid(0.5, (0.0, 0.0), np.zeros((4, 5), np.int8))
    assert np.isinf(distance_transform(g)).all()


def test_distance_transform_policy():
    cells = np.zeros((1, 3), np.int8)
    cells[0, 0] = UNKNOWN
    g = OccupancyGrid(1.0, (0.0, 0.0), cells)
    both = distance_transform(g, "occupied_and_unknown")
    occ_only = distance_transform(g, "occupied")
    assert both[0, 2] == pytest.approx(2.0)
    assert np.isinf(occ_only).all()
    with pytest.raises(ValueError):
        distance_transform(g, "nonsense")


def test_distance_transform_matches_brute_force(rng):
    for _ in range(25):
        h, w = int(rng.integers(3, 30)), int(rng.integers(3, 30))
        g = random_grid(rng, h, w, 0.2, resolution=0.25)
        got = distance_transform(g, "occupied")
        want = brute_distance_transform(g.cells == OCCUPIED, 0.25)
        assert np.allclose(got, want, atol=1e-9, rtol=0.0, equal_nan=False)


# ---------- morphology ----------

def test_morphology_against_definition(rng):
    for _ in range(10):
        mask = rng.random((int(rng.integers(3, 16)), int(rng.integers(3, 16)))) < 0.5
        assert (erode(mask) == erode_oracle(mask)).all()
        assert (dilate(mask) == dilate_oracle(mask)).all()
        assert (open_mask(mask) == dilate_oracle(erode_oracle(mask))).all()
        assert (close_mask(mask) == erode_oracle(dilate_oracle(mask))).all()


def test_open_removes_speckle():
    mask = np.zeros((7, 7), bool)
    mask[3, 3] = True  # single-pixel noise
    assert not open_mask(mask).any()


def test_close_fills_pinhole():
    mask = np.zeros((7, 7), bool)
    mask[1:6, 1:6] = True
    mask[3, 3] = False  # interior hole
    closed = close_mask(mask)
    assert closed[3, 3]
    assert closed[1:6, 1:6].all()


def test_filter_mask_sequencing():
    mask = np.zeros((9, 9), bool)
    mask[2:7, 2:7] = True
    mask[4, 4] = False
    mask[0, 0] = True
    got = filter_mask(mask)  # default ("open", "close")
    want = close_mask(open_mask(mask))
    assert (got == want).all()
    assert (filter_mask(mask, ()) == mask).all()
    with pytest.raises(ValueError):
        filter_mask(mask, ("open", "blur"))


# ---------- connected components ----------

def test_components_diagonal_is_connected():
    mask = np.zeros((4, 4), bool)
    mask[0, 0] = mask[1, 1] = mask[2, 2] = True
    comps = connected_components(mask)
    assert len(comps) == 1
    assert comps[0].tolist() == [[0, 0], [1, 1], [2, 2]]


def test_components_ordering_and_content(rng):
    for _ in range(15):
        mask = rng.random((int(rng.integers(3, 20)), int(rng.integers(3, 20)))) < 0.35
        got = [comp.tolist() for comp in connected_components(mask)]
        want = [[[r, c] for r, c in comp] for comp in flood_components(mask)]
        assert got == want


def test_components_empty_mask():
    assert connected_components(np.zeros((5, 5), bool)) == []


# ---------- text format ----------

def test_occupancy_text_round_trip(rng):
    g = random_grid(rng, 9, 13, 0.3, resolution=0.25, origin=(-1.5, 2.0))
    cells = g.cells.copy()
    cells[0, 0] = UNKNOWN
    g = g.with_cells(cells)
    text = dump_occupancy_text(g)
    g2 = load_occupancy_text(text)
    assert g2.resolution == g.resolution
    assert (g2.origin.x, g2.origin.y) == (g.origin.x, g.origin.y)
    assert (g2.cells == g.cells).all()
    assert dump_occupancy_text(g2) == text


def test_occupancy_text_format_shape():
    text = "P-OCC 3 2 0.5 -1.0 -1.0\n.#?\n...\n"
    g = load_occupancy_text(text)
    assert (g.width, g.height) == (3, 2)
    assert g.state_at(GridIndex(0, 1)) == OCCUPIED
    assert g.state_at(GridIndex(0, 2)) == UNKNOWN
    assert g.state_at(GridIndex(1, 0)) == FREE


@pytest.mark.parametrize("bad", [
    "",
    "P-XXX 3 2 0.5 0 0\n...\n...\n",
    "P-OCC 3 2 0.5 0 0\n...\n",          # row count mismatch
    "P-OCC 3 2 0.5 0 0\n....\n...\n",    # row width mismatch
    "P-OCC 3 2 0.5 0 0\n..X\n...\n",     # bad char
])
def test_occupancy_text_rejects_malformed(bad):
    with pytest.raises(ValueError):
        load_occupancy_text(bad)
