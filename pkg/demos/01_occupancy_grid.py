"""Occupancy grids: the text format, morphology cleanup, clearance fields.

Run from the repo root:  python3 demos/01_occupancy_grid.py
"""

import numpy as np

from navloop.grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    close_mask,
    connected_components,
    distance_transform,
    dump_occupancy_text,
    filter_mask,
    load_occupancy_file,
    open_mask,
)


def show(grid) -> None:
    for line in dump_occupancy_text(grid).splitlines()[1:]:
        print("   ", line)


def main() -> None:
    g = load_occupancy_file("scenarios/corridor30.occ")
    print(f"corridor map: {g.width}x{g.height} cells at {g.resolution} m, "
          f"origin ({g.origin.x}, {g.origin.y})")
    show(g)

    counts = {FREE: "free", OCCUPIED: "occupied", UNKNOWN: "unknown"}
    for value, name in counts.items():
        print(f"  {name:9s}: {int((g.cells == value).sum())} cells")

    # Clearance to the nearest non-free cell, in meters. The planner uses
    # this same field for inflation and the semantic layer for waypoint
    # placement, so it is worth seeing on its own.
    dt = distance_transform(g, "occupied_and_unknown")
    lane = np.unravel_index(np.nanargmax(np.where(np.isfinite(dt), dt, -1)), dt.shape)
    print(f"\nwidest point of the map: cell {tuple(int(v) for v in lane)} "
          f"with {dt[lane]:.2f} m of clearance")

    # Morphology on a noisy mask: opening drops speckle, closing fills pinholes.
    rng = np.random.default_rng(3)
    mask = np.zeros((9, 16), dtype=bool)
    mask[2:7, 2:13] = True
    mask[4, 7] = False                      # pinhole inside the block
    speckle = rng.random(mask.shape) < 0.04
    noisy = mask | speckle

    cleaned = filter_mask(noisy, ops=("open", "close"))
    print("\nnoisy mask -> open -> close:")
    for name, m in (("noisy", noisy), ("opened", open_mask(noisy)),
                    ("cleaned", cleaned)):
        rows = ["".join("#" if c else "." for c in row) for row in m]
        print(f"  {name}:")
        for r in rows:
            print("   ", r)

    regions = connected_components(cleaned)
    print(f"{len(regions)} connected region(s) after cleanup, "
          f"largest has {max(len(r) for r in regions)} cells")


if __name__ == "__main__":
    main()
