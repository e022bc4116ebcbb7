"""Grid path planning: inflation, unknown-space policy, and octile costs.

Run from the repo root:  python3 demos/02_path_planning.py
"""

from navloop.grid import UNKNOWN, WorldPose, load_occupancy_file, world_to_grid
from navloop.planner import PlannerConfig, plan


def render(grid, path, start, goal) -> None:
    rows = [[{0: ".", 1: "#", 2: "?"}[int(v)] for v in row] for row in grid.cells]
    if path is not None:
        for cell in path.cells:
            rows[cell.row][cell.col] = "o"
    s, t = world_to_grid(start, grid), world_to_grid(goal, grid)
    rows[s.row][s.col] = "S"
    rows[t.row][t.col] = "G"
    for row in rows:
        print("   ", "".join(row))


def main() -> None:
    g = load_occupancy_file("scenarios/house.occ")
    start = WorldPose(9.125, 3.875, 0.0)
    goal = WorldPose(11.375, 11.375, 0.0)

    path = plan(g, PlannerConfig(), start, goal)
    print(f"house map {g.width}x{g.height} @ {g.resolution} m")
    print(f"direct route: {path.length:.3f} m over {len(path.cells)} cells")

    # Inflating by one cell radius keeps the center line away from walls.
    fat = plan(g, PlannerConfig(inflation_radius=0.25), start, goal)
    print(f"with 0.25 m inflation: {fat.length:.3f} m over {len(fat.cells)} cells")

    # Unknown space is an obstacle by default; optimistic planners can opt in.
    cells = g.cells.copy()
    cells[20:23, 28:33] = UNKNOWN
    foggy = g.with_cells(cells)
    careful = plan(foggy, PlannerConfig(), start, goal)
    brave = plan(foggy, PlannerConfig(treat_unknown_as="free"), start, goal)
    print(f"unknown patch on the route: obstacle policy {careful.length:.3f} m, "
          f"free policy {brave.length:.3f} m")

    print("\ncorridor detour (door closed at column 8):")
    c = load_occupancy_file("scenarios/corridor30.occ")
    closed = c.cells.copy()
    closed[5, 8] = 1
    c = c.with_cells(closed)
    detour = plan(c, PlannerConfig(),
                  WorldPose(0.75, 2.75, 0.0), WorldPose(12.25, 2.75, 0.0))
    print(f"  length {detour.length:.3f} m")
    render(c, detour, WorldPose(0.75, 2.75, 0.0), WorldPose(12.25, 2.75, 0.0))


if __name__ == "__main__":
    main()
