"""Routing through candidate layers: build, solve, pick, splice order.

Run from the repo root:  python3 demos/05_waypoint_routes.py
"""

from navloop.grid import WorldPose, load_occupancy_file
from navloop.semantic import SemanticParams, candidates_for, load_feature_grid, load_vocabulary
from navloop.waygraph import build_graph, dump_graph, select_route


def main() -> None:
    grid = load_occupancy_file("scenarios/house.occ")
    feats = load_feature_grid("scenarios/house.fgrid")
    vocab = load_vocabulary("scenarios/house.tsv")
    robot = WorldPose(9.125, 3.875, 0.0)

    # Operator answered with two descriptions, in visiting order. Each one
    # becomes a layer of candidate waypoints.
    phrases = ["the dining table", "the reading lamp"]
    params = SemanticParams(k=2)
    layers = [candidates_for(p, feats, grid, vocab, params, i)
              for i, p in enumerate(phrases)]
    for phrase, layer in zip(phrases, layers):
        print(f"'{phrase}': {len(layer)} candidate(s)")

    g = build_graph(robot, layers, grid)
    print(f"\ngraph: {g.n} vertices in layers {g.layers}")
    print("edge weights (m), inf = not connected:")
    print(dump_graph(g))

    route = select_route(g)
    print(f"chosen route: vertices {route.vertices}, {route.length:.3f} m")
    for pose, vertex in zip(route.poses, route.vertices):
        layer = g.vertices[vertex].layer
        tag = "robot" if vertex == 0 else f"layer {layer}"
        print(f"  ({pose.x:6.2f}, {pose.y:6.2f})  {tag}")

    # The executor walks these in order: all spliced waypoints first, then
    # whatever was left of the original mission.
    print("\nvisit order matches the phrase order the operator gave.")


if __name__ == "__main__":
    main()
