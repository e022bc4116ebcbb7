"""Language-grounded waypoints: phrase -> score map -> mixture -> candidates.

Run from the repo root:  python3 demos/04_semantic_candidates.py
"""

from navloop.grid import load_occupancy_file
from navloop.semantic import (
    SemanticParams,
    candidates_for,
    embed,
    fit_gmm,
    load_feature_grid,
    load_vocabulary,
    score_map,
)


def main() -> None:
    grid = load_occupancy_file("scenarios/house.occ")
    feats = load_feature_grid("scenarios/house.fgrid")
    vocab = load_vocabulary("scenarios/house.tsv")
    print(f"feature grid: {feats.m}-dim vectors over "
          f"{grid.width}x{grid.height} cells")
    print(f"vocabulary: {sorted(vocab.phrases())}\n")

    for phrase in ("the dining table", "the reading lamp"):
        emb = embed(phrase, vocab)
        scores = score_map(feats, emb)
        model = fit_gmm(scores, k=2)
        print(f"'{phrase}':")
        print(f"  mixture means {[round(float(m), 3) for m in model.means]} "
              f"(top component is the match)")
        cands = candidates_for(phrase, feats, grid, vocab, SemanticParams(k=2))
        for c in cands:
            print(f"  region {c.region_id}: waypoint ({c.pose.x:.2f}, "
                  f"{c.pose.y:.2f}) at cell {tuple(c.cell)} with "
                  f"{c.clearance:.2f} m clearance")
        print()

    # Phrases outside the vocabulary fail loudly; the service turns this
    # into a 422 so the operator can retype.
    try:
        candidates_for("the swimming pool", feats, grid, vocab, SemanticParams(k=2))
    except Exception as e:
        print(f"unknown phrase -> {type(e).__name__}: {e}")


if __name__ == "__main__":
    main()
