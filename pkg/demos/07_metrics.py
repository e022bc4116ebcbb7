"""Trajectory metrics: resampling, RMSE against a reference, batch summary.

Run from the repo root:  python3 demos/07_metrics.py
"""

import numpy as np

from navloop.grid import WorldPose
from navloop.metrics import (
    TrajectoryPair,
    TrialOutcome,
    resample,
    rmse,
    success_rate,
    summary_rows,
    summary_table,
)
from navloop.sim import load_feedback_script, load_scenario, run


def main() -> None:
    # Uniform arc-length resampling decouples RMSE from tick spacing.
    zigzag = (WorldPose(0, 0, 0), WorldPose(3, 0, 0), WorldPose(3, 4, 0))
    pts = resample(zigzag, samples=8)
    print("resampled zigzag (7 m total, 8 samples, 1 m spacing):")
    for x, y in pts:
        print(f"  ({x:.2f}, {y:.2f})")

    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    print(f"spacing: min {gaps.min():.3f}, max {gaps.max():.3f}\n")

    # RMSE of an executed mission against its authored reference route.
    scenario = load_scenario("scenarios/house.json")
    feedback = load_feedback_script("scenarios/house.feedback.json")
    report = run(scenario, feedback)
    pair = TrajectoryPair(
        executed=tuple(p for _, p in report.trajectory),
        reference=scenario.reference_route,
    )
    err = rmse(pair)
    print(f"house mission RMSE vs reference: {err:.3f} m "
          f"(grid resolution {scenario.true_grid.resolution} m)")

    # Batch bookkeeping across repeated trials.
    trials = [TrialOutcome(True), TrialOutcome(True),
              TrialOutcome(False, notes="queried twice")]
    print(f"query success rate over 3 trials: {success_rate(trials):.2f}\n")

    rows = summary_rows([
        {"route": "house", "rmse_values": [err, err * 1.1], "trials": trials},
        {"route": "corridor", "rmse_values": [0.08],
         "trials": [TrialOutcome(True)]},
    ])
    print(summary_table(rows))


if __name__ == "__main__":
    main()
