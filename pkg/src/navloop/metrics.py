"""Evaluation measures: trajectory RMSE and query-trigger success rate.

RMSE compares two planar routes after resampling each to the same number
of points equally spaced by arc length; correspondence is by normalized
arc position, heading is ignored. Success rate is the fraction of trials
whose query decision fired exactly when intended.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTrajectory, EmptyInput
from .grid import WorldPose

DEFAULT_SAMPLES = 200


@dataclass(frozen=True)
class TrajectoryPair:
    executed: tuple[WorldPose, ...]
    reference: tuple[WorldPose, ...]

    def __post_init__(self):
        if not self.executed or not self.reference:
            raise ValueError("both trajectories must be non-empty")
        object.__setattr__(self, "executed", tuple(self.executed))
        object.__setattr__(self, "reference", tuple(self.reference))


@dataclass(frozen=True)
class TrialOutcome:
    triggered_as_intended: bool
    notes: str = ""


def resample(poses, samples: int) -> np.ndarray:
    """(samples, 2) points equally spaced by arc length along the polyline.

    A single pose repeats. Multi-point input with zero total length raises
    DegenerateTrajectory: there is no curve to parameterize.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    xy = np.array([(p.x, p.y) for p in poses], dtype=np.float64)
    if xy.shape[0] == 1:
        return np.repeat(xy, samples, axis=0)
    seg = np.hypot(np.diff(xy[:, 0]), np.diff(xy[:, 1]))
    keep = np.concatenate(([True], seg > 0))  # drop zero-length repeats
    xy = xy[keep]
    if xy.shape[0] == 1:
        raise DegenerateTrajectory("multi-point trajectory with zero arc length")
    cum = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(xy[:, 0]),
                                                    np.diff(xy[:, 1])))))
    targets = np.linspace(0.0, cum[-1], samples)
    return np.column_stack(
        (np.interp(targets, cum, xy[:, 0]), np.interp(targets, cum, xy[:, 1]))
    )


def rmse(pair: TrajectoryPair, samples: int = DEFAULT_SAMPLES) -> float:
    """Root-mean-square planar distance between resampled trajectories."""
    a = resample(pair.executed, samples)
    b = resample(pair.reference, samples)
    d2 = ((a - b) ** 2).sum(axis=1)
    return float(np.sqrt(d2.mean()))


def success_rate(trials) -> float:
    trials = list(trials)
    if not trials:
        raise EmptyInput("no trials")
    hits = sum(1 for t in trials if t.triggered_as_intended)
    return hits / len(trials)


# ---------- report emission ----------

def summary_rows(results: list[dict]) -> list[dict]:
    """Normalize per-route results into table rows.

    Each input carries: route (name), rmse_values (list, may be empty),
    trials (list of TrialOutcome, may be empty).
    """
    rows = []
    for res in results:
        values = np.asarray(res.get("rmse_values", ()), dtype=np.float64)
        trials = res.get("trials", ())
        rows.append(
            {
                "route": res["route"],
                "rmse_mean": float(values.mean()) if values.size else None,
                "rmse_std": float(values.std()) if values.size else None,
                "success_rate": success_rate(trials) if trials else None,
                "n_runs": int(values.size),
                "n_trials": len(trials),
            }
        )
    return rows


def summary_table(rows: list[dict]) -> str:
    """Plain-text table: route, RMSE mean +/- std, success rate."""
    header = ("route", "rmse [m]", "sr")
    body = []
    for r in rows:
        if r["rmse_mean"] is None:
            rmse_text = "-"
        else:
            rmse_text = f"{r['rmse_mean']:.3f} +/- {r['rmse_std']:.3f}"
        sr_text = "-" if r["success_rate"] is None else f"{r['success_rate']:.2f}"
        body.append((r["route"], rmse_text, sr_text))
    widths = [
        max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i])
        for i in range(3)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(3)))
    return "\n".join(lines) + "\n"


def write_metrics_json(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"schema": "metrics/1", "rows": rows}, f,
                  sort_keys=True, separators=(",", ":"))
        f.write("\n")
