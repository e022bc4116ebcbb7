"""Command line: batch scenario runs and the long-running service.

`navloop run` executes one scenario headless with scripted feedback and
writes the mission report; `navloop serve` exposes the same scenario over
HTTP for an operator console. Exit codes from run: 0 mission reached,
2 timeout or feedback stall, 1 configuration problem.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .errors import ScenarioError
from .metrics import TrajectoryPair, rmse, summary_rows, summary_table, write_metrics_json
from .sim import load_feedback_script, load_scenario, run


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are config errors, not timeouts
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="navloop",
                     description="grid-world navigation with human-in-the-loop replanning")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario headless")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path")
    p_run.add_argument("--feedback", help="scripted feedback JSON path")
    p_run.add_argument("--out", help="mission report output path")
    p_run.add_argument("--metrics-out", help="metrics JSON output path "
                       "(default: <out>.metrics.json when --out is set)")
    p_run.add_argument("--seed", type=int, help="override scenario seed")
    p_run.add_argument("--tau", type=float, help="override deviation threshold")
    p_run.add_argument("--headless", action="store_true",
                       help="accepted for symmetry; run is always headless")

    p_serve = sub.add_parser("serve", help="serve a scenario over HTTP")
    p_serve.add_argument("--scenario", required=True, help="scenario JSON path")
    p_serve.add_argument("--bind", default="127.0.0.1:8750", help="host:port")
    p_serve.add_argument("--seed", type=int, help="override scenario seed")
    p_serve.add_argument("--tau", type=float, help="override deviation threshold")
    p_serve.add_argument("--pace", type=float, default=None,
                         help="wall seconds per tick (default: real time, 0 = flat out)")
    return parser


def _load_with_overrides(args):
    scenario = load_scenario(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tau is not None:
        overrides["tau"] = args.tau
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
    return scenario


def _cmd_run(args) -> int:
    try:
        scenario = _load_with_overrides(args)
        feedback = load_feedback_script(args.feedback) if args.feedback else None
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    report = run(scenario, feedback)
    if args.out:
        Path(args.out).write_bytes(report.to_json_bytes())

    rmse_values = []
    if scenario.reference_route and len(report.trajectory) >= 2:
        pair = TrajectoryPair(
            executed=tuple(p for _, p in report.trajectory),
            reference=scenario.reference_route,
        )
        rmse_values.append(rmse(pair))
    rows = summary_rows([{
        "route": scenario.name,
        "rmse_values": rmse_values,
        "trials": [],
    }])
    sys.stdout.write(summary_table(rows))
    metrics_out = args.metrics_out
    if metrics_out is None and args.out:
        metrics_out = f"{args.out}.metrics.json"
    if metrics_out:
        write_metrics_json(rows, metrics_out)

    status = "reached" if report.reached else (
        "stalled" if report.stalled else "timeout"
    )
    print(f"{scenario.name}: {status} after {report.tick_count} ticks "
          f"({report.sim_time:.1f} s sim, {report.wall_clock_s:.2f} s wall), "
          f"{len(report.queries)} queries")
    return 0 if report.reached else 2


def _cmd_serve(args) -> int:
    # Imported here so plain runs never pull in the HTTP stack.
    from .service import serve

    try:
        scenario = _load_with_overrides(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    serve(scenario, args.bind, args.pace)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
