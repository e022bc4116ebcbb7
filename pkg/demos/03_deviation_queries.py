"""Deviation monitoring: when a replanned route is different enough to ask.

Run from the repo root:  python3 demos/03_deviation_queries.py
"""

from navloop.grid import GridIndex, WorldPose
from navloop.planner import PlannedPath
from navloop.query import Decision, DeviationMonitor


def plan_of(length: float) -> PlannedPath:
    # Only the length matters to the monitor; cells/poses are placeholders.
    return PlannedPath(cells=(GridIndex(0, 0),),
                       poses=(WorldPose(0.0, 0.0, 0.0),),
                       length=length, resolution=0.5)


def main() -> None:
    mon = DeviationMonitor(tau=0.25)
    print(f"monitor with tau = {mon.tau}: query when |L_new - L_ref| / L_ref > tau\n")

    script = [
        ("first plan, nothing to compare against", 10.0),
        ("same length after a tick", 10.0),
        ("slightly longer after sensing a crate", 11.0),
        ("big detour after a door closes", 14.0),
    ]
    for label, length in script:
        ref = mon.reference_length
        decision = mon.assess(plan_of(length))
        dev = mon.last_deviation
        print(f"  plan {length:5.1f} m  ref {ref if ref is not None else '  --'}"
              f"  dev {f'{dev:.3f}' if dev is not None else '   --'}"
              f"  -> {decision.name:8s} ({label})")

    # The QUERY above cleared the reference, so the monitor cannot fire twice
    # while the operator thinks. Their answer is adopted as the new baseline.
    print("\noperator answers; route spliced, reference rebased")
    mon.adopt(6.5)
    print(f"  new reference {mon.reference_length} m")
    print(f"  next assess(6.5 m) -> {mon.assess(plan_of(6.5)).name}")

    # Losing the path entirely counts as infinite deviation.
    print(f"  assess(no path)   -> {mon.assess(None).name}")


if __name__ == "__main__":
    main()
