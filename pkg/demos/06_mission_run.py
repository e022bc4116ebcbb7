"""A full mission: closed door, raised query, scripted answer, splice.

Run from the repo root:  python3 demos/06_mission_run.py
"""

from navloop.sim import init_state, load_feedback_script, load_scenario, run, step


def main() -> None:
    scenario = load_scenario("scenarios/corridor30.json")
    feedback = load_feedback_script("scenarios/corridor30.feedback.json")
    print(f"scenario '{scenario.name}': dt {scenario.dt} s, tau {scenario.tau}, "
          f"sensor {scenario.sensor_radius} m")

    # Tick by tick until the query fires, to see the moment of decision.
    state = init_state(scenario)
    while state.pending_query is None:
        step(state, scenario)
    q = state.pending_query
    print(f"\ntick {state.tick_count} (t={state.time:.1f} s): QUERY raised")
    print(f"  reason    {q.reason}")
    print(f"  deviation {q.deviation:.2f} (tau {scenario.tau})")
    print(f"  robot at  ({q.robot.x:.2f}, {q.robot.y:.2f})")
    try:
        step(state, scenario)
    except ValueError as e:
        print(f"  stepping is refused while it waits: {e}")

    # The same scenario end to end with the scripted operator answer.
    report = run(scenario, feedback)
    print(f"\nfull run: reached={report.reached} in {report.tick_count} ticks "
          f"({report.sim_time:.1f} s simulated)")
    for entry in report.queries:
        print(f"  query at t={entry['time']:.1f} s answered with "
              f"{entry['phrases']} -> {entry['spliced']} waypoint(s) spliced")
    print(f"  {len(report.trajectory)} trajectory samples, "
          f"report is {len(report.to_json_bytes())} canonical bytes")


if __name__ == "__main__":
    main()
