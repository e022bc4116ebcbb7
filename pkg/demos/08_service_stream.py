"""The operator loop over HTTP: state, events, a query, and an answer.

Run from the repo root:  python3 demos/08_service_stream.py
(uses only the standard library as a client; Ctrl-C safe)
"""

import http.client
import json
import threading

from navloop.service import make_server
from navloop.sim import load_scenario


def get(conn, path):
    conn.request("GET", path)
    resp = conn.getresponse()
    return json.loads(resp.read())


def post(conn, path, body):
    conn.request("POST", path, json.dumps(body),
                 {"Content-Type": "application/json"})
    resp = conn.getresponse()
    return resp.status, json.loads(resp.read())


def main() -> None:
    scenario = load_scenario("scenarios/corridor30.json")
    server = make_server(scenario, bind="127.0.0.1:0", pace=0.0)
    host, port = server.server_address
    threading.Thread(target=server.serve_forever, daemon=True).start()
    print(f"service on http://{host}:{port} (pace 0 = as fast as possible)")

    conn = http.client.HTTPConnection(host, port, timeout=10)
    state = get(conn, "/state")
    print(f"initial state: t={state['time']} s, running={state['running']}, "
          f"map digest {state['live_grid_digest'][:12]}...")

    # Start the mission, then follow the event stream until the robot asks.
    print("\n> POST /control start")
    post(conn, "/control", {"command": "start"})
    stream = http.client.HTTPConnection(host, port, timeout=30)
    stream.request("GET", "/events", headers={"Accept": "text/event-stream"})
    resp = stream.getresponse()

    event, pending = None, None
    buf = {}
    while event != "query_raised":
        line = resp.fp.readline().decode().rstrip("\n")
        if line.startswith("event:"):
            buf["event"] = line.split(":", 1)[1].strip()
        elif line.startswith("data:"):
            buf["data"] = json.loads(line.split(":", 1)[1])
        elif line == "" and "event" in buf:
            event = buf["event"]
            data = buf.get("data", {})
            print(f"  [{data.get('time', '?'):>5}] {event}")
            if event == "query_raised":
                pending = data
            buf = {}

    print(f"\nrobot is asking: reason={pending['reason']}, "
          f"deviation={pending.get('deviation')}")
    status, body = post(conn, "/feedback", {"phrases": ["the loading dock"]})
    print(f"> POST /feedback -> {status}, spliced {body['spliced']} waypoint(s)")

    # Run to completion and read the final snapshot.
    while not get(conn, "/state")["completed"]:
        pass
    final = get(conn, "/state")
    print(f"\nmission complete: {final['waypoints_reached']}/"
          f"{final['waypoints_total']} waypoints at t={final['time']:.1f} s "
          f"after {final['tick']} ticks")
    server.shutdown()


if __name__ == "__main__":
    main()
