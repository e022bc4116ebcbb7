"""HTTP shell around one live simulation.

A single driver thread advances ticks while running; everything observers
see is a snapshot built under the state lock, and all mutations (control
commands, feedback) serialize through that same lock, so there is at most
one in-flight feedback application and /state is internally consistent.

Endpoints: GET /state, GET /map, GET /events (server-sent events), POST
/control {command}, POST /feedback {phrases}. Feedback outside a pending
query is 409; a phrase the vocabulary lacks is 422 with the phrase echoed.
Simulation time freezes while a query is pending: the driver simply does
not tick.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

from .errors import NavloopError, UnknownPhrase
from .grid import dump_occupancy_text
from .sim import Scenario, handle_feedback, init_state, step

_CONTROL_COMMANDS = ("start", "pause", "reset", "tick")


class SimService:
    """Owns the state machine; HTTP handlers call into it."""

    def __init__(self, scenario: Scenario, pace: float | None = None):
        self.scenario = scenario
        # seconds of wall clock per tick; 0 = as fast as possible
        self.pace = scenario.dt if pace is None else pace
        self.lock = threading.RLock()
        self.state = init_state(scenario)
        self.running = False
        self._stop = threading.Event()
        self._changed = threading.Condition(self.lock)
        self._driver = threading.Thread(target=self._drive, daemon=True)

    # ---------- lifecycle ----------

    def start_driver(self) -> None:
        self._driver.start()

    def shutdown(self) -> None:
        self._stop.set()
        with self.lock:
            self._changed.notify_all()

    def _drive(self) -> None:
        while not self._stop.is_set():
            ticked = False
            with self.lock:
                runnable = (
                    self.running
                    and self.state.pending_query is None
                    and not self.state.completed
                )
                if runnable:
                    step(self.state, self.scenario)
                    ticked = True
                    if self.state.completed:
                        self.running = False
                    self._changed.notify_all()
            if ticked:
                if self.pace > 0:
                    self._stop.wait(self.pace)
            else:
                self._stop.wait(0.02)

    # ---------- mutations ----------

    def control(self, command: str) -> tuple[int, dict]:
        if command not in _CONTROL_COMMANDS:
            return 400, {"error": "unknown_command", "command": command}
        with self.lock:
            if command == "start":
                if self.state.completed:
                    return 200, {"ok": False, "detail": "mission complete"}
                self.running = True
            elif command == "pause":
                self.running = False
            elif command == "reset":
                self.state = init_state(self.scenario)
                self.running = False
                self._changed.notify_all()
            elif command == "tick":
                if self.state.pending_query is not None:
                    return 200, {"ok": False, "detail": "query pending"}
                if self.state.completed:
                    return 200, {"ok": False, "detail": "mission complete"}
                step(self.state, self.scenario)
                self._changed.notify_all()
            return 200, {"ok": True, "state": self.snapshot_locked()}

    def feedback(self, phrases) -> tuple[int, dict]:
        if not isinstance(phrases, list) or not all(
            isinstance(p, str) for p in phrases
        ) or not phrases:
            return 400, {"error": "bad_request",
                         "detail": "phrases must be a non-empty string array"}
        with self.lock:
            if self.state.pending_query is None:
                return 409, {"error": "no_pending_query"}
            try:
                handle_feedback(self.state, self.scenario, phrases)
            except UnknownPhrase as e:
                self._changed.notify_all()
                return 422, {"error": "unknown_phrase", "phrase": e.phrase}
            except NavloopError as e:
                self._changed.notify_all()
                return 422, {
                    "error": type(e).__name__,
                    "detail": str(e),
                }
            self._changed.notify_all()
            last = self.state.query_log[-1]
            return 200, {"ok": True, "spliced": last["spliced"],
                         "route": last["route"]}

    # ---------- views ----------

    def snapshot_locked(self) -> dict:
        s = self.state
        plan = None
        if s.current_plan is not None:
            plan = {
                "length": s.current_plan.length,
                "poses": [[p.x, p.y] for p in s.current_plan.poses],
            }
        pending = None
        if s.pending_query is not None:
            q = s.pending_query
            pending = {
                "query_id": q.query_id,
                "time": q.time,
                "reason": q.reason,
                "deviation": q.deviation,
                "robot": [q.robot.x, q.robot.y, q.robot.theta],
            }
        digest = hashlib.sha256(
            dump_occupancy_text(s.live_grid).encode("utf-8")
        ).hexdigest()
        return {
            "scenario": self.scenario.name,
            "tau": self.scenario.tau,
            "time": s.time,
            "tick": s.tick_count,
            "running": self.running,
            "completed": s.completed,
            "robot": [s.robot.x, s.robot.y, s.robot.theta],
            "plan": plan,
            "pending_query": pending,
            "last_candidates": s.last_candidates,
            "queue": [
                {"x": e.pose.x, "y": e.pose.y, "theta": e.pose.theta,
                 "label": e.label}
                for e in s.queue
            ],
            "waypoints_total": len(self.scenario.mission.waypoints),
            "waypoints_reached": s.waypoints_reached,
            "queries_raised": s.queries_raised,
            "live_grid_digest": digest,
            "event_seq": len(s.event_log),
        }

    def snapshot(self) -> dict:
        with self.lock:
            return self.snapshot_locked()

    def map_text(self) -> str:
        with self.lock:
            return dump_occupancy_text(self.state.live_grid)

    def events_since(self, cursor: int, timeout: float) -> list[dict]:
        """Events with seq >= cursor, waiting up to timeout for fresh ones."""
        with self.lock:
            if cursor >= len(self.state.event_log):
                self._changed.wait(timeout)
            return [dict(ev) for ev in self.state.event_log[cursor:]]

    @property
    def stopped(self) -> bool:
        return self._stop.is_set()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> SimService:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, format, *args):  # noqa: A002 - base class signature
        pass

    def _send_json(self, code: int, obj: dict) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict | None:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            obj = json.loads(raw or b"{}")
        except json.JSONDecodeError:
            return None
        return obj if isinstance(obj, dict) else None

    # ---------- GET ----------

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path == "/state":
            self._send_json(200, self.service.snapshot())
        elif url.path == "/map":
            body = self.service.map_text().encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)
        elif url.path == "/events":
            self._stream_events(url.query)
        else:
            self._send_json(404, {"error": "not_found", "path": url.path})

    def _stream_events(self, query: str) -> None:
        cursor = 0
        last_id = self.headers.get("Last-Event-ID")
        if last_id is None and query:
            for part in query.split("&"):
                if part.startswith("last_event_id="):
                    last_id = part.split("=", 1)[1]
        if last_id is not None:
            try:
                cursor = int(last_id) + 1
            except ValueError:
                cursor = 0
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-store")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Connection", "close")
        self.end_headers()
        try:
            self.wfile.write(b"retry: 2000\n\n")
            self.wfile.flush()
            while not self.service.stopped:
                batch = self.service.events_since(cursor, timeout=0.25)
                for ev in batch:
                    payload = json.dumps(ev)
                    frame = f"id: {ev['seq']}\nevent: {ev['kind']}\ndata: {payload}\n\n"
                    self.wfile.write(frame.encode("utf-8"))
                    cursor = ev["seq"] + 1
                if batch:
                    self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass

    # ---------- POST ----------

    def do_OPTIONS(self):
        # CORS preflight for browser consoles on a different origin.
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers",
                         "Content-Type, Last-Event-ID")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_POST(self):
        url = urlsplit(self.path)
        body = self._read_json()
        if body is None:
            self._send_json(400, {"error": "bad_request", "detail": "invalid JSON"})
            return
        if url.path == "/control":
            code, obj = self.service.control(str(body.get("command", "")))
            self._send_json(code, obj)
        elif url.path == "/feedback":
            code, obj = self.service.feedback(body.get("phrases"))
            self._send_json(code, obj)
        else:
            self._send_json(404, {"error": "not_found", "path": url.path})


class SimServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, service: SimService):
        super().__init__(addr, _Handler)
        self.service = service


def make_server(scenario: Scenario, bind: str = "127.0.0.1:0",
                pace: float | None = None) -> SimServer:
    """Bind the service; port 0 picks a free one. Caller runs serve_forever."""
    host, _, port_text = bind.partition(":")
    server = SimServer((host or "127.0.0.1", int(port_text or 0)),
                       SimService(scenario, pace))
    server.service.start_driver()
    return server


def serve(scenario: Scenario, bind: str, pace: float | None = None) -> None:
    server = make_server(scenario, bind, pace)
    host, port = server.server_address[:2]
    print(f"serving {scenario.name} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.service.shutdown()
        server.shutdown()
