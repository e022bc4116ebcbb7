// The operator console: live map, mission progress, event log, and the
// query panel where a human answers the robot's questions.
//
// All simulation access goes through the HTTP endpoints plus the event
// stream; the console keeps no logic of its own beyond presentation and
// a local breadcrumb trail of observed robot positions.

import { ApiClient, type ControlCommand } from "./api.js";
import { parseOcc } from "./occ.js";
import { EventStream, type StreamStatus } from "./sse.js";
import { MapView } from "./view.js";
import type { Snapshot, StreamEvent } from "./types.js";

export interface ConsoleOptions {
  pollMs?: number;
  fetchFn?: typeof fetch;
}

interface Waiter {
  kind: string;
  after: number;
  resolve: (ev: StreamEvent) => void;
}

function div(className: string, parent: HTMLElement): HTMLDivElement {
  const node = document.createElement("div");
  node.className = className;
  parent.appendChild(node);
  return node;
}

export class OperatorConsole {
  readonly api: ApiClient;
  readonly view: MapView;
  readonly events: StreamEvent[] = [];

  private readonly stream: EventStream;
  private readonly pollMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private snapshot: Snapshot | null = null;
  private digest = "";
  private trail: Array<[number, number]> = [];
  private waiters: Waiter[] = [];
  private refreshing: Promise<void> | null = null;
  private lastQueryRaisedSeq = -1;

  // DOM pieces tests and main() reach for.
  readonly scenarioName: HTMLElement;
  readonly statusBadge: HTMLElement;
  readonly clock: HTMLElement;
  readonly progress: HTMLElement;
  readonly controlNote: HTMLElement;
  readonly queryPanel: HTMLElement;
  readonly queryMeta: HTMLElement;
  readonly phraseList: HTMLOListElement;
  readonly addPhraseBtn: HTMLButtonElement;
  readonly sendBtn: HTMLButtonElement;
  readonly feedbackError: HTMLElement;
  readonly eventList: HTMLUListElement;

  constructor(readonly root: HTMLElement, base: string, options: ConsoleOptions = {}) {
    this.api = new ApiClient(base, options.fetchFn);
    this.pollMs = options.pollMs ?? 250;
    this.stream = new EventStream(
      base,
      (ev) => this.onEvent(ev),
      (status) => this.onStreamStatus(status),
      { fetchFn: options.fetchFn },
    );

    this.root.classList.add("console");

    const header = div("console-header", this.root);
    this.scenarioName = div("scenario-name", header);
    this.scenarioName.textContent = "connecting...";
    this.statusBadge = div("status-badge", header);
    this.statusBadge.textContent = "offline";
    this.clock = div("clock", header);
    this.progress = div("progress", header);
    const controls = div("controls", header);
    for (const cmd of ["start", "pause", "tick", "reset"] as ControlCommand[]) {
      const btn = document.createElement("button");
      btn.textContent = cmd;
      btn.dataset.cmd = cmd;
      btn.addEventListener("click", () => void this.sendControl(cmd));
      controls.appendChild(btn);
    }
    this.controlNote = div("control-note", header);

    const body = div("console-body", this.root);
    const mapPanel = div("map-panel", body);
    this.view = new MapView();
    mapPanel.appendChild(this.view.svg);

    const side = div("side-panel", body);

    this.queryPanel = div("query-panel hidden", side);
    const title = document.createElement("h2");
    title.textContent = "robot is asking";
    this.queryPanel.appendChild(title);
    this.queryMeta = div("query-meta", this.queryPanel);
    this.phraseList = document.createElement("ol");
    this.phraseList.className = "phrase-rows";
    this.queryPanel.appendChild(this.phraseList);
    const actions = div("query-actions", this.queryPanel);
    this.addPhraseBtn = document.createElement("button");
    this.addPhraseBtn.className = "add-phrase";
    this.addPhraseBtn.textContent = "+ phrase";
    this.addPhraseBtn.addEventListener("click", () => this.addPhraseRow());
    actions.appendChild(this.addPhraseBtn);
    this.sendBtn = document.createElement("button");
    this.sendBtn.className = "send-feedback";
    this.sendBtn.textContent = "send answer";
    this.sendBtn.addEventListener("click", () => void this.submitFeedback());
    actions.appendChild(this.sendBtn);
    this.feedbackError = div("feedback-error hidden", this.queryPanel);

    const log = div("event-log", side);
    const logTitle = document.createElement("h2");
    logTitle.textContent = "events";
    log.appendChild(logTitle);
    this.eventList = document.createElement("ul");
    this.eventList.className = "events";
    log.appendChild(this.eventList);
  }

  async connect(): Promise<void> {
    await this.refresh();
    this.stream.start();
    this.pollTimer = setInterval(() => void this.refresh(), this.pollMs);
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = null;
    this.stream.stop();
  }

  // Resolves with the first stream event of `kind` with seq > after.
  // Checks already-received events first, so callers cannot lose a race
  // against a fast server.
  nextEvent(kind: string, after = -1, timeoutMs = 15000): Promise<StreamEvent> {
    const seen = this.events.find((e) => e.kind === kind && e.seq > after);
    if (seen) return Promise.resolve(seen);
    return new Promise((resolve, reject) => {
      const waiter: Waiter = { kind, after, resolve };
      this.waiters.push(waiter);
      setTimeout(() => {
        const i = this.waiters.indexOf(waiter);
        if (i >= 0) {
          this.waiters.splice(i, 1);
          reject(new Error(`no ${kind} event within ${timeoutMs} ms`));
        }
      }, timeoutMs);
    });
  }

  get lastSnapshot(): Snapshot | null {
    return this.snapshot;
  }

  // ---------- stream handling ----------

  private onEvent(ev: StreamEvent): void {
    this.events.push(ev);
    this.logEvent(ev);
    // Query panel state follows the stream alone: snapshots can be older
    // than the event being handled, so they never open or close it. The
    // replay on (re)connect delivers any pending query_raised, which also
    // covers joining mid-mission.
    if (ev.kind === "query_raised") this.showQuery(ev);
    if (ev.kind === "plan_updated" && ev.query_id !== undefined) {
      // A query was answered (possibly from another console).
      this.hideQuery();
    }
    if (ev.kind === "mission_complete") this.statusBadge.textContent = "complete";
    void this.refresh();

    const ready = this.waiters.filter((w) => w.kind === ev.kind && ev.seq > w.after);
    this.waiters = this.waiters.filter((w) => !ready.includes(w));
    for (const w of ready) w.resolve(ev);
  }

  private onStreamStatus(status: StreamStatus): void {
    if (status === "open") return; // snapshot refresh sets the real label
    if (status === "retrying") this.statusBadge.textContent = "reconnecting";
    if (status === "connecting" && this.snapshot === null) {
      this.statusBadge.textContent = "connecting";
    }
  }

  private logEvent(ev: StreamEvent): void {
    const li = document.createElement("li");
    li.dataset.kind = ev.kind;
    li.textContent = `[t=${ev.time.toFixed(1)}] ${this.describe(ev)}`;
    this.eventList.prepend(li);
    while (this.eventList.childElementCount > 200) {
      this.eventList.lastElementChild?.remove();
    }
  }

  private describe(ev: StreamEvent): string {
    switch (ev.kind) {
      case "plan_updated": {
        const spliced = ev.spliced as number | undefined;
        const length = (ev.length as number).toFixed(2);
        return spliced !== undefined
          ? `route spliced: ${spliced} waypoint(s), ${length} m`
          : `plan updated: ${length} m`;
      }
      case "query_raised":
        return ev.reason === "no_path"
          ? "query: no path to the next waypoint"
          : `query: deviation ${(ev.deviation as number).toFixed(2)}`;
      case "waypoint_reached":
        return `waypoint reached: ${ev.label}`;
      case "mission_complete":
        return `mission complete (${ev.waypoints} waypoints)`;
      case "error":
        return `feedback failed: ${ev.error}`;
      default:
        return ev.kind;
    }
  }

  // ---------- query panel ----------

  private showQuery(ev: StreamEvent): void {
    this.lastQueryRaisedSeq = ev.seq;
    const tau = this.snapshot?.tau;
    this.queryMeta.textContent =
      ev.reason === "no_path"
        ? "No route to the next waypoint survives the map change. " +
          "Where should it go instead?"
        : `The replanned route deviates ${(ev.deviation as number).toFixed(2)}` +
          `${tau !== undefined ? ` (threshold ${tau})` : ""} from the one ` +
          "being followed. Describe where to go, one place per line, in " +
          "visiting order.";
    if (this.phraseList.childElementCount === 0) this.addPhraseRow();
    this.hideFeedbackError();
    this.queryPanel.classList.remove("hidden");
    this.statusBadge.textContent = "awaiting answer";
  }

  private hideQuery(): void {
    this.queryPanel.classList.add("hidden");
    this.phraseList.replaceChildren();
    this.hideFeedbackError();
  }

  addPhraseRow(value = ""): HTMLInputElement {
    const li = document.createElement("li");
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = "e.g. the dining table";
    input.value = value;
    li.appendChild(input);
    this.phraseList.appendChild(li);
    return input;
  }

  phraseInputs(): HTMLInputElement[] {
    return Array.from(this.phraseList.querySelectorAll("input"));
  }

  private showFeedbackError(text: string): void {
    this.feedbackError.textContent = text;
    this.feedbackError.classList.remove("hidden");
  }

  private hideFeedbackError(): void {
    this.feedbackError.textContent = "";
    this.feedbackError.classList.add("hidden");
  }

  async submitFeedback(): Promise<void> {
    const phrases = this.phraseInputs()
      .map((i) => i.value.trim())
      .filter((v) => v.length > 0);
    if (phrases.length === 0) {
      this.showFeedbackError("enter at least one place description");
      return;
    }
    this.sendBtn.disabled = true;
    const seqAtSubmit = this.lastQueryRaisedSeq;
    try {
      const result = await this.api.feedback(phrases);
      if (result.ok) {
        // Only close if no newer query arrived while the answer was in
        // flight; a later query_raised handler owns the panel then.
        if (this.lastQueryRaisedSeq === seqAtSubmit) this.hideQuery();
      } else if (result.error === "unknown_phrase") {
        this.showFeedbackError(
          `"${result.phrase}" is not in this map's vocabulary; try different words.`,
        );
      } else if (result.status === 409) {
        // The server says nothing is pending: someone else answered.
        if (this.lastQueryRaisedSeq === seqAtSubmit) this.hideQuery();
      } else {
        this.showFeedbackError(result.detail ?? result.error ?? "request failed");
      }
    } catch (err) {
      this.showFeedbackError(`service unreachable: ${String(err)}`);
    } finally {
      this.sendBtn.disabled = false;
    }
    await this.refresh();
  }

  // ---------- control ----------

  async sendControl(cmd: ControlCommand): Promise<void> {
    try {
      const result = await this.api.control(cmd);
      this.controlNote.textContent = result.ok ? "" : `${cmd}: ${result.detail}`;
      if (cmd === "reset" && result.ok) this.resync();
    } catch (err) {
      this.controlNote.textContent = `${cmd}: ${String(err)}`;
    }
    await this.refresh();
  }

  // Drop everything tied to the old server-side event log and reconnect
  // the stream from seq 0.
  private resync(): void {
    this.stream.stop();
    this.stream.lastSeq = null;
    this.events.length = 0;
    this.eventList.replaceChildren();
    this.trail = [];
    this.lastQueryRaisedSeq = -1;
    this.view.setCandidates(null);
    this.hideQuery();
    this.stream.start();
  }

  // ---------- state sync ----------

  private async refresh(): Promise<void> {
    // Collapse bursts: one in-flight refresh at a time, callers share it.
    if (this.refreshing) return this.refreshing;
    this.refreshing = this.doRefresh().finally(() => {
      this.refreshing = null;
    });
    return this.refreshing;
  }

  private async doRefresh(): Promise<void> {
    let snap: Snapshot;
    try {
      snap = await this.api.state();
    } catch {
      this.statusBadge.textContent = "unreachable";
      return;
    }

    const prev = this.snapshot;
    this.snapshot = snap;

    // A reset rebuilds the server-side event log from seq 0; an open
    // stream cursor past its end would wait forever, so reconnect fresh.
    // Detected by regression between two consecutive snapshots: those are
    // serialized server reads, unlike snapshot-vs-stream comparisons,
    // which can race.
    if (prev && (snap.event_seq < prev.event_seq || snap.tick < prev.tick)) {
      this.resync();
    }

    if (snap.live_grid_digest !== this.digest) {
      try {
        this.view.setGrid(parseOcc(await this.api.mapText()));
        this.digest = snap.live_grid_digest;
      } catch {
        // keep the previous rendering; digest stays stale so we retry
      }
    }

    const [x, y, theta] = snap.robot;
    const last = this.trail[this.trail.length - 1];
    if (!last || Math.hypot(last[0] - x, last[1] - y) > 1e-9) {
      this.trail.push([x, y]);
    }

    this.scenarioName.textContent = snap.scenario;
    this.clock.textContent = `t ${snap.time.toFixed(1)} s / tick ${snap.tick}`;
    this.progress.textContent =
      `${snap.waypoints_reached}/${snap.waypoints_total} waypoints` +
      `, ${snap.queries_raised} queries`;
    // Panel visibility is the console's own notion of "query pending";
    // it is never derived from a possibly stale snapshot.
    this.statusBadge.textContent = snap.completed
      ? "complete"
      : !this.queryPanel.classList.contains("hidden")
        ? "awaiting answer"
        : snap.running
          ? "running"
          : "paused";

    this.view.setRobot(x, y, theta);
    this.view.setTrail(this.trail);
    this.view.setPlan(snap.plan ? snap.plan.poses : null);
    this.view.setQueue(snap.queue);
    this.view.setCandidates(snap.last_candidates);
  }
}
