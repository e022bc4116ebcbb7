// Server-Sent Events over fetch + ReadableStream.
//
// The browser EventSource cannot send an Accept header from a worker-less
// page with query fallback, and it does not exist at all under jsdom, so
// the console carries its own small client. Resume is by event id: the
// server replays everything after ?last_event_id=<id>, and ids are a
// gapless sequence, so a reconnect never drops or duplicates an event.

import type { StreamEvent } from "./types.js";

export interface SseFrame {
  id?: string;
  event?: string;
  data?: string;
  retry?: number;
}

// Incremental frame parser; feed it arbitrary chunk boundaries.
export class SseParser {
  private buffer = "";
  private current: SseFrame = {};
  private dataLines: string[] = [];

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) break;
      let line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);

      if (line === "") {
        if (this.dataLines.length > 0 || this.current.id !== undefined ||
            this.current.event !== undefined || this.current.retry !== undefined) {
          if (this.dataLines.length > 0) {
            this.current.data = this.dataLines.join("\n");
          }
          frames.push(this.current);
        }
        this.current = {};
        this.dataLines = [];
        continue;
      }
      if (line.startsWith(":")) continue; // comment / keep-alive

      const colon = line.indexOf(":");
      const field = colon < 0 ? line : line.slice(0, colon);
      let value = colon < 0 ? "" : line.slice(colon + 1);
      if (value.startsWith(" ")) value = value.slice(1);

      if (field === "data") this.dataLines.push(value);
      else if (field === "id") this.current.id = value;
      else if (field === "event") this.current.event = value;
      else if (field === "retry") {
        const ms = Number(value);
        if (Number.isFinite(ms) && ms >= 0) this.current.retry = ms;
      }
    }
    return frames;
  }
}

export type StreamStatus = "connecting" | "open" | "retrying" | "closed";

export interface EventStreamOptions {
  fetchFn?: typeof fetch;
  retryMs?: number; // initial; the server's retry: field overrides
}

export class EventStream {
  private ctrl: AbortController | null = null;
  private stopped = true;
  // Bumped on every start(); an old loop that wakes up after a quick
  // stop()/start() sees a stale generation and exits instead of running
  // alongside the new one.
  private generation = 0;
  private retryMs: number;
  private readonly fetchFn: typeof fetch;
  // Seq of the last delivered event; reconnects resume just after it.
  lastSeq: number | null = null;

  constructor(
    private readonly base: string,
    private readonly onEvent: (ev: StreamEvent) => void,
    private readonly onStatus?: (status: StreamStatus) => void,
    options: EventStreamOptions = {},
  ) {
    // Wrapped so browser fetch keeps its expected receiver.
    this.fetchFn = options.fetchFn ?? ((...args) => fetch(...args));
    this.retryMs = options.retryMs ?? 2000;
  }

  start(): void {
    if (!this.stopped) return;
    this.stopped = false;
    this.generation += 1;
    void this.loop(this.generation);
  }

  stop(): void {
    this.stopped = true;
    this.ctrl?.abort();
    this.ctrl = null;
    this.onStatus?.("closed");
  }

  private url(): string {
    const resume = this.lastSeq === null ? "" : `?last_event_id=${this.lastSeq}`;
    return `${this.base}/events${resume}`;
  }

  private async loop(generation: number): Promise<void> {
    const live = () => !this.stopped && this.generation === generation;
    while (live()) {
      const ctrl = new AbortController();
      this.ctrl = ctrl;
      this.onStatus?.("connecting");
      try {
        const resp = await this.fetchFn(this.url(), {
          headers: { Accept: "text/event-stream" },
          signal: ctrl.signal,
        });
        if (!resp.ok || !resp.body) {
          throw new Error(`event stream returned ${resp.status}`);
        }
        if (!live()) return;
        this.onStatus?.("open");
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (done || !live()) break;
          for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
            if (frame.retry !== undefined) this.retryMs = frame.retry;
            if (frame.data === undefined) continue;
            const ev = JSON.parse(frame.data) as StreamEvent;
            this.lastSeq = ev.seq;
            this.onEvent(ev);
          }
        }
      } catch {
        // fall through to the retry delay below
      }
      if (!live()) return;
      this.onStatus?.("retrying");
      await new Promise((r) => setTimeout(r, this.retryMs));
    }
  }
}
