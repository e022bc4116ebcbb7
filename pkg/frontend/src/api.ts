// Thin typed wrappers over the simulation service endpoints.

import type { ControlResult, FeedbackResult, Snapshot } from "./types.js";

export type ControlCommand = "start" | "pause" | "reset" | "tick";

export class ApiClient {
  private readonly fetchFn: typeof fetch;

  constructor(readonly base: string, fetchFn?: typeof fetch) {
    // Wrapped so browser fetch keeps its expected receiver.
    this.fetchFn = fetchFn ?? ((...args) => fetch(...args));
  }

  async state(): Promise<Snapshot> {
    const resp = await this.fetchFn(`${this.base}/state`);
    if (!resp.ok) throw new Error(`/state returned ${resp.status}`);
    return (await resp.json()) as Snapshot;
  }

  async mapText(): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/map`);
    if (!resp.ok) throw new Error(`/map returned ${resp.status}`);
    return resp.text();
  }

  async control(command: ControlCommand): Promise<ControlResult> {
    const resp = await this.fetchFn(`${this.base}/control`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ command }),
    });
    const body = (await resp.json()) as ControlResult & { error?: string };
    if (!resp.ok) return { ok: false, detail: body.error ?? `${resp.status}` };
    return body;
  }

  // Resolves for every HTTP outcome; the status distinguishes accepted
  // answers (200) from no-pending (409) and unknown phrases (422).
  async feedback(phrases: string[]): Promise<FeedbackResult> {
    const resp = await this.fetchFn(`${this.base}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ phrases }),
    });
    const body = (await resp.json()) as Record<string, unknown>;
    return {
      status: resp.status,
      ok: resp.status === 200,
      spliced: body.spliced as number | undefined,
      error: body.error as string | undefined,
      phrase: body.phrase as string | undefined,
      detail: body.detail as string | undefined,
    };
  }
}
