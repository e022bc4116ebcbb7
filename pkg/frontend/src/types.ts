// Wire types for the simulation service. Field names mirror the JSON
// exactly; everything is plain data.

export interface PendingQuery {
  query_id: number;
  time: number;
  reason: "deviation" | "no_path";
  deviation: number | null;
  robot: [number, number, number];
}

export interface PlanView {
  length: number;
  poses: Array<[number, number]>;
}

export interface QueueEntry {
  x: number;
  y: number;
  theta: number;
  label: string;
}

export interface CandidateView {
  x: number;
  y: number;
  region_id: number;
  clearance: number;
  phrase: string;
}

export interface Snapshot {
  scenario: string;
  tau: number;
  time: number;
  tick: number;
  running: boolean;
  completed: boolean;
  robot: [number, number, number];
  plan: PlanView | null;
  pending_query: PendingQuery | null;
  last_candidates: CandidateView[][] | null;
  queue: QueueEntry[];
  waypoints_total: number;
  waypoints_reached: number;
  queries_raised: number;
  live_grid_digest: string;
  event_seq: number;
}

export interface StreamEvent {
  seq: number;
  kind:
    | "plan_updated"
    | "query_raised"
    | "waypoint_reached"
    | "mission_complete"
    | "error";
  time: number;
  [key: string]: unknown;
}

export interface ControlResult {
  ok: boolean;
  detail?: string;
}

export interface FeedbackResult {
  status: number;
  ok: boolean;
  spliced?: number;
  error?: string;
  phrase?: string;
  detail?: string;
}
