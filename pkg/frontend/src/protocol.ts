/**
 * Wire protocol spoken by the planning service over a single websocket.
 * The cockpit renders exclusively from these messages; it never simulates.
 */

export const PROTOCOL_VERSION = 1;

export type Vec2 = [number, number];

export interface DiskShape {
  disk: { center: Vec2; radius: number };
}
export interface PolygonShape {
  polygon: Vec2[];
}
export type Shape = DiskShape | PolygonShape;

export type Region = { id: string; labels: string[] } & Shape;

export interface ScenarioDict {
  name: string;
  ap: string[];
  regions: Region[];
  edges: { from: string; to: string; weight: number; both: boolean }[];
  initial: string;
  phi_hard: string;
  phi_soft: string | null;
  beta0: number;
  gamma: number;
  d_s: number;
  eps_buffer: number;
  controller: { gain: number; v_max: number; u_h_max: number; dt: number };
  irl: {
    lambda: number;
    theta: number;
    eps_threshold: number;
    max_iters: number;
  };
}

export interface PlanDict {
  prefix: string[];
  suffix: string[];
}

// ---- server -> client ----------------------------------------------------

export interface StateTickMsg {
  v: number;
  type: "state_tick";
  t: number;
  sim_time: number;
  x: Vec2;
  u: Vec2;
  u_r: Vec2;
  u_h: Vec2;
  kappa: number;
  d_t: number | null;
  region: string | null;
  plan: PlanDict | null;
  cursor: number;
  beta: number;
  mode: string;
  paused: boolean;
}

export interface HelloMsg {
  v: number;
  type: "hello";
  scenario: ScenarioDict;
  lockstep: boolean;
  tick_hz: number;
  dt: number;
  tasks: TaskStatusMsg[];
  state: StateTickMsg;
}

export interface PlanChangedMsg {
  v: number;
  type: "plan_changed";
  tick: number;
  reason: string;
  plan: PlanDict;
  cost: number;
  beta: number;
}

export interface BetaUpdatedMsg {
  v: number;
  type: "beta_updated";
  tick: number;
  old: number;
  new: number;
  history: number[];
  iterations: number;
  converged: boolean;
}

export interface TaskStatusMsg {
  v: number;
  type: "task_status";
  tick: number;
  task_id: number;
  pickup: string;
  dropoff: string;
  deadline_s: number;
  status: "active" | "picked" | "fulfilled" | "rejected";
  predicted_delay: number | null;
  delta_cost: number | null;
  error?: string;
}

export interface FaultMsg {
  v: number;
  type: "fault";
  tick: number;
  code: string;
  detail: string;
}

export interface ModelDiscoveredMsg {
  v: number;
  type: "model_discovered";
  tick: number;
  frm: string;
  to: string;
}

export interface AckMsg {
  v: number;
  type: "ack";
  ref: number;
}

export interface RejectMsg {
  v: number;
  type: "reject";
  ref: number;
  code: string;
  detail: string;
}

export type ServerMsg =
  | HelloMsg
  | StateTickMsg
  | PlanChangedMsg
  | BetaUpdatedMsg
  | TaskStatusMsg
  | FaultMsg
  | ModelDiscoveredMsg
  | AckMsg
  | RejectMsg;

// ---- client -> server ----------------------------------------------------

export interface SetVelocityMsg {
  v: number;
  seq: number;
  type: "set_velocity";
  vx: number;
  vy: number;
}

export interface AssignTempTaskMsg {
  v: number;
  seq: number;
  type: "assign_temp_task";
  pickup: string;
  dropoff: string;
  deadline_s: number;
}

export type ModelUpdate =
  | {
      kind: "SetEdge";
      frm: string;
      to: string;
      present: boolean;
      weight?: number;
      both?: boolean;
    }
  | { kind: "SetLabels"; region: string; labels: string[] };

export interface EditModelMsg {
  v: number;
  seq: number;
  type: "edit_model";
  updates: ModelUpdate[];
}

export interface PauseMsg {
  v: number;
  seq: number;
  type: "pause";
}
export interface ResumeMsg {
  v: number;
  seq: number;
  type: "resume";
}
export interface StepMsg {
  v: number;
  seq: number;
  type: "step";
  ticks: number;
}

export type ClientMsg =
  | SetVelocityMsg
  | AssignTempTaskMsg
  | EditModelMsg
  | PauseMsg
  | ResumeMsg
  | StepMsg;

export function parseServerMsg(raw: string): ServerMsg {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed server frame");
  }
  return msg as ServerMsg;
}
