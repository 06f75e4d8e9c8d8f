/**
 * Cockpit state: a pure left-fold over the server's message stream.
 * reduce() never mutates its input, so replaying a recorded log yields the
 * same state object tree and therefore the same rendering, byte for byte.
 */

import type {
  PlanDict,
  ScenarioDict,
  ServerMsg,
  StateTickMsg,
  TaskStatusMsg,
  Vec2,
} from "./protocol";

/** One pose sample of the executed trajectory, classed by authority. */
export interface TrailPoint {
  x: Vec2;
  /** true when the operator had both intent (u_h != 0) and authority
   * (kappa >= 0.05); segments below that render as autonomous-only. */
  guided: boolean;
}

export interface BetaSample {
  tick: number;
  old: number;
  next: number;
  history: number[];
  iterations: number;
}

export interface Banner {
  level: "info" | "warn" | "error";
  text: string;
}

export interface CockpitState {
  connected: boolean;
  scenario: ScenarioDict | null;
  lockstep: boolean;
  tick: StateTickMsg | null;
  trail: TrailPoint[];
  plan: PlanDict | null;
  planReason: string;
  planCost: number | null;
  cursor: number;
  beta: number | null;
  betaTrace: BetaSample[];
  tasks: Map<number, TaskStatusMsg>;
  discovered: { frm: string; to: string }[];
  banners: Banner[];
  /** seq numbers sent but not yet acknowledged or rejected. */
  inflight: Set<number>;
  acked: number;
  rejected: number;
}

export const GUIDED_KAPPA_MIN = 0.05;
const MAX_BANNERS = 6;

export function initialState(): CockpitState {
  return {
    connected: false,
    scenario: null,
    lockstep: false,
    tick: null,
    trail: [],
    plan: null,
    planReason: "",
    planCost: null,
    cursor: 0,
    beta: null,
    betaTrace: [],
    tasks: new Map(),
    discovered: [],
    banners: [],
    inflight: new Set(),
    acked: 0,
    rejected: 0,
  };
}

function isGuided(t: StateTickMsg): boolean {
  const moved = t.u_h[0] !== 0 || t.u_h[1] !== 0;
  return moved && t.kappa >= GUIDED_KAPPA_MIN;
}

function pushBanner(banners: Banner[], b: Banner): Banner[] {
  return [...banners.slice(-(MAX_BANNERS - 1)), b];
}

function applyTick(s: CockpitState, m: StateTickMsg): CockpitState {
  return {
    ...s,
    tick: m,
    trail: [...s.trail, { x: m.x, guided: isGuided(m) }],
    plan: m.plan,
    cursor: m.cursor,
    beta: m.beta,
  };
}

/** Fold one server message into the state. Pure. */
export function reduce(s: CockpitState, m: ServerMsg): CockpitState {
  switch (m.type) {
    case "hello": {
      const tasks = new Map<number, TaskStatusMsg>();
      for (const t of m.tasks) tasks.set(t.task_id, t);
      const fresh: CockpitState = {
        ...initialState(),
        connected: true,
        scenario: m.scenario,
        lockstep: m.lockstep,
        tasks,
      };
      return applyTick(fresh, m.state);
    }
    case "state_tick":
      return applyTick(s, m);
    case "plan_changed":
      return {
        ...s,
        plan: m.plan,
        planReason: m.reason,
        planCost: m.cost,
        beta: m.beta,
        cursor: 0,
      };
    case "beta_updated": {
      const sample: BetaSample = {
        tick: m.tick,
        old: m.old,
        next: m.new,
        history: m.history,
        iterations: m.iterations,
      };
      return { ...s, beta: m.new, betaTrace: [...s.betaTrace, sample] };
    }
    case "task_status": {
      const tasks = new Map(s.tasks);
      tasks.set(m.task_id, m);
      let banners = s.banners;
      if (m.status === "rejected") {
        banners = pushBanner(banners, {
          level: "warn",
          text: `task ${m.task_id} rejected: ${m.error ?? "infeasible"}`,
        });
      }
      return { ...s, tasks, banners };
    }
    case "fault":
      return {
        ...s,
        banners: pushBanner(s.banners, {
          level: "error",
          text: `${m.code}: ${m.detail}`,
        }),
      };
    case "model_discovered":
      return {
        ...s,
        discovered: [...s.discovered, { frm: m.frm, to: m.to }],
        banners: pushBanner(s.banners, {
          level: "info",
          text: `discovered passage ${m.frm} -> ${m.to}`,
        }),
      };
    case "ack": {
      const inflight = new Set(s.inflight);
      inflight.delete(m.ref);
      return { ...s, inflight, acked: s.acked + 1 };
    }
    case "reject": {
      const inflight = new Set(s.inflight);
      inflight.delete(m.ref);
      return {
        ...s,
        inflight,
        rejected: s.rejected + 1,
        banners: pushBanner(s.banners, {
          level: "warn",
          text: `#${m.ref} ${m.code}: ${m.detail}`,
        }),
      };
    }
    default:
      return s;
  }
}

export function markSent(s: CockpitState, seq: number): CockpitState {
  const inflight = new Set(s.inflight);
  inflight.add(seq);
  return { ...s, inflight };
}

export function markDisconnected(s: CockpitState): CockpitState {
  return {
    ...s,
    connected: false,
    banners: pushBanner(s.banners, {
      level: "error",
      text: "disconnected: inputs are dropped",
    }),
  };
}

/** Region ids the mission text forbids, for map highlighting. Static
 * config parsing of the always-not pattern, not simulation; the source of
 * truth for actual safety is the server's kappa/d_t stream. */
export function keepOutRegions(formula: string | null): string[] {
  if (!formula) return [];
  const out: string[] = [];
  const re = /\[\]\s*!\s*(\w+)/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(formula)) !== null) out.push(m[1]!);
  return [...new Set(out)];
}
