import { describe, expect, it } from "vitest";

import type {
  BetaUpdatedMsg,
  HelloMsg,
  ScenarioDict,
  StateTickMsg,
  TaskStatusMsg,
} from "../src/protocol";
import {
  initialState,
  keepOutRegions,
  markDisconnected,
  markSent,
  reduce,
} from "../src/state";

function scenario(): ScenarioDict {
  return {
    name: "mini",
    ap: ["a"],
    regions: [
      { id: "r0", disk: { center: [0, 0], radius: 1 }, labels: ["a"] },
      { id: "r1", disk: { center: [4, 0], radius: 1 }, labels: [] },
    ],
    edges: [{ from: "r0", to: "r1", weight: 4, both: true }],
    initial: "r0",
    phi_hard: "[]<>a && []!r1",
    phi_soft: null,
    beta0: 2,
    gamma: 1,
    d_s: 1,
    eps_buffer: 1,
    controller: { gain: 1, v_max: 1, u_h_max: 1.5, dt: 0.05 },
    irl: { lambda: 0.5, theta: 0.5, eps_threshold: 0.001, max_iters: 100 },
  };
}

function tick(over: Partial<StateTickMsg> = {}): StateTickMsg {
  return {
    v: 1,
    type: "state_tick",
    t: 1,
    sim_time: 0.05,
    x: [0, 0],
    u: [0.5, 0],
    u_r: [0.5, 0],
    u_h: [0, 0],
    kappa: 1,
    d_t: null,
    region: "r0",
    plan: { prefix: [], suffix: ["r0"] },
    cursor: 0,
    beta: 2,
    mode: "executing",
    paused: false,
    ...over,
  };
}

function hello(): HelloMsg {
  return {
    v: 1,
    type: "hello",
    scenario: scenario(),
    lockstep: true,
    tick_hz: 20,
    dt: 0.05,
    tasks: [],
    state: tick({ t: 0 }),
  };
}

describe("reducer", () => {
  it("hello resets state and applies the embedded snapshot", () => {
    const s = reduce(initialState(), hello());
    expect(s.connected).toBe(true);
    expect(s.scenario?.name).toBe("mini");
    expect(s.lockstep).toBe(true);
    expect(s.trail).toHaveLength(1);
    expect(s.beta).toBe(2);
  });

  it("state ticks extend the trail without mutating the old state", () => {
    const s0 = reduce(initialState(), hello());
    const s1 = reduce(s0, tick({ t: 1, x: [0.1, 0] }));
    const s2 = reduce(s1, tick({ t: 2, x: [0.2, 0] }));
    expect(s2.trail).toHaveLength(3);
    expect(s1.trail).toHaveLength(2);
    expect(s0.trail).toHaveLength(1);
  });

  it("classes trail points guided only with intent and authority", () => {
    const s0 = reduce(initialState(), hello());
    const guided = reduce(s0, tick({ u_h: [0.4, 0], kappa: 1 }));
    expect(guided.trail[guided.trail.length - 1]?.guided).toBe(true);

    const noAuthority = reduce(s0, tick({ u_h: [0.4, 0], kappa: 0.04 }));
    expect(noAuthority.trail[noAuthority.trail.length - 1]?.guided).toBe(false);

    const noIntent = reduce(s0, tick({ u_h: [0, 0], kappa: 1 }));
    expect(noIntent.trail[noIntent.trail.length - 1]?.guided).toBe(false);
  });

  it("plan_changed replaces the plan and resets the cursor", () => {
    const s0 = reduce(initialState(), hello());
    const s1 = reduce(s0, {
      v: 1,
      type: "plan_changed",
      tick: 5,
      reason: "model_edit",
      plan: { prefix: ["r0"], suffix: ["r1"] },
      cost: 8,
      beta: 2,
    });
    expect(s1.plan?.prefix).toEqual(["r0"]);
    expect(s1.planReason).toBe("model_edit");
    expect(s1.planCost).toBe(8);
    expect(s1.cursor).toBe(0);
  });

  it("beta_updated moves the gauge and appends a sparkline sample", () => {
    const msg: BetaUpdatedMsg = {
      v: 1,
      type: "beta_updated",
      tick: 9,
      old: 2,
      new: 1.25,
      history: [2, 1.5, 1.25],
      iterations: 2,
      converged: true,
    };
    const s = reduce(reduce(initialState(), hello()), msg);
    expect(s.beta).toBe(1.25);
    expect(s.betaTrace).toHaveLength(1);
    expect(s.betaTrace[0]?.history).toEqual([2, 1.5, 1.25]);
  });

  it("task_status upserts by id and banners rejections", () => {
    const base: TaskStatusMsg = {
      v: 1,
      type: "task_status",
      tick: 3,
      task_id: 1,
      pickup: "r0",
      dropoff: "r1",
      deadline_s: 60,
      status: "active",
      predicted_delay: -4,
      delta_cost: 2,
    };
    let s = reduce(reduce(initialState(), hello()), base);
    expect(s.tasks.get(1)?.status).toBe("active");
    s = reduce(s, { ...base, status: "fulfilled" });
    expect(s.tasks.size).toBe(1);
    expect(s.tasks.get(1)?.status).toBe("fulfilled");
    s = reduce(s, {
      ...base,
      task_id: 2,
      status: "rejected",
      error: "no feasible insertion",
    });
    expect(s.tasks.size).toBe(2);
    expect(s.banners.some((b) => b.text.includes("no feasible insertion"))).toBe(
      true,
    );
  });

  it("faults and discoveries surface as banners", () => {
    let s = reduce(initialState(), hello());
    s = reduce(s, {
      v: 1,
      type: "fault",
      tick: 4,
      code: "learning",
      detail: "trace does not lift",
    });
    expect(s.banners[s.banners.length - 1]?.level).toBe("error");
    s = reduce(s, {
      v: 1,
      type: "model_discovered",
      tick: 6,
      frm: "r0",
      to: "r1",
    });
    expect(s.discovered).toEqual([{ frm: "r0", to: "r1" }]);
    expect(s.banners[s.banners.length - 1]?.level).toBe("info");
  });

  it("tracks in-flight requests through ack and reject", () => {
    let s = reduce(initialState(), hello());
    s = markSent(s, 1);
    s = markSent(s, 2);
    expect(s.inflight.size).toBe(2);
    s = reduce(s, { v: 1, type: "ack", ref: 1 });
    expect(s.inflight.has(1)).toBe(false);
    expect(s.acked).toBe(1);
    s = reduce(s, {
      v: 1,
      type: "reject",
      ref: 2,
      code: "bad_field",
      detail: "ticks must be >= 1",
    });
    expect(s.inflight.size).toBe(0);
    expect(s.rejected).toBe(1);
    expect(s.banners[s.banners.length - 1]?.text).toContain("bad_field");
  });

  it("disconnecting banners the dropped-input state", () => {
    const s = markDisconnected(reduce(initialState(), hello()));
    expect(s.connected).toBe(false);
    expect(s.banners[s.banners.length - 1]?.text).toContain("dropped");
  });
});

describe("keep-out extraction", () => {
  it("finds plain always-not regions", () => {
    expect(keepOutRegions("[]<>a && []!r5")).toEqual(["r5"]);
  });

  it("finds conditional always-not regions", () => {
    expect(keepOutRegions("[](c -> []!b) && []<>a")).toEqual(["b"]);
  });

  it("handles absence and null", () => {
    expect(keepOutRegions("[]<>a")).toEqual([]);
    expect(keepOutRegions(null)).toEqual([]);
  });
});
