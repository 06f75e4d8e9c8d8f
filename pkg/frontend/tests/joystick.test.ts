import { describe, expect, it } from "vitest";

import {
  DEAD_ZONE,
  JoystickEmitter,
  MAX_RATE_HZ,
  stickToVelocity,
} from "../src/joystick";
import type { Vec2 } from "../src/protocol";

const UH = 1.5;

describe("stick mapping", () => {
  it("maps the centered stick to zero", () => {
    expect(stickToVelocity(0, 0, UH)).toEqual([0, 0]);
  });

  it("maps the square's edges to +-u_h_max per axis", () => {
    expect(stickToVelocity(1, 0, UH)).toEqual([UH, 0]);
    expect(stickToVelocity(-1, 0, UH)).toEqual([-UH, 0]);
    expect(stickToVelocity(0, 1, UH)).toEqual([0, UH]);
    expect(stickToVelocity(0, -1, UH)).toEqual([0, -UH]);
    expect(stickToVelocity(1, -1, UH)).toEqual([UH, -UH]);
  });

  it("clamps out-of-range input to the edge", () => {
    expect(stickToVelocity(2.4, -7, UH)).toEqual([UH, -UH]);
  });

  it("zeroes each axis inside the dead zone independently", () => {
    expect(stickToVelocity(DEAD_ZONE - 0.01, 0.9, UH)).toEqual([0, 0.9 * UH]);
    expect(stickToVelocity(-0.04, 0.04, UH)).toEqual([0, 0]);
  });

  it("scales linearly between dead zone and edge", () => {
    expect(stickToVelocity(0.5, 0, UH)).toEqual([0.5 * UH, 0]);
  });

  it("treats non-finite input as centered", () => {
    expect(stickToVelocity(Number.NaN, Infinity, UH)).toEqual([0, 0]);
  });
});

function makeEmitter(rateHz?: number) {
  let t = 0;
  const sent: Vec2[] = [];
  const em = new JoystickEmitter(UH, (v) => sent.push(v), {
    now: () => t,
    rateHz,
  });
  return {
    em,
    sent,
    advance: (ms: number) => {
      t += ms;
    },
  };
}

describe("rate-limited emitter", () => {
  it("forwards the first sample immediately", () => {
    const { em, sent } = makeEmitter();
    em.move(1, 0);
    expect(sent).toEqual([[UH, 0]]);
  });

  it("suppresses samples inside the rate window and flushes the trailing one", () => {
    const { em, sent, advance } = makeEmitter();
    em.move(1, 0);
    advance(10);
    em.move(0.5, 0);
    em.flush();
    expect(sent).toHaveLength(1);
    advance(41);
    em.flush();
    expect(sent).toEqual([
      [UH, 0],
      [0.5 * UH, 0],
    ]);
  });

  it("never exceeds the configured rate under a message storm", () => {
    const { em, sent, advance } = makeEmitter();
    for (let i = 0; i < 1000; i++) {
      em.move(Math.sin(i / 50), 0.3);
      advance(1); // 1000 samples over one second
    }
    expect(sent.length).toBeLessThanOrEqual(MAX_RATE_HZ + 1);
  });

  it("release always emits a final zero immediately", () => {
    const { em, sent } = makeEmitter();
    em.move(1, 1); // consumes the rate slot
    em.release(); // must not be suppressed
    expect(sent[sent.length - 1]).toEqual([0, 0]);
  });

  it("release drops any pending suppressed sample", () => {
    const { em, sent, advance } = makeEmitter();
    em.move(1, 0);
    advance(5);
    em.move(0.7, 0.7);
    em.release();
    advance(1000);
    em.flush();
    expect(sent).toEqual([
      [UH, 0],
      [0, 0],
    ]);
  });
});
