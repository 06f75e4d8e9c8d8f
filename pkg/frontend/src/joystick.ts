/**
 * Virtual joystick: maps a unit-square pointer/key position to an operator
 * velocity and throttles emission. Pure mapping kept separate from the
 * stateful emitter so the contract is unit-testable.
 */

import type { Vec2 } from "./protocol";

export const DEAD_ZONE = 0.05;
export const MAX_RATE_HZ = 20;

/**
 * Map normalized stick coordinates (each axis in [-1, 1], center 0) to a
 * velocity in [-u_h_max, u_h_max]^2. Inputs inside the dead zone map to
 * zero per axis; out-of-range inputs clamp to the square's edge.
 */
export function stickToVelocity(
  nx: number,
  ny: number,
  uhMax: number,
): Vec2 {
  const axis = (v: number): number => {
    if (!Number.isFinite(v)) return 0;
    const c = Math.max(-1, Math.min(1, v));
    if (Math.abs(c) < DEAD_ZONE) return 0;
    return c * uhMax;
  };
  return [axis(nx), axis(ny)];
}

export interface EmitterOptions {
  /** injectable clock (ms) so tests control time */
  now?: () => number;
  rateHz?: number;
}

/**
 * Rate-limited velocity emitter. move() forwards at most one message per
 * 1/rate interval (trailing value wins on the next allowed slot via
 * flush()); release() always emits a final zero-velocity message
 * immediately, bypassing the rate limit, so the robot never keeps a stale
 * operator command.
 */
export class JoystickEmitter {
  private lastSent = -Infinity;
  private pending: Vec2 | null = null;
  private readonly minGapMs: number;
  private readonly now: () => number;

  constructor(
    private readonly uhMax: number,
    private readonly send: (v: Vec2) => void,
    opts: EmitterOptions = {},
  ) {
    this.now = opts.now ?? (() => performance.now());
    this.minGapMs = 1000 / (opts.rateHz ?? MAX_RATE_HZ);
  }

  move(nx: number, ny: number): void {
    const v = stickToVelocity(nx, ny, this.uhMax);
    const t = this.now();
    if (t - this.lastSent >= this.minGapMs) {
      this.lastSent = t;
      this.pending = null;
      this.send(v);
    } else {
      this.pending = v;
    }
  }

  /** Emit the most recent suppressed sample if the rate limit now allows. */
  flush(): void {
    if (this.pending === null) return;
    const t = this.now();
    if (t - this.lastSent >= this.minGapMs) {
      this.lastSent = t;
      const v = this.pending;
      this.pending = null;
      this.send(v);
    }
  }

  release(): void {
    this.pending = null;
    this.lastSent = this.now();
    this.send([0, 0]);
  }
}
