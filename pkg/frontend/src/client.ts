/**
 * Socket wiring: a thin typed sender with monotonically increasing seq
 * numbers. All displayed facts flow back through the reducer; the client
 * never updates view state optimistically.
 */

import type { ClientMsg, ModelUpdate } from "./protocol";
import { PROTOCOL_VERSION } from "./protocol";

export interface SocketLike {
  send(data: string): void;
  readyState: number;
}

const OPEN = 1;

/** Omit that distributes over each union member instead of collapsing
 * the union to its common keys. */
type Body<M> = M extends ClientMsg ? Omit<M, "v" | "seq"> : never;

export class Sender {
  private seq = 0;

  constructor(
    private readonly socket: SocketLike,
    private readonly onSent?: (seq: number) => void,
    private readonly onDropped?: () => void,
  ) {}

  private post(body: Body<ClientMsg>): number | null {
    if (this.socket.readyState !== OPEN) {
      this.onDropped?.();
      return null;
    }
    this.seq += 1;
    const msg = { v: PROTOCOL_VERSION, seq: this.seq, ...body };
    this.socket.send(JSON.stringify(msg));
    this.onSent?.(this.seq);
    return this.seq;
  }

  setVelocity(vx: number, vy: number): number | null {
    return this.post({ type: "set_velocity", vx, vy });
  }

  assignTempTask(
    pickup: string,
    dropoff: string,
    deadlineS: number,
  ): number | null {
    return this.post({
      type: "assign_temp_task",
      pickup,
      dropoff,
      deadline_s: deadlineS,
    });
  }

  editModel(updates: ModelUpdate[]): number | null {
    return this.post({ type: "edit_model", updates });
  }

  pause(): number | null {
    return this.post({ type: "pause" });
  }

  resume(): number | null {
    return this.post({ type: "resume" });
  }

  step(ticks: number): number | null {
    return this.post({ type: "step", ticks });
  }
}
