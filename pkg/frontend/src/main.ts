/**
 * Browser bootstrap: owns the websocket, folds messages into the state,
 * repaints the view container, and forwards operator input (joystick pad,
 * task form, model edits, clock controls).
 */

import { Sender } from "./client";
import { JoystickEmitter } from "./joystick";
import { parseServerMsg } from "./protocol";
import { render } from "./render";
import {
  initialState,
  markDisconnected,
  markSent,
  reduce,
  type CockpitState,
} from "./state";

const view = document.getElementById("view")!;
const controls = document.getElementById("controls") as HTMLElement;
const pad = document.getElementById("pad") as HTMLElement;
const knob = document.getElementById("knob") as HTMLElement;

let state: CockpitState = initialState();
let repaintQueued = false;

function apply(next: CockpitState): void {
  state = next;
  if (!repaintQueued) {
    repaintQueued = true;
    requestAnimationFrame(() => {
      repaintQueued = false;
      view.innerHTML = render(state);
    });
  }
}

const proto = location.protocol === "https:" ? "wss" : "ws";
const socket = new WebSocket(`${proto}://${location.host}/ws`);
const sender = new Sender(
  socket,
  (seq) => apply(markSent(state, seq)),
  () => apply(markDisconnected(state)),
);

let stick: JoystickEmitter | null = null;
let flusher: number | null = null;

socket.onmessage = (ev) => {
  const msg = parseServerMsg(String(ev.data));
  const hadScenario = state.scenario !== null;
  apply(reduce(state, msg));
  if (!hadScenario && state.scenario) {
    onHello();
  }
};

socket.onclose = () => {
  apply(markDisconnected(state));
  if (flusher !== null) clearInterval(flusher);
};

function fillRegionSelects(): void {
  const ids = state.scenario!.regions.map((r) => r.id);
  for (const sel of controls.querySelectorAll<HTMLSelectElement>(
    "select[data-regions]",
  )) {
    sel.innerHTML = ids
      .map((id) => `<option value="${id}">${id}</option>`)
      .join("");
  }
}

function onHello(): void {
  const sc = state.scenario!;
  controls.hidden = false;
  fillRegionSelects();
  stick = new JoystickEmitter(sc.controller.u_h_max, ([vx, vy]) =>
    sender.setVelocity(vx, vy),
  );
  // forward trailing suppressed samples at the allowed rate
  flusher = window.setInterval(() => stick?.flush(), 25);
  const lockstepRow = document.getElementById("lockstep-row")!;
  lockstepRow.hidden = !state.lockstep;
}

// ---- joystick pad ---------------------------------------------------------

function padNorm(ev: PointerEvent): [number, number] {
  const r = pad.getBoundingClientRect();
  const nx = ((ev.clientX - r.left) / r.width) * 2 - 1;
  // screen y grows down; world y grows up
  const ny = -(((ev.clientY - r.top) / r.height) * 2 - 1);
  return [nx, ny];
}

let dragging = false;

pad.addEventListener("pointerdown", (ev) => {
  dragging = true;
  pad.setPointerCapture(ev.pointerId);
  const [nx, ny] = padNorm(ev);
  moveKnob(nx, ny);
  stick?.move(nx, ny);
});
pad.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const [nx, ny] = padNorm(ev);
  moveKnob(nx, ny);
  stick?.move(nx, ny);
});
const end = () => {
  if (!dragging) return;
  dragging = false;
  moveKnob(0, 0);
  stick?.release();
};
pad.addEventListener("pointerup", end);
pad.addEventListener("pointercancel", end);

function moveKnob(nx: number, ny: number): void {
  const cx = Math.max(-1, Math.min(1, nx));
  const cy = Math.max(-1, Math.min(1, ny));
  knob.style.left = `${50 + cx * 40}%`;
  knob.style.top = `${50 - cy * 40}%`;
}

// arrow keys drive the same emitter
const held = new Set<string>();
const ARROWS: Record<string, [number, number]> = {
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
};

function keyVector(): [number, number] {
  let nx = 0;
  let ny = 0;
  for (const k of held) {
    const d = ARROWS[k];
    if (d) {
      nx += d[0];
      ny += d[1];
    }
  }
  return [nx, ny];
}

window.addEventListener("keydown", (ev) => {
  if (!(ev.key in ARROWS) || ev.repeat) return;
  if (ev.target instanceof HTMLInputElement) return;
  held.add(ev.key);
  const [nx, ny] = keyVector();
  moveKnob(nx, ny);
  stick?.move(nx, ny);
  ev.preventDefault();
});
window.addEventListener("keyup", (ev) => {
  if (!(ev.key in ARROWS)) return;
  held.delete(ev.key);
  const [nx, ny] = keyVector();
  moveKnob(nx, ny);
  if (held.size === 0) stick?.release();
  else stick?.move(nx, ny);
});

// ---- forms ----------------------------------------------------------------

function val(id: string): string {
  return (document.getElementById(id) as HTMLInputElement | HTMLSelectElement)
    .value;
}

document.getElementById("task-form")!.addEventListener("submit", (ev) => {
  ev.preventDefault();
  sender.assignTempTask(
    val("task-pickup"),
    val("task-dropoff"),
    Number(val("task-deadline")),
  );
});

document.getElementById("edge-form")!.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const present = (document.getElementById("edge-present") as HTMLInputElement)
    .checked;
  const update: Parameters<Sender["editModel"]>[0][number] = {
    kind: "SetEdge",
    frm: val("edge-from"),
    to: val("edge-to"),
    present,
    both: true,
  };
  const w = val("edge-weight").trim();
  if (present && w !== "") update.weight = Number(w);
  sender.editModel([update]);
});

document.getElementById("labels-form")!.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const labels = val("labels-value")
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s !== "");
  sender.editModel([
    { kind: "SetLabels", region: val("labels-region"), labels },
  ]);
});

document.getElementById("btn-pause")!.addEventListener("click", () => {
  sender.pause();
});
document.getElementById("btn-resume")!.addEventListener("click", () => {
  sender.resume();
});
document.getElementById("btn-step")!.addEventListener("click", () => {
  sender.step(Number(val("step-ticks")) || 1);
});

apply(state);
