"""Network face of the coordinator: one WebSocket, JSON messages.

Each connection owns a private session. Inbound messages either pass
structural validation and are applied at a tick boundary, or are rejected
with a coded error without touching the session. Outbound traffic is the
session's own event stream plus a state snapshot per broadcast period.

Two clock modes exist. In the default mode a background task paces the
simulation against the wall clock and broadcasts at a fixed rate. In
lockstep mode time only advances when the client sends an explicit step
request, which makes scripted end-to-end tests deterministic.
"""
from __future__ import annotations

import asyncio
import json
import math
import os
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .errors import MixplanError
from .session import Session, SessionEvent, parse_update
from .workspace import Scenario, scenario_to_dict

PROTOCOL_VERSION = 1
MAX_STEP_TICKS = 20_000


def _plan_dict(sess: Session) -> Optional[dict]:
    if sess.run is None:
        return None
    pre, suf = sess.run.regions()
    return {"prefix": list(pre), "suffix": list(suf)}


def state_tick_message(sess: Session) -> dict:
    """Snapshot of everything the cockpit renders every frame."""
    rec = sess.tick_log[-1] if sess.tick_log else None
    return {
        "v": PROTOCOL_VERSION,
        "type": "state_tick",
        "t": sess.t,
        "sim_time": sess.sim_time(),
        "x": [sess.x[0], sess.x[1]],
        "u": rec["u"] if rec else [0.0, 0.0],
        "u_r": rec["u_r"] if rec else [0.0, 0.0],
        "u_h": rec["u_h"] if rec else [0.0, 0.0],
        "kappa": rec["kappa"] if rec else 1.0,
        "d_t": rec["d_t"] if rec else None,
        "region": rec["region"] if rec else sess.current_region(),
        "plan": _plan_dict(sess),
        "cursor": sess.cursor,
        "beta": sess.beta,
        "mode": sess.mode,
        "paused": sess.paused,
    }


def output_message(ev: SessionEvent) -> dict:
    """Translate one session output event to its wire form."""
    p = ev.payload
    if ev.kind == "plan_changed":
        return {
            "v": PROTOCOL_VERSION,
            "type": "plan_changed",
            "tick": ev.tick,
            "reason": p["reason"],
            "plan": {"prefix": p["prefix"], "suffix": p["suffix"]},
            "cost": p["cost"],
            "beta": p["beta"],
        }
    if ev.kind == "beta_updated":
        return {
            "v": PROTOCOL_VERSION,
            "type": "beta_updated",
            "tick": ev.tick,
            "old": p["old"],
            "new": p["new"],
            "history": p["history"],
            "iterations": p["iterations"],
            "converged": p["converged"],
        }
    if ev.kind == "task_status":
        msg = {
            "v": PROTOCOL_VERSION,
            "type": "task_status",
            "tick": ev.tick,
            "task_id": p["task_id"],
            "pickup": p["pickup"],
            "dropoff": p["dropoff"],
            "deadline_s": p["deadline_s"],
            "status": p["status"],
            "predicted_delay": p["delay"],
            "delta_cost": p["delta_cost"],
        }
        if "error" in p:
            msg["error"] = p["error"]
        return msg
    if ev.kind == "fault":
        return {
            "v": PROTOCOL_VERSION,
            "type": "fault",
            "tick": ev.tick,
            "code": p.get("reason", "runtime"),
            "detail": p["error"],
        }
    if ev.kind == "model_discovered":
        return {
            "v": PROTOCOL_VERSION,
            "type": "model_discovered",
            "tick": ev.tick,
            "frm": p["frm"],
            "to": p["to"],
        }
    return {
        "v": PROTOCOL_VERSION,
        "type": ev.kind,
        "tick": ev.tick,
        "payload": p,
    }


def _hello_message(sess: Session, lockstep: bool, tick_hz: float) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "type": "hello",
        "scenario": scenario_to_dict(sess.scenario),
        "lockstep": lockstep,
        "tick_hz": tick_hz,
        "dt": sess.scenario.control.dt,
        "tasks": [output_message(SessionEvent(sess.t, "task_status",
                                              sess._task_payload(ts)))
                  for ts in sess.task_states()],
        "state": state_tick_message(sess),
    }


class _Rejection(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


def _need_number(msg: dict, key: str) -> float:
    v = msg.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise _Rejection("bad_field", f"{key} must be a finite number")
    return float(v)


def _need_region(sess: Session, msg: dict, key: str) -> str:
    v = msg.get(key)
    if not isinstance(v, str) or not sess.ts.has_region(v):
        raise _Rejection("unknown_region", f"{key} {v!r} is not a region id")
    return v


def _apply_inbound(sess: Session, msg: dict, lockstep: bool) -> int:
    """Validate and apply one client message; returns ticks to advance
    (only ever nonzero for lockstep step requests)."""
    mtype = msg.get("type")
    if mtype == "set_velocity":
        vx = _need_number(msg, "vx")
        vy = _need_number(msg, "vy")
        sess.set_velocity(vx, vy)
        return 0
    if mtype == "assign_temp_task":
        pickup = _need_region(sess, msg, "pickup")
        dropoff = _need_region(sess, msg, "dropoff")
        deadline = _need_number(msg, "deadline_s")
        if deadline <= 0.0:
            raise _Rejection("bad_deadline", "deadline_s must be positive")
        sess.assign_temp_task(pickup, dropoff, deadline)
        return 0
    if mtype == "edit_model":
        updates = msg.get("updates")
        if not isinstance(updates, list) or not updates:
            raise _Rejection("bad_field", "updates must be a non-empty list")
        try:
            parsed = [parse_update(u) for u in updates]
        except (MixplanError, KeyError, TypeError) as e:
            raise _Rejection("bad_update", str(e)) from None
        for u in parsed:
            for rid in ([u.frm, u.to] if hasattr(u, "frm") else [u.region]):
                if not sess.ts.has_region(rid):
                    raise _Rejection("unknown_region", f"{rid!r} is not a region id")
        sess.edit_model(parsed)
        return 0
    if mtype == "pause":
        sess.pause()
        return 0
    if mtype == "resume":
        sess.resume()
        return 0
    if mtype == "step":
        if not lockstep:
            raise _Rejection("not_lockstep", "step is only valid in lockstep mode")
        ticks = msg.get("ticks", 1)
        if not isinstance(ticks, int) or isinstance(ticks, bool) or ticks < 1:
            raise _Rejection("bad_field", "ticks must be a positive integer")
        if ticks > MAX_STEP_TICKS:
            raise _Rejection("bad_field", f"ticks must be <= {MAX_STEP_TICKS}")
        if sess.paused:
            raise _Rejection("paused", "cannot step while paused")
        return ticks
    raise _Rejection("unknown_type", f"unknown message type {mtype!r}")


def _dump_logs(sess: Session, log_dir: str) -> None:
    d = Path(log_dir)
    d.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    path = d / f"session-{stamp}-{os.getpid()}-{id(sess) & 0xFFFF:04x}.jsonl"
    with path.open("w") as f:
        meta = {
            "kind": "meta",
            "scenario": scenario_to_dict(sess.scenario),
            "seed": sess.seed,
            "ticks": sess.t,
        }
        f.write(json.dumps(meta, sort_keys=True) + "\n")
        for e in sess.events:
            f.write(e.to_json() + "\n")


def create_app(
    scenario: Scenario,
    *,
    seed: int = 0,
    lockstep: bool = False,
    tick_hz: float = 20.0,
    static_dir: Optional[str] = None,
) -> FastAPI:
    if tick_hz <= 0.0:
        msg = "tick_hz must be positive"
        raise MixplanError(msg)
    app = FastAPI()
    period = 1.0 / tick_hz
    ticks_per_period = max(1, round(period / scenario.control.dt))

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        sess = Session(scenario, seed)
        lock = asyncio.Lock()
        sent = 0

        async def drain() -> None:
            nonlocal sent
            while sent < len(sess.outputs):
                await ws.send_json(output_message(sess.outputs[sent]))
                sent += 1

        async def ticker() -> None:
            next_at = time.monotonic() + period
            while True:
                delay = next_at - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                next_at += period
                async with lock:
                    if not sess.paused:
                        for _ in range(ticks_per_period):
                            sess.tick()
                    await drain()
                    await ws.send_json(state_tick_message(sess))

        task = None if lockstep else asyncio.create_task(ticker())
        try:
            async with lock:
                await ws.send_json(_hello_message(sess, lockstep, tick_hz))
                await drain()
            while True:
                raw = await ws.receive_text()
                rej: Optional[_Rejection] = None
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as e:
                    msg = None
                    rej = _Rejection("bad_json", str(e))
                if not isinstance(msg, dict):
                    msg = {}
                    if rej is None:
                        rej = _Rejection("bad_json", "message must be an object")
                ref = msg.get("seq")
                async with lock:
                    ticks = 0
                    if rej is None:
                        try:
                            ticks = _apply_inbound(sess, msg, lockstep)
                        except _Rejection as e:
                            rej = e
                    if rej is not None:
                        await ws.send_json(
                            {
                                "v": PROTOCOL_VERSION,
                                "type": "reject",
                                "ref": ref,
                                "code": rej.code,
                                "detail": rej.detail,
                            }
                        )
                        continue
                    for _ in range(ticks):
                        sess.tick()
                    await ws.send_json(
                        {"v": PROTOCOL_VERSION, "type": "ack", "ref": ref}
                    )
                    await drain()
                    if ticks or sess.paused:
                        await ws.send_json(state_tick_message(sess))
        except WebSocketDisconnect:
            pass
        finally:
            if task is not None:
                task.cancel()
            log_dir = os.environ.get("MIXPLAN_LOG_DIR")
            if log_dir:
                _dump_logs(sess, log_dir)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(
    scenario: Scenario,
    *,
    host: str = "127.0.0.1",
    port: int = 8765,
    seed: int = 0,
    lockstep: bool = False,
    tick_hz: float = 20.0,
    static_dir: Optional[str] = None,
) -> None:
    import uvicorn

    app = create_app(
        scenario,
        seed=seed,
        lockstep=lockstep,
        tick_hz=tick_hz,
        static_dir=static_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")
