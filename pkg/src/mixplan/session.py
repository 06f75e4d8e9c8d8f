"""Tick-driven coordination of planning, blending and learning.

A session owns the workspace model, the product automaton, the current plan
and the robot position. External events (operator velocity, model edits,
temporary tasks, pause) arrive stamped with the tick index they precede;
given the same scenario and the same stamped events, a session replays to an
identical tick log. All replanning happens at tick boundaries.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    MixplanError,
    NoAcceptingRun,
    NoFeasibleInsertion,
    TraceLiftError,
)
from .irl import learn_beta
from .mixer import mix, step
from .planner import (
    AcceptingRun,
    TempTask,
    insert_temp_task,
    revise,
    synthesize,
    total_cost,
)
from .product import ProductAutomaton, ProductState, trivial_soft_automaton
from .workspace import Scenario, SetEdge, SetLabels, TransitionSystem
from .ltl import translate

HOLD_S = 0.5  # operator input is held this long, then treated as released
DEAD_ZONE = 0.05  # fraction of u_h_max below which input counts as idle


@dataclass(frozen=True)
class TaskState:
    task_id: int
    task: TempTask
    status: str  # "active" | "picked" | "fulfilled" | "rejected"
    delay: float
    delta_cost: float


@dataclass
class SessionEvent:
    tick: int
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"tick": self.tick, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )


def _nullable(v: float) -> Optional[float]:
    return None if math.isinf(v) else v


class Session:
    """Deterministic mixed-initiative run of one scenario."""

    def __init__(self, scenario: Scenario, seed: int = 0):
        self.scenario = scenario
        self.seed = seed
        self.ts: TransitionSystem = scenario.ts
        hard = translate(scenario.phi_hard, aps=scenario.ts.aps)
        if scenario.phi_soft is not None:
            soft = translate(scenario.phi_soft, aps=scenario.ts.aps)
        else:
            soft = trivial_soft_automaton(scenario.ts.aps)
        self.pa = ProductAutomaton(self.ts, hard, soft)
        self.beta = scenario.beta0
        self.t = 0
        self.x = self.ts.centroid_of(self.ts.initial)
        self.history: list[str] = [self.ts.initial]
        self.belief: frozenset[ProductState] = frozenset(
            self.pa.reachable_states([self.ts.initial])
        )
        self.mode = "executing"
        self.run: Optional[AcceptingRun] = None
        self.cursor = 0
        self.paused = False
        self._uh: Optional[tuple[float, float]] = None
        self._uh_tick = -(10**9)
        self._guided = False
        self._guided_start = 0
        self._guided_anchor: Optional[frozenset[ProductState]] = None
        self._tasks: dict[int, TaskState] = {}
        self._next_task_id = 1
        self.events: list[SessionEvent] = []
        self.outputs: list[SessionEvent] = []
        self.tick_log: list[dict] = []
        self._synthesize_initial()

    # ------------------------------------------------------------------
    # External events. Each records itself so a log replay reproduces the
    # session exactly.

    def set_velocity(self, vx: float, vy: float) -> None:
        self._record("set_velocity", {"vx": vx, "vy": vy})
        self._uh = (float(vx), float(vy))
        self._uh_tick = self.t

    def assign_temp_task(
        self, pickup: str, dropoff: str, deadline_s: float
    ) -> TaskState:
        self._record(
            "assign_temp_task",
            {"pickup": pickup, "dropoff": dropoff, "deadline_s": deadline_s},
        )
        task = TempTask(pickup, dropoff, deadline_s, assigned_at=self.sim_time())
        tid = self._next_task_id
        self._next_task_id += 1
        if self.run is None:
            st = TaskState(tid, task, "rejected", math.inf, math.inf)
            self._tasks[tid] = st
            self._emit("task_status", self._task_payload(st))
            return st
        try:
            ins = insert_temp_task(
                self.pa,
                self.run,
                self.cursor,
                task,
                self.beta,
                self.scenario.gamma,
                self.scenario.control.v_max,
                now=self.sim_time(),
            )
        except (NoFeasibleInsertion, ValueError) as e:
            st = TaskState(tid, task, "rejected", math.inf, math.inf)
            self._tasks[tid] = st
            self._emit("task_status", self._task_payload(st, error=str(e)))
            return st
        self.run = ins.run
        self.cursor = 0
        st = TaskState(tid, task, "active", ins.delay, ins.delta_cost)
        self._tasks[tid] = st
        self._emit("task_status", self._task_payload(st))
        self._emit_plan()
        return st

    def edit_model(self, updates) -> bool:
        """Apply workspace edits and replan. Invalid edits are recorded and
        refused without touching the model, so a log replay stays aligned."""
        ups = list(updates) if isinstance(updates, (list, tuple)) else [updates]
        self._record("edit_model", {"updates": [_update_payload(u) for u in ups]})
        try:
            new_ts = self.ts.apply(ups)
        except MixplanError as e:
            self._emit("fault", {"error": str(e), "reason": "model_edit"})
            return False
        self.ts = new_ts
        self.pa = self.pa.with_ts(self.ts)
        self._replan("model_edit")
        return True

    def pause(self) -> None:
        self._record("pause", {})
        self.paused = True

    def resume(self) -> None:
        self._record("resume", {})
        self.paused = False

    # ------------------------------------------------------------------

    def sim_time(self) -> float:
        return self.t * self.scenario.control.dt

    def current_region(self) -> Optional[str]:
        return self.ts.region_at(self.x)

    def planned_next(self) -> Optional[ProductState]:
        if self.run is None:
            return None
        states = self.run.states()
        if self.cursor + 1 < len(states):
            return states[self.cursor + 1]
        return self.run.suffix[0]

    def task_states(self) -> list[TaskState]:
        return [self._tasks[k] for k in sorted(self._tasks)]

    def tick(self) -> dict:
        """Advance one control period. Must not be called while paused."""
        if self.paused:
            msg = "tick while paused"
            raise MixplanError(msg)
        ctrl = self.scenario.control
        stale = (self.t - self._uh_tick) * ctrl.dt > HOLD_S
        uh = None if (self._uh is None or stale) else self._uh

        # A guided segment closes on release or staleness; the region trace
        # covered while guided is the demonstration the learner consumes.
        engaged = uh is not None and math.hypot(*uh) > DEAD_ZONE * ctrl.u_h_max
        if self._guided and not engaged:
            self._guided = False
            self._learn(self.history[self._guided_start:])
        elif not self._guided and engaged:
            self._guided = True
            self._guided_start = len(self.history) - 1
            self._guided_anchor = self.belief

        target = self.planned_next()
        if target is not None:
            goal = self.ts.centroid_of(target.region)
        else:
            cur = self.current_region()
            goal = self.ts.centroid_of(cur) if cur else self.x
        unsafe_ids = self.pa.unsafe_regions(self.belief)
        unsafe = [r for r in self.ts.regions if r.rid in unsafe_ids]
        out = mix(
            self.x,
            goal,
            uh if engaged else None,
            unsafe,
            ctrl.gain,
            ctrl.v_max,
            ctrl.u_h_max,
            self.scenario.d_s,
            self.scenario.eps_buffer,
        )
        self.x = step(self.x, out.u, ctrl.dt)
        self.t += 1

        entered = self.ts.region_at(self.x)
        if entered is not None and entered != self.history[-1]:
            self._on_region_entry(entered)

        rec = {
            "t": self.t,
            "x": [self.x[0], self.x[1]],
            "u": [out.u[0], out.u[1]],
            "u_r": [out.u_r[0], out.u_r[1]],
            "u_h": [uh[0], uh[1]] if (uh is not None and engaged) else [0.0, 0.0],
            "kappa": out.kappa,
            "d_t": _nullable(out.d_t),
            "region": entered,
            "cursor": self.cursor,
            "beta": self.beta,
            "mode": self.mode,
        }
        self.tick_log.append(rec)
        return rec

    # ------------------------------------------------------------------

    def _synthesize_initial(self) -> None:
        try:
            self.run = synthesize(self.pa, self.beta, self.scenario.gamma)
            self.cursor = 0
            self.mode = "executing"
            self._emit_plan()
        except NoAcceptingRun as e:
            self.run = None
            self.mode = "repairing"
            self._emit("fault", {"error": str(e), "reason": "synthesis"})

    def _replan(self, reason: str) -> None:
        try:
            self.run = revise(self.pa, self.belief, self.beta, self.scenario.gamma)
            self.cursor = 0
            self.mode = "executing"
            self._emit_plan(reason=reason)
        except NoAcceptingRun as e:
            self.run = None
            self.mode = "repairing"
            self._emit("fault", {"error": str(e), "reason": reason})

    def _learn(self, trace: list[str]) -> None:
        if len(trace) < 2:
            return
        try:
            res = learn_beta(
                self.pa, trace, self.beta, self.scenario.irl,
                anchor=self._guided_anchor,
            )
        except TraceLiftError as e:
            self._emit("fault", {"error": str(e), "reason": "learning"})
            return
        old = self.beta
        self.beta = res.beta
        self._emit(
            "beta_updated",
            {
                "old": old,
                "new": self.beta,
                "history": [old] + [st.beta for st in res.steps],
                "iterations": len(res.steps),
                "converged": res.converged,
            },
        )
        self._replan("beta_updated")

    def _on_region_entry(self, entered: str) -> None:
        prev = self.history[-1]
        if math.isinf(self.ts.weight(prev, entered)):
            # The operator proved this passage exists; record it in the model.
            self.ts = self.ts.apply(SetEdge(prev, entered, True))
            self.pa = self.pa.with_ts(self.ts)
            self._emit("model_discovered", {"frm": prev, "to": entered})
        nxt = self.pa.step_belief(self.belief, entered)
        self.history.append(entered)
        if not nxt:
            self.belief = frozenset()
            self.mode = "repairing"
            self.run = None
            self._emit("fault", {"error": "belief collapsed", "reason": "entry"})
            return
        self.belief = frozenset(nxt)
        self._advance_tasks(entered)

        target = self.planned_next()
        if target is not None and entered == target.region:
            states = self.run.states()
            self.cursor += 1
            if self.cursor >= len(states):
                self.cursor = len(self.run.prefix)
        else:
            self._replan("off_plan")

    def _advance_tasks(self, entered: str) -> None:
        for tid in sorted(self._tasks):
            st = self._tasks[tid]
            if st.status == "active" and entered == st.task.pickup:
                self._tasks[tid] = TaskState(
                    tid, st.task, "picked", st.delay, st.delta_cost
                )
                self._emit("task_status", self._task_payload(self._tasks[tid]))
            elif st.status == "picked" and entered == st.task.dropoff:
                lateness = self.sim_time() - (
                    st.task.assigned_at + st.task.deadline_s
                )
                self._tasks[tid] = TaskState(
                    tid, st.task, "fulfilled", lateness, st.delta_cost
                )
                self._emit("task_status", self._task_payload(self._tasks[tid]))

    # ------------------------------------------------------------------

    def _record(self, kind: str, payload: dict) -> None:
        self.events.append(SessionEvent(self.t, kind, payload))

    def _emit(self, kind: str, payload: dict) -> None:
        self.outputs.append(SessionEvent(self.t, kind, payload))

    def _emit_plan(self, reason: str = "synthesized") -> None:
        assert self.run is not None
        pre, suf = self.run.regions()
        self._emit(
            "plan_changed",
            {
                "reason": reason,
                "prefix": list(pre),
                "suffix": list(suf),
                "cost": total_cost(self.run, self.beta, self.scenario.gamma),
                "beta": self.beta,
            },
        )

    def _task_payload(self, st: TaskState, error: Optional[str] = None) -> dict:
        p = {
            "task_id": st.task_id,
            "pickup": st.task.pickup,
            "dropoff": st.task.dropoff,
            "deadline_s": st.task.deadline_s,
            "status": st.status,
            "delay": _nullable(st.delay),
            "delta_cost": _nullable(st.delta_cost),
        }
        if error:
            p["error"] = error
        return p


def _update_payload(u) -> dict:
    if isinstance(u, SetEdge):
        return {
            "kind": "SetEdge",
            "frm": u.frm,
            "to": u.to,
            "present": u.present,
            "weight": u.weight,
            "both": u.both,
        }
    if isinstance(u, SetLabels):
        return {
            "kind": "SetLabels",
            "region": u.region,
            "labels": sorted(u.labels),
        }
    msg = f"unknown update {u!r}"
    raise MixplanError(msg)


def parse_update(u: dict):
    if u.get("kind") == "SetEdge":
        return SetEdge(
            u["frm"],
            u["to"],
            bool(u["present"]),
            u.get("weight"),
            bool(u.get("both", False)),
        )
    if u.get("kind") == "SetLabels":
        return SetLabels(u["region"], frozenset(u["labels"]))
    msg = f"unknown update kind {u.get('kind')!r}"
    raise MixplanError(msg)


def _event_dict(e) -> dict:
    if isinstance(e, SessionEvent):
        return {"tick": e.tick, "kind": e.kind, "payload": e.payload}
    return e


def replay(
    scenario: Scenario, events: Sequence[dict], ticks: int, seed: int = 0
) -> Session:
    """Rebuild a session from recorded external events. Each event carries
    the tick index at which it was accepted; the clock is frozen while the
    session is paused, exactly as in live operation, so the rebuilt tick log
    matches the original byte for byte."""
    s = Session(scenario, seed)
    for e in events:
        e = _event_dict(e)
        et = int(e["tick"])
        while s.t < et and not s.paused:
            s.tick()
        if s.t != et:
            msg = f"event at tick {et} does not line up with the clock at {s.t}"
            raise MixplanError(msg)
        apply_event(s, e)
    while s.t < ticks and not s.paused:
        s.tick()
    return s


def apply_event(s: Session, e: dict) -> None:
    e = _event_dict(e)
    kind = e["kind"]
    p = e.get("payload", {})
    if kind == "set_velocity":
        s.set_velocity(p["vx"], p["vy"])
    elif kind == "assign_temp_task":
        s.assign_temp_task(p["pickup"], p["dropoff"], p["deadline_s"])
    elif kind == "edit_model":
        s.edit_model([parse_update(u) for u in p["updates"]])
    elif kind == "pause":
        s.pause()
    elif kind == "resume":
        s.resume()
    else:
        msg = f"unknown event kind {kind!r}"
        raise MixplanError(msg)
