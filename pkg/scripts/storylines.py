"""Closed-loop operator scripts for the two bundled scenarios.

Each storyline drives a live session the way a human at the cockpit would:
velocity commands are recomputed every tick from the robot's current
position, so the whole run stays deterministic and can be replayed from the
recorded event log alone. The run functions assert their narrative along
the way and return the finished session.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from mixplan.session import Session, replay
from mixplan.workspace import Scenario, SetEdge, load_scenario, scenario_to_dict


def steer(sess: Session, target: tuple[float, float]) -> tuple[float, float]:
    """Full-authority pull toward a fixed point, recomputed per tick."""
    uhm = sess.scenario.control.u_h_max
    dx = target[0] - sess.x[0]
    dy = target[1] - sess.x[1]
    n = math.hypot(dx, dy)
    if n < 1e-9:
        return (0.0, 0.0)
    return (uhm * dx / n, uhm * dy / n)


def tick_log_lines(sess: Session) -> list[str]:
    return [json.dumps(rec, sort_keys=True) for rec in sess.tick_log]


def tick_log_digest(sess: Session) -> str:
    h = hashlib.sha256()
    for line in tick_log_lines(sess):
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def save_logs(sess: Session, events_path: str | Path, digest_path: str | Path) -> None:
    events_path = Path(events_path)
    events_path.parent.mkdir(parents=True, exist_ok=True)
    with events_path.open("w") as f:
        meta = {
            "kind": "meta",
            "scenario": scenario_to_dict(sess.scenario),
            "seed": sess.seed,
            "ticks": sess.t,
        }
        f.write(json.dumps(meta, sort_keys=True) + "\n")
        for e in sess.events:
            f.write(e.to_json() + "\n")
    Path(digest_path).write_text(tick_log_digest(sess) + "\n")


def assert_replay_identical(sess: Session) -> None:
    again = replay(sess.scenario, list(sess.events), sess.t, seed=sess.seed)
    if tick_log_lines(again) != tick_log_lines(sess):
        msg = "replay of the recorded events diverged from the live run"
        raise AssertionError(msg)


def _kappa_band_ok(sess: Session) -> bool:
    d_s = sess.scenario.d_s
    eps = sess.scenario.eps_buffer
    for rec in sess.tick_log:
        d_t = rec["d_t"]
        if d_t is None:
            if rec["kappa"] != 1.0:
                return False
            continue
        if d_t <= d_s and rec["kappa"] != 0.0:
            return False
        if d_t >= d_s + eps and rec["kappa"] != 1.0:
            return False
    return True


def run_case_one(sc: Scenario, total_ticks: int = 6000) -> Session:
    """Corridor demonstration, preference drop, adversarial push.

    The operator drags the robot through the penalized c4 hall to the top
    corridor and lets go; the learner lowers beta and the revised plan
    adopts the shortcut. Afterwards the operator shoves the robot straight
    at the forbidden r5 bay for twenty seconds; the authority gate and the
    projected autonomy keep it out.
    """
    sess = Session(sc)
    ts = sc.ts
    beta0 = sess.beta
    c4 = ts.centroid_of("c4")
    r6 = ts.centroid_of("r6")
    r5 = ts.centroid_of("r5")
    phase = "to_c4"
    push_until = -1
    while sess.t < total_ticks:
        cur = sess.history[-1]
        if phase == "to_c4":
            if cur == "c4":
                phase = "to_r6"
            else:
                sess.set_velocity(*steer(sess, c4))
        if phase == "to_r6":
            if cur == "r6":
                phase = "watch_learn"
                sess.set_velocity(0.0, 0.0)
            else:
                sess.set_velocity(*steer(sess, r6))
        elif phase == "watch_learn":
            if any(e.kind == "beta_updated" for e in sess.outputs):
                phase = "push_r5"
                push_until = sess.t + 1400
        elif phase == "push_r5":
            if sess.t >= push_until:
                phase = "coast"
                sess.set_velocity(0.0, 0.0)
            else:
                sess.set_velocity(*steer(sess, r5))
        sess.tick()

    assert phase == "coast", f"storyline stalled in phase {phase!r}"
    assert sess.mode == "executing"

    updates = [e for e in sess.outputs if e.kind == "beta_updated"]
    assert updates, "no learning happened"
    first = updates[0].payload
    assert first["new"] < first["old"], "beta should drop after the corridor demo"
    assert sess.beta < beta0

    pre, suf = sess.run.regions()
    assert "c4" in suf, f"revised plan must adopt the corridor: {suf}"

    assert "r5" not in sess.history, "forbidden bay was entered"
    assert _kappa_band_ok(sess), "authority gate band violated"
    d_ts = [r["d_t"] for r in sess.tick_log if r["d_t"] is not None]
    assert d_ts and min(d_ts) > 0.0, "safety margin collapsed"
    assert min(d_ts) <= sc.d_s + sc.eps_buffer, "push never reached the gate band"

    assert_replay_identical(sess)
    return sess


def run_case_two(sc: Scenario, total_ticks: int = 9000) -> Session:
    """Temp task under deadline, clean demonstration, corridor closure.

    A pickup-and-delivery task lands mid-patrol and is worked off before
    its deadline. The operator then demonstrates the long way around that
    keeps out of the c2 hall; the learner raises beta. Finally the operator
    closes c2 outright and the plan reroutes through the c1 hall.
    """
    sess = Session(sc)
    ts = sc.ts
    beta0 = sess.beta
    demo_route = ("r2", "r1", "c1", "r6", "r7", "r8")
    demo_i = 0
    phase = "await_assign"
    while sess.t < total_ticks:
        cur = sess.history[-1]
        if phase == "await_assign" and sess.t == 100:
            st = sess.assign_temp_task("r1", "r7", 120.0)
            assert st.status == "active", f"task rejected: {st}"
            assert st.delay <= 0.0, "insertion should fit inside the deadline"
            phase = "await_fulfilled"
        elif phase == "await_fulfilled":
            if sess.task_states()[0].status == "fulfilled":
                phase = "await_r3"
        elif phase == "await_r3":
            if cur == "r3":
                phase = "demo"
        if phase == "demo":
            while demo_i < len(demo_route) and cur == demo_route[demo_i]:
                demo_i += 1
            if demo_i == len(demo_route):
                phase = "await_beta"
                sess.set_velocity(0.0, 0.0)
            else:
                sess.set_velocity(*steer(sess, ts.centroid_of(demo_route[demo_i])))
        elif phase == "await_beta":
            if any(e.kind == "beta_updated" for e in sess.outputs):
                phase = "block"
        elif phase == "block":
            ok = sess.edit_model(
                [
                    SetEdge("r3", "c2", False, both=True),
                    SetEdge("c2", "r8", False, both=True),
                ]
            )
            assert ok, "closing the hall must be a valid edit"
            phase = "coast"
        sess.tick()

    assert phase == "coast", f"storyline stalled in phase {phase!r}"
    assert sess.mode == "executing"

    task = sess.task_states()[0]
    assert task.status == "fulfilled"
    assert task.delay <= 0.0, f"task finished late by {task.delay:.1f}s"

    updates = [e for e in sess.outputs if e.kind == "beta_updated"]
    assert updates, "no learning happened"
    first = updates[0].payload
    assert first["new"] > first["old"], "beta should rise after the clean demo"
    assert sess.beta > beta0

    pre, suf = sess.run.regions()
    regions = set(pre) | set(suf)
    assert "c2" not in regions, f"closed hall still planned: {pre} {suf}"
    assert "c1" in regions, f"reroute should pass the c1 hall: {pre} {suf}"

    assert_replay_identical(sess)
    return sess
