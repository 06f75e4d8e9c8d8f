"""Command line entry point.

Subcommands cover the batch workflow end to end: automaton translation,
plan synthesis and revision, temp-task insertion, preference learning,
headless scripted simulation, deterministic log replay, and the network
service. Runtime failures exit 1 with a one-line diagnostic; usage errors
exit 2 via argparse.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .errors import MixplanError
from .irl import learn_beta
from .ltl import parse, translate
from .ltl.ast import atoms
from .planner import (
    TempTask,
    insert_temp_task,
    revise,
    synthesize,
    total_cost,
)
from .product import ProductAutomaton, trivial_soft_automaton
from .session import Session, replay
from .workspace import Scenario, load_scenario, scenario_to_dict


def _nba_json(f_text: str, aps: Optional[str]) -> dict:
    f = parse(f_text)
    ap_set = frozenset(aps.split(",")) if aps else atoms(f)
    nba = translate(f, aps=ap_set)
    return {
        "formula": f_text,
        "ap": sorted(ap_set),
        "n_states": nba.n_states,
        "initial": sorted(nba.initial),
        "accepting": sorted(nba.accepting),
        "edges": [
            {
                "src": src,
                "dst": dst,
                "guard": [
                    {"pos": sorted(c.pos), "neg": sorted(c.neg)}
                    for c in g.clauses
                ],
            }
            for src in nba.states
            for dst, g in nba.out_edges(src)
        ],
    }


def _build_pa(sc: Scenario) -> ProductAutomaton:
    hard = translate(sc.phi_hard, aps=sc.ts.aps)
    if sc.phi_soft is not None:
        soft = translate(sc.phi_soft, aps=sc.ts.aps)
    else:
        soft = trivial_soft_automaton(sc.ts.aps)
    return ProductAutomaton(sc.ts, hard, soft)


def _run_json(pa: ProductAutomaton, run, beta: float, gamma: float) -> dict:
    pre, suf = run.regions()
    return {
        "prefix": list(pre),
        "suffix": list(suf),
        "prefix_states": [list(map(str, s)) for s in run.prefix],
        "cost": total_cost(run, beta, gamma),
        "prefix_cost": [run.pre_delta[0], run.pre_delta[2]],
        "suffix_cost": [run.suf_delta[0], run.suf_delta[2]],
        "beta": beta,
        "gamma": gamma,
    }


def _belief_from_history(pa: ProductAutomaton, history: list[str]):
    belief = frozenset(pa.reachable_states([history[0]]))
    for rid in history[1:]:
        belief = frozenset(pa.step_belief(belief, rid))
        if not belief:
            msg = f"history is not executable: no product state survives {rid!r}"
            raise MixplanError(msg)
    return belief


def _cmd_nba(args: argparse.Namespace) -> int:
    print(json.dumps(_nba_json(args.formula, args.aps), indent=2, sort_keys=True))
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    beta = sc.beta0 if args.beta is None else args.beta
    gamma = sc.gamma if args.gamma is None else args.gamma
    pa = _build_pa(sc)
    if args.plan_cmd == "synth":
        run = synthesize(pa, beta, gamma)
    elif args.plan_cmd == "revise":
        history = args.history.split(",")
        belief = _belief_from_history(pa, history)
        run = revise(pa, belief, beta, gamma)
    else:  # temp
        run = synthesize(pa, beta, gamma)
        task = TempTask(args.pickup, args.dropoff, args.deadline, assigned_at=args.now)
        ins = insert_temp_task(
            pa, run, args.cursor, task, beta, gamma, sc.control.v_max, now=args.now
        )
        out = _run_json(pa, ins.run, beta, gamma)
        out["task"] = {
            "pickup": args.pickup,
            "dropoff": args.dropoff,
            "deadline_s": args.deadline,
            "k_s": ins.k_s,
            "k_g": ins.k_g,
            "predicted_delay": ins.delay,
            "delta_cost": ins.delta_cost,
        }
        print(json.dumps(out, indent=2, sort_keys=True))
        return 0
    print(json.dumps(_run_json(pa, run, beta, gamma), indent=2, sort_keys=True))
    return 0


def _cmd_irl(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    pa = _build_pa(sc)
    beta0 = sc.beta0 if args.beta0 is None else args.beta0
    trace = args.trace.split(",")
    res = learn_beta(pa, trace, beta0, sc.irl)
    out = {
        "beta0": beta0,
        "beta": res.beta,
        "converged": res.converged,
        "iterations": len(res.steps),
        "steps": [
            {
                "k": st.k,
                "beta": st.beta,
                "grad": st.grad,
                "a3_demo": st.a3_demo,
                "a3_model": st.a3_model,
            }
            for st in res.steps
        ],
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _read_events(path: str) -> tuple[Optional[dict], list[dict]]:
    meta = None
    events = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if obj.get("kind") == "meta":
                meta = obj
            else:
                events.append(obj)
    return meta, events


def _log_dir() -> Path:
    d = Path(os.environ.get("MIXPLAN_LOG_DIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _dump_session(sess: Session, sc_dict: dict, events_out, ticks_out) -> None:
    if events_out:
        with open(events_out, "w") as f:
            meta = {
                "kind": "meta",
                "scenario": sc_dict,
                "seed": sess.seed,
                "ticks": sess.t,
            }
            f.write(json.dumps(meta, sort_keys=True) + "\n")
            for e in sess.events:
                f.write(e.to_json() + "\n")
    if ticks_out:
        with open(ticks_out, "w") as f:
            for rec in sess.tick_log:
                f.write(json.dumps(rec, sort_keys=True) + "\n")


def _summary(sess: Session) -> dict:
    return {
        "ticks": sess.t,
        "sim_time": sess.sim_time(),
        "beta": sess.beta,
        "mode": sess.mode,
        "region": sess.history[-1],
        "history": sess.history,
        "events": len(sess.events),
        "outputs": [e.kind for e in sess.outputs],
        "tasks": [
            {"task_id": t.task_id, "status": t.status}
            for t in sess.task_states()
        ],
    }


def _cmd_sim(args: argparse.Namespace) -> int:
    sc = load_scenario(args.scenario)
    meta, events = (None, [])
    if args.script:
        meta, events = _read_events(args.script)
    ticks = args.ticks
    if ticks is None:
        ticks = int(meta["ticks"]) if meta and "ticks" in meta else 0
    sess = replay(sc, events, ticks, seed=args.seed)
    out = args.out or str(_log_dir() / "sim_ticks.jsonl")
    ev_out = args.events_out or str(_log_dir() / "sim_events.jsonl")
    _dump_session(sess, scenario_to_dict(sc), ev_out, out)
    print(json.dumps(_summary(sess), indent=2, sort_keys=True))
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    meta, events = _read_events(args.log)
    if args.scenario:
        sc = load_scenario(args.scenario)
    elif meta and "scenario" in meta:
        sc = load_scenario(meta["scenario"])
    else:
        msg = "log has no embedded scenario; pass --scenario"
        raise MixplanError(msg)
    ticks = args.ticks
    if ticks is None:
        if not (meta and "ticks" in meta):
            msg = "log has no tick count; pass --ticks"
            raise MixplanError(msg)
        ticks = int(meta["ticks"])
    seed = args.seed if args.seed is not None else int(meta.get("seed", 0)) if meta else 0
    sess = replay(sc, events, ticks, seed=seed)
    if args.expect:
        with open(args.expect) as f:
            expected = [line.rstrip("\n") for line in f if line.strip()]
        got = [json.dumps(rec, sort_keys=True) for rec in sess.tick_log]
        if got != expected:
            n = sum(1 for a, b in zip(got, expected) if a != b)
            print(
                f"replay mismatch: {n} differing lines, "
                f"{len(got)} produced vs {len(expected)} expected",
                file=sys.stderr,
            )
            return 1
    print(json.dumps(_summary(sess), indent=2, sort_keys=True))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    sc = load_scenario(args.scenario)
    static_dir = args.static
    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    serve(
        sc,
        host=args.host,
        port=args.port,
        seed=args.seed,
        lockstep=args.lockstep,
        tick_hz=args.tick_hz,
        static_dir=static_dir,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixplan")
    sub = p.add_subparsers(dest="cmd", required=True)

    p_nba = sub.add_parser("nba", help="translate a formula to an automaton")
    p_nba.add_argument("formula")
    p_nba.add_argument("--aps", help="comma-separated proposition universe")
    p_nba.set_defaults(fn=_cmd_nba)

    p_plan = sub.add_parser("plan", help="synthesize or revise plans")
    plan_sub = p_plan.add_subparsers(dest="plan_cmd", required=True)
    for name in ("synth", "revise", "temp"):
        sp = plan_sub.add_parser(name)
        sp.add_argument("--scenario", required=True)
        sp.add_argument("--beta", type=float)
        sp.add_argument("--gamma", type=float)
        if name == "revise":
            sp.add_argument(
                "--history", required=True, help="comma-separated region trace"
            )
        if name == "temp":
            sp.add_argument("--pickup", required=True)
            sp.add_argument("--dropoff", required=True)
            sp.add_argument("--deadline", type=float, required=True)
            sp.add_argument("--cursor", type=int, default=0)
            sp.add_argument("--now", type=float, default=0.0)
        sp.set_defaults(fn=_cmd_plan)

    p_irl = sub.add_parser("irl", help="preference learning")
    irl_sub = p_irl.add_subparsers(dest="irl_cmd", required=True)
    sp = irl_sub.add_parser("learn")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--trace", required=True, help="comma-separated region trace")
    sp.add_argument("--beta0", type=float)
    sp.set_defaults(fn=_cmd_irl)

    p_sim = sub.add_parser("sim", help="headless scripted simulation")
    sim_sub = p_sim.add_subparsers(dest="sim_cmd", required=True)
    sp = sim_sub.add_parser("run")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--script", help="JSONL event file")
    sp.add_argument("--ticks", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="tick log output path")
    sp.add_argument("--events-out", help="event log output path")
    sp.set_defaults(fn=_cmd_sim)

    p_sess = sub.add_parser("session", help="session log tools")
    sess_sub = p_sess.add_subparsers(dest="session_cmd", required=True)
    sp = sess_sub.add_parser("replay")
    sp.add_argument("log", help="JSONL event log with meta line")
    sp.add_argument("--scenario")
    sp.add_argument("--ticks", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--expect", help="tick log to compare against")
    sp.set_defaults(fn=_cmd_replay)

    p_serve = sub.add_parser("serve", help="run the WebSocket service")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--tick-hz", type=float, default=20.0)
    p_serve.add_argument("--lockstep", action="store_true")
    p_serve.add_argument("--static", help="static UI directory to mount")
    p_serve.set_defaults(fn=_cmd_serve)

    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (MixplanError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
