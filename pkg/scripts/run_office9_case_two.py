#!/usr/bin/env python3
"""Generate and verify the case-two storyline log on the office9 variant.

Writes tests/data/office9_case_two.events.jsonl (self-contained event log
with the scenario embedded in its meta line) and a sha256 digest of the
deterministic tick log next to it.
"""
from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts"))

from storylines import run_case_two, save_logs, tick_log_digest  # noqa: E402

from mixplan.workspace import load_scenario  # noqa: E402


def main() -> int:
    sc = load_scenario(
        ROOT / "src" / "mixplan" / "scenarios" / "office9_case2.json"
    )
    sess = run_case_two(sc)
    data = ROOT / "tests" / "data"
    save_logs(
        sess,
        data / "office9_case_two.events.jsonl",
        data / "office9_case_two.ticks.sha256",
    )
    task = sess.task_states()[0]
    pre, suf = sess.run.regions()
    print(f"ticks            : {sess.t}")
    print(f"events           : {len(sess.events)}")
    print(f"beta             : {sc.beta0:g} -> {sess.beta:.4f}")
    print(f"task             : {task.status}, lateness {task.delay:.1f}s")
    print(f"suffix           : {suf}")
    print(f"tick log digest  : {tick_log_digest(sess)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
