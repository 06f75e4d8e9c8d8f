#!/usr/bin/env python3
"""Generate and verify the case-one storyline log on the office9 scenario.

Writes tests/data/office9_case_one.events.jsonl (self-contained event log
with the scenario embedded in its meta line) and a sha256 digest of the
deterministic tick log next to it.
"""
from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts"))

from storylines import run_case_one, save_logs, tick_log_digest  # noqa: E402

from mixplan.workspace import load_scenario  # noqa: E402


def main() -> int:
    sc = load_scenario(ROOT / "src" / "mixplan" / "scenarios" / "office9.json")
    sess = run_case_one(sc)
    data = ROOT / "tests" / "data"
    save_logs(
        sess,
        data / "office9_case_one.events.jsonl",
        data / "office9_case_one.ticks.sha256",
    )
    pre, suf = sess.run.regions()
    print(f"ticks            : {sess.t}")
    print(f"events           : {len(sess.events)}")
    print(f"beta             : {sc.beta0:g} -> {sess.beta:.4f}")
    print(f"suffix           : {suf}")
    print(f"tick log digest  : {tick_log_digest(sess)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
