"""Prefix-suffix synthesis: cost algebra, optimality against a dense
min-plus closure, revision from beliefs and deterministic tie handling."""
from __future__ import annotations

import math
import random
from pathlib import Path

import pytest

from mixplan.errors import NoAcceptingRun
from mixplan.planner import (
    AcceptingRun,
    revise,
    run_deltas,
    synthesize,
    synthesize_from,
    total_cost,
    validate_run,
)
from mixplan.product import ProductState
from mixplan.workspace import load_scenario

from minis import build_pa, patrol_two, random_scenario, scen_dict, soft_detour
from oracles import lasso_cost_oracle

OFFICE9 = Path(__file__).resolve().parents[1] / "src/mixplan/scenarios/office9.json"


def _dummy_run(pre, suf):
    return AcceptingRun(prefix=(), suffix=((),), pre_delta=pre, suf_delta=suf)


# ------------------------------------------------------------- cost algebra


def test_total_cost_combines_weighted_deltas():
    run = _dummy_run((3.0, 0.0, 2.0), (5.0, 0.0, 1.0))
    assert total_cost(run, beta=2.0) == 14.0
    assert total_cost(run, beta=2.0, gamma=2.0) == 21.0
    assert total_cost(run, beta=0.0) == 8.0


def test_total_cost_propagates_infeasibility():
    run = _dummy_run((math.inf, 0.0, 0.0), (1.0, 0.0, 0.0))
    assert total_cost(run, beta=1.0) == math.inf
    run = _dummy_run((1.0, 0.0, 0.0), (0.0, math.inf, 0.0))
    assert total_cost(run, beta=1.0) == math.inf


def test_patrol_round_trip_cost_is_exact():
    # ring r0(a) -2- r1 -3- r2(b) -2- r3 -3- r0: the cheapest lap costs 10,
    # and a stem is needed because acceptance is only earned after both
    # patrol targets have been witnessed
    pa = build_pa(patrol_two())
    run = synthesize(pa, beta=0.0)
    validate_run(pa, run)
    assert run.suf_delta == (10.0, 0.0, 0.0)
    assert total_cost(run, beta=0.0) == lasso_cost_oracle(
        pa, pa.initial_states(), 0.0, 1.0
    )
    lap = set(run.regions()[1])
    assert "r0" in lap and "r2" in lap


def test_stored_deltas_match_recomputation():
    pa = build_pa(soft_detour())
    run = synthesize(pa, beta=1.0)
    pre, suf = run_deltas(pa, run)
    assert run.pre_delta == pre
    assert run.suf_delta == suf


# -------------------------------------------------- preference weight flips


def test_soft_detour_flips_with_beta():
    sc = soft_detour()
    pa = build_pa(sc)
    # dirty lap 8 + 2 beta, mixed 14 + beta, clean 20: flip point beta = 6
    low = synthesize(pa, beta=0.0)
    assert "r1" in low.regions()[1]
    assert low.suf_delta == (8.0, 0.0, 2.0)
    high = synthesize(pa, beta=10.0)
    assert "r1" not in high.regions()[1]
    assert high.suf_delta == (20.0, 0.0, 0.0)
    for beta in (0.0, 3.0, 6.0, 10.0):
        assert total_cost(synthesize(pa, beta), beta) == lasso_cost_oracle(
            pa, pa.initial_states(), beta, 1.0
        )


def test_office9_corridor_flips_with_beta():
    sc = load_scenario(OFFICE9)
    pa = build_pa(sc)
    low = synthesize(pa, beta=0.0, gamma=sc.gamma)
    high = synthesize(pa, beta=30.0, gamma=sc.gamma)
    validate_run(pa, low)
    validate_run(pa, high)
    assert "c4" in low.regions()[1]
    assert "c4" not in high.regions()[1]
    assert low.suf_delta[2] > 0.0
    assert high.suf_delta[2] == 0.0
    assert total_cost(low, 0.0, sc.gamma) < total_cost(high, 30.0, sc.gamma)


def test_optimal_cost_is_monotone_in_beta():
    rng = random.Random(88)
    for _ in range(10):
        pa = build_pa(random_scenario(rng, max_regions=6))
        try:
            costs = [
                total_cost(synthesize(pa, b), b) for b in (0.0, 1.0, 2.0, 5.0)
            ]
        except NoAcceptingRun:
            continue
        assert costs == sorted(costs)


# ------------------------------------------------------ oracle optimality


def test_synthesis_matches_minplus_closure_on_random_maps():
    rng = random.Random(1234)
    agreements = 0
    for _ in range(40):
        sc = random_scenario(rng, max_regions=6)
        pa = build_pa(sc)
        beta = float(rng.randint(0, 3))
        gamma = float(rng.randint(1, 2))
        want = lasso_cost_oracle(pa, pa.initial_states(), beta, gamma)
        try:
            run = synthesize(pa, beta, gamma)
        except NoAcceptingRun:
            assert want == math.inf
            continue
        validate_run(pa, run, beta)
        assert total_cost(run, beta, gamma) == want
        agreements += 1
    assert agreements >= 15


def test_revision_matches_closure_from_mid_run_beliefs():
    rng = random.Random(4321)
    checked = 0
    for _ in range(20):
        sc = random_scenario(rng, max_regions=5)
        pa = build_pa(sc)
        history = [sc.ts.initial]
        for _ in range(rng.randint(0, 4)):
            nbrs = pa.ts.neighbors(history[-1])
            if not nbrs:
                break
            history.append(rng.choice(list(nbrs)))
        belief = pa.reachable_states(history)
        if not belief:
            continue
        beta = float(rng.randint(0, 3))
        want = lasso_cost_oracle(pa, belief, beta, 1.0)
        try:
            run = revise(pa, belief, beta)
        except NoAcceptingRun:
            assert want == math.inf
            continue
        assert total_cost(run, beta) == want
        checked += 1
    assert checked >= 8


# ----------------------------------------------------------- failure modes


def test_unreachable_patrol_target_has_no_run():
    sc = load_scenario(
        scen_dict(3, ["a", "b"], {0: ["a"]}, [(0, 1, 1), (1, 2, 1)], "[]<>a && []<>b")
    )
    with pytest.raises(NoAcceptingRun):
        synthesize(build_pa(sc), beta=0.0)


def test_initial_label_can_break_safety():
    sc = load_scenario(
        scen_dict(2, ["a"], {0: ["a"]}, [(0, 1, 1)], "[]!a")
    )
    with pytest.raises(NoAcceptingRun):
        synthesize(build_pa(sc), beta=0.0)


def test_negative_beta_rejected():
    pa = build_pa(patrol_two())
    with pytest.raises(ValueError, match="nonnegative"):
        synthesize(pa, beta=-1.0)


def test_empty_belief_rejected():
    pa = build_pa(patrol_two())
    with pytest.raises(NoAcceptingRun, match="empty belief"):
        revise(pa, [], beta=0.0)


def test_validate_run_catches_structural_damage():
    pa = build_pa(patrol_two())
    run = synthesize(pa, beta=0.0)
    bad_head = AcceptingRun(
        run.prefix, (run.suffix[0]._replace(stage=2), *run.suffix[1:]),
        run.pre_delta, run.suf_delta,
    )
    with pytest.raises(AssertionError):
        validate_run(pa, bad_head)
    jump = ProductState("r2", run.suffix[0].hard, run.suffix[0].soft, 1)
    torn = AcceptingRun((jump,), run.suffix, run.pre_delta, run.suf_delta)
    with pytest.raises(AssertionError):
        validate_run(pa, torn)


# ------------------------------------------------------------- determinism


def test_equal_cost_alternatives_resolve_identically():
    d = scen_dict(
        4,
        ["a", "b"],
        {0: ["a"], 2: ["b"]},
        [(0, 1, 3), (1, 2, 3), (0, 3, 3), (3, 2, 3)],
        "[]<>a && []<>b",
    )
    runs = []
    for _ in range(3):
        pa = build_pa(load_scenario(d))
        runs.append(synthesize(pa, beta=0.0))
    assert runs[0] == runs[1] == runs[2]


def test_synthesize_from_explicit_sources():
    pa = build_pa(patrol_two())
    belief = pa.reachable_states(["r0", "r1"])
    run = synthesize_from(pa, sorted(belief), beta=0.0)
    validate_run(pa, run)
    assert total_cost(run, 0.0) == lasso_cost_oracle(pa, belief, 0.0, 1.0)
