"""Scenario loading, validation, geometry and model updates."""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import pytest

from mixplan.errors import ScenarioError
from mixplan.ltl.ast import to_text
from mixplan.workspace import (
    SetEdge,
    SetLabels,
    load_scenario,
    scenario_to_dict,
)

OFFICE9 = Path(__file__).resolve().parents[1] / "src/mixplan/scenarios/office9.json"


def mini() -> dict:
    return {
        "name": "mini",
        "ap": ["a", "b"],
        "regions": [
            {"id": "r0", "disk": {"center": [0, 0], "radius": 1}, "labels": ["a"]},
            {"id": "r1", "disk": {"center": [10, 0], "radius": 1}, "labels": ["b"]},
            {"id": "r2", "disk": {"center": [20, 0], "radius": 1}, "labels": []},
        ],
        "edges": [
            {"from": "r0", "to": "r1", "both": True},
            {"from": "r1", "to": "r2", "both": True},
        ],
        "initial": "r0",
        "phi_hard": "[]<>a && []<>b",
    }


def test_office9_loads():
    sc = load_scenario(OFFICE9)
    ts = sc.ts
    assert len(ts.regions) == 13
    assert ts.initial == "r0"
    assert ts.region_at(ts.centroid_of("r7")) == "r7"
    # every declared edge is symmetric in this map
    for (u, v), w in ts.weights.items():
        assert ts.weight(v, u) == w
    assert ts.min_weight() >= 1.0
    assert sc.control.dt * (sc.control.v_max + sc.control.u_h_max) <= sc.d_s / 2


def test_load_from_text_and_dict():
    d = mini()
    sc1 = load_scenario(d)
    sc2 = load_scenario(json.dumps(d))
    assert sc1.ts.weights == sc2.ts.weights
    assert to_text(sc1.phi_hard) == to_text(sc2.phi_hard)


def test_default_weight_is_centroid_distance():
    sc = load_scenario(mini())
    assert sc.ts.weight("r0", "r1") == pytest.approx(10.0)
    assert sc.ts.weight("r1", "r0") == pytest.approx(10.0)


def test_weights_are_normalized_up():
    d = mini()
    d["edges"] = [
        {"from": "r0", "to": "r1", "weight": 0.2},
        {"from": "r1", "to": "r2", "weight": 0.4},
    ]
    ts = load_scenario(d).ts
    assert ts.min_weight() == pytest.approx(1.0)
    assert ts.weight("r1", "r2") == pytest.approx(2.0)


def test_missing_edge_is_infinite():
    ts = load_scenario(mini()).ts
    assert ts.weight("r0", "r2") == math.inf


def test_region_at_free_space_and_ties():
    d = mini()
    # tangent disks share exactly one boundary point
    d["regions"][1]["disk"]["center"] = [2, 0]
    ts = load_scenario(d).ts
    assert ts.region_at((5.0, 5.0)) is None
    assert ts.region_at((1.0, 0.0)) == "r0"  # tie falls to the smaller id
    assert ts.region_at((1.5, 0.0)) == "r1"


def test_overlapping_regions_rejected():
    d = mini()
    d["regions"][1]["disk"]["center"] = [1, 0]
    with pytest.raises(ScenarioError, match="overlap"):
        load_scenario(d)


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda d: d.pop("phi_hard"), "misses required"),
        (lambda d: d.update(bogus=1), "unknown scenario keys"),
        (lambda d: d.update(ap=["a", "a"]), "unique"),
        (lambda d: d["regions"].append(dict(d["regions"][0])), "duplicate region"),
        (lambda d: d["edges"].append({"from": "r0", "to": "zz"}), "unknown regions"),
        (lambda d: d["edges"].append({"from": "r0", "to": "r1"}), "duplicate edge"),
        (lambda d: d.update(initial="zz"), "does not exist"),
        (lambda d: d.update(phi_hard="[]<>zz"), "outside ap"),
        (lambda d: d["regions"][0]["labels"].append("zz"), "not in ap"),
        (lambda d: d.update(beta0=-1), "beta0"),
        (lambda d: d.update(gamma=0), "must be > 0"),
        (lambda d: d.update(controller={"dt": 1.0}), "step bound"),
        (lambda d: d.update(irl={"theta": 3.0, "lambda": 0.5}), "contraction"),
        (lambda d: d["edges"].__setitem__(0, {"from": "r0", "to": "r1", "weight": -2}), "positive"),
    ],
)
def test_validation_errors(mutate, needle):
    d = mini()
    mutate(d)
    with pytest.raises(ScenarioError, match=needle):
        load_scenario(d)


def test_polygon_regions():
    d = mini()
    d["regions"].append(
        {"id": "sq", "polygon": [[30, -1], [32, -1], [32, 1], [30, 1]], "labels": []}
    )
    d["edges"].append({"from": "r2", "to": "sq", "both": True})
    ts = load_scenario(d).ts
    assert ts.centroid_of("sq") == pytest.approx((31.0, 0.0))
    assert ts.region_at((31.0, 0.5)) == "sq"
    assert ts.region_at((29.0, 0.0)) is None
    assert ts.weight("r2", "sq") == pytest.approx(11.0)


def test_apply_set_edge():
    ts = load_scenario(mini()).ts
    t2 = ts.apply(SetEdge("r0", "r2", True, both=True))
    assert t2.weight("r0", "r2") == pytest.approx(20.0)
    assert t2.weight("r2", "r0") == pytest.approx(20.0)
    assert ts.weight("r0", "r2") == math.inf  # original untouched
    assert t2.revision == ts.revision + 1

    t3 = t2.apply(SetEdge("r0", "r2", False))
    assert t3.weight("r0", "r2") == math.inf
    assert t3.weight("r2", "r0") == pytest.approx(20.0)  # one direction only

    t4 = ts.apply(SetEdge("r0", "r2", True, weight=7.5))
    assert t4.weight("r0", "r2") == pytest.approx(7.5)


def test_apply_batch_and_errors():
    ts = load_scenario(mini()).ts
    t2 = ts.apply([SetEdge("r0", "r2", True), SetLabels("r2", frozenset({"a"}))])
    assert t2.labels_of("r2") == frozenset({"a"})
    assert t2.revision == ts.revision + 2
    with pytest.raises(ScenarioError):
        ts.apply(SetEdge("r0", "zz", True))
    with pytest.raises(ScenarioError):
        ts.apply(SetLabels("r0", frozenset({"zz"})))
    with pytest.raises(ScenarioError):
        ts.apply(SetEdge("r0", "r1", True, weight=0.0))
    with pytest.raises(ScenarioError):
        ts.apply("not an update")


def test_removing_missing_edge_is_noop():
    ts = load_scenario(mini()).ts
    t2 = ts.apply(SetEdge("r0", "r2", False))
    assert t2.weights == ts.weights
    assert t2.revision == ts.revision + 1


def test_scenario_round_trip():
    sc = load_scenario(OFFICE9)
    d = scenario_to_dict(sc)
    sc2 = load_scenario(copy.deepcopy(d))
    assert sc2.ts.weights == sc.ts.weights
    assert sc2.ts.initial == sc.ts.initial
    assert {r.rid: r.labels for r in sc2.ts.regions} == {
        r.rid: r.labels for r in sc.ts.regions
    }
    assert to_text(sc2.phi_hard) == to_text(sc.phi_hard)
    assert to_text(sc2.phi_soft) == to_text(sc.phi_soft)
    assert sc2.control == sc.control
    assert sc2.irl == sc.irl
    assert (sc2.beta0, sc2.gamma, sc2.d_s, sc2.eps_buffer) == (
        sc.beta0, sc.gamma, sc.d_s, sc.eps_buffer,
    )
    # serializing the reload reproduces the dict exactly
    assert scenario_to_dict(sc2) == d


def test_round_trip_after_updates():
    sc = load_scenario(mini())
    ts = sc.ts.apply([
        SetEdge("r0", "r2", True, both=True),
        SetEdge("r0", "r1", False),
        SetLabels("r1", frozenset()),
    ])
    sc = type(sc)(**{**sc.__dict__, "ts": ts})
    d = scenario_to_dict(sc)
    sc2 = load_scenario(d)
    assert sc2.ts.weights == ts.weights
    assert sc2.ts.labels_of("r1") == frozenset()
