"""Workspace model: labeled planar regions and a weighted transition system.

Regions are closed disks or closed convex polygons with pairwise disjoint
interiors. The transition system is directed; edge weights default to the
Euclidean distance between region centroids and must stay strictly positive
and finite. Model edits never mutate: apply_update returns a new system with
the revision counter advanced.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

from .errors import ScenarioError
from .ltl.ast import Formula, atoms, to_text
from .ltl.parse import parse

Point = tuple[float, float]


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point, ...]  # counterclockwise, convex


Shape = Union[Disk, Polygon]


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _norm(a: Point) -> float:
    return math.hypot(a[0], a[1])


def _cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _seg_distance(p: Point, a: Point, b: Point) -> float:
    ab = _sub(b, a)
    ap = _sub(p, a)
    denom = _dot(ab, ab)
    t = 0.0 if denom == 0.0 else max(0.0, min(1.0, _dot(ap, ab) / denom))
    q = (a[0] + t * ab[0], a[1] + t * ab[1])
    return _norm(_sub(p, q))


def _seg_closest(p: Point, a: Point, b: Point) -> Point:
    ab = _sub(b, a)
    denom = _dot(ab, ab)
    t = 0.0 if denom == 0.0 else max(0.0, min(1.0, _dot(_sub(p, a), ab) / denom))
    return (a[0] + t * ab[0], a[1] + t * ab[1])


def contains(shape: Shape, p: Point) -> bool:
    """Closed-set membership."""
    if isinstance(shape, Disk):
        return _norm(_sub(p, shape.center)) <= shape.radius
    vs = shape.vertices
    for i in range(len(vs)):
        a, b = vs[i], vs[(i + 1) % len(vs)]
        if _cross(_sub(b, a), _sub(p, a)) < 0.0:
            return False
    return True


def distance(shape: Shape, p: Point) -> float:
    """Euclidean distance to the closed set; zero inside."""
    if isinstance(shape, Disk):
        return max(0.0, _norm(_sub(p, shape.center)) - shape.radius)
    if contains(shape, p):
        return 0.0
    vs = shape.vertices
    return min(
        _seg_distance(p, vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))
    )


def centroid(shape: Shape) -> Point:
    if isinstance(shape, Disk):
        return shape.center
    vs = shape.vertices
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(len(vs)):
        a, b = vs[i], vs[(i + 1) % len(vs)]
        w = _cross(a, b)
        area2 += w
        cx += (a[0] + b[0]) * w
        cy += (a[1] + b[1]) * w
    return (cx / (3.0 * area2), cy / (3.0 * area2))


def outward_direction(shape: Shape, p: Point) -> Point:
    """Unit direction of increasing distance at p. For points inside or at a
    degenerate spot the direction away from the centroid is used; ties fall
    back to +x so the result is always defined."""
    if isinstance(shape, Disk):
        d = _sub(p, shape.center)
        n = _norm(d)
        if n > 0.0:
            return (d[0] / n, d[1] / n)
    else:
        if not contains(shape, p):
            vs = shape.vertices
            best = None
            best_d = math.inf
            for i in range(len(vs)):
                q = _seg_closest(p, vs[i], vs[(i + 1) % len(vs)])
                d = _norm(_sub(p, q))
                if d < best_d:
                    best_d = d
                    best = q
            if best is not None and best_d > 0.0:
                return ((p[0] - best[0]) / best_d, (p[1] - best[1]) / best_d)
    c = centroid(shape)
    d = _sub(p, c)
    n = _norm(d)
    if n > 0.0:
        return (d[0] / n, d[1] / n)
    return (1.0, 0.0)


def _interval(shape: Shape, axis: Point) -> tuple[float, float]:
    if isinstance(shape, Disk):
        c = _dot(shape.center, axis)
        return (c - shape.radius, c + shape.radius)
    vals = [_dot(v, axis) for v in shape.vertices]
    return (min(vals), max(vals))


def interiors_disjoint(a: Shape, b: Shape) -> bool:
    if isinstance(a, Disk) and isinstance(b, Disk):
        return _norm(_sub(a.center, b.center)) >= a.radius + b.radius
    if isinstance(a, Disk):
        return distance(b, a.center) >= a.radius
    if isinstance(b, Disk):
        return distance(a, b.center) >= b.radius
    for shape in (a, b):
        vs = shape.vertices
        for i in range(len(vs)):
            e = _sub(vs[(i + 1) % len(vs)], vs[i])
            axis = (-e[1], e[0])
            lo_a, hi_a = _interval(a, axis)
            lo_b, hi_b = _interval(b, axis)
            if hi_a <= lo_b or hi_b <= lo_a:
                return True
    return False


def _check_polygon(rid: str, vs: tuple[Point, ...]) -> Polygon:
    if len(vs) < 3:
        msg = f"region {rid}: polygon needs at least 3 vertices"
        raise ScenarioError(msg)
    area2 = sum(
        _cross(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))
    )
    if area2 == 0.0:
        msg = f"region {rid}: polygon has zero area"
        raise ScenarioError(msg)
    if area2 < 0.0:
        vs = tuple(reversed(vs))
    for i in range(len(vs)):
        a, b, c = vs[i], vs[(i + 1) % len(vs)], vs[(i + 2) % len(vs)]
        if _cross(_sub(b, a), _sub(c, b)) < 0.0:
            msg = f"region {rid}: polygon is not convex"
            raise ScenarioError(msg)
    return Polygon(vs)


@dataclass(frozen=True)
class Region:
    rid: str
    shape: Shape
    labels: frozenset[str]


@dataclass(frozen=True)
class SetEdge:
    """Insert or remove a directed transition; weight None means the
    centroid-distance default. both=True also applies the reverse edge."""

    frm: str
    to: str
    present: bool
    weight: Optional[float] = None
    both: bool = False


@dataclass(frozen=True)
class SetLabels:
    region: str
    labels: frozenset[str]


ModelUpdate = Union[SetEdge, SetLabels]


@dataclass(frozen=True)
class TransitionSystem:
    regions: tuple[Region, ...]
    weights: dict  # (rid, rid) -> float
    initial: str
    aps: frozenset[str]
    revision: int = 0

    @cached_property
    def _by_id(self) -> dict:
        return {r.rid: r for r in self.regions}

    @cached_property
    def _out(self) -> dict:
        out: dict[str, list[str]] = {r.rid: [] for r in self.regions}
        for (u, v) in self.weights:
            out[u].append(v)
        return {u: tuple(sorted(vs)) for u, vs in out.items()}

    def region(self, rid: str) -> Region:
        try:
            return self._by_id[rid]
        except KeyError:
            msg = f"unknown region {rid!r}"
            raise ScenarioError(msg) from None

    def has_region(self, rid: str) -> bool:
        return rid in self._by_id

    def region_ids(self) -> tuple[str, ...]:
        return tuple(r.rid for r in self.regions)

    def labels_of(self, rid: str) -> frozenset[str]:
        return self.region(rid).labels

    def weight(self, u: str, v: str) -> float:
        return self.weights.get((u, v), math.inf)

    def neighbors(self, u: str) -> tuple[str, ...]:
        return self._out.get(u, ())

    def centroid_of(self, rid: str) -> Point:
        return centroid(self.region(rid).shape)

    def region_at(self, p: Point) -> Optional[str]:
        """Region whose closed shape contains p; ties break to the
        lexicographically smallest id; None between regions."""
        hits = [r.rid for r in self.regions if contains(r.shape, p)]
        return min(hits) if hits else None

    def min_weight(self) -> float:
        return min(self.weights.values()) if self.weights else math.inf

    def apply(self, update) -> "TransitionSystem":
        if isinstance(update, (list, tuple)):
            ts = self
            for u in update:
                ts = ts.apply(u)
            return ts
        if isinstance(update, SetEdge):
            for rid in (update.frm, update.to):
                self.region(rid)
            pairs = [(update.frm, update.to)]
            if update.both:
                pairs.append((update.to, update.frm))
            weights = dict(self.weights)
            for u, v in pairs:
                if update.present:
                    w = update.weight
                    if w is None:
                        w = _norm(_sub(self.centroid_of(u), self.centroid_of(v)))
                    if not (w > 0.0 and math.isfinite(w)):
                        msg = f"edge {u}->{v}: weight must be positive and finite"
                        raise ScenarioError(msg)
                    weights[(u, v)] = w
                else:
                    weights.pop((u, v), None)
            return replace(self, weights=weights, revision=self.revision + 1)
        if isinstance(update, SetLabels):
            target = self.region(update.region)
            labels = frozenset(update.labels)
            if not labels <= self.aps:
                extra = sorted(labels - self.aps)
                msg = f"region {update.region}: labels {extra} not in the proposition set"
                raise ScenarioError(msg)
            regions = tuple(
                replace(r, labels=labels) if r.rid == target.rid else r
                for r in self.regions
            )
            return replace(self, regions=regions, revision=self.revision + 1)
        msg = f"unknown update {update!r}"
        raise ScenarioError(msg)


@dataclass(frozen=True)
class ControlParams:
    gain: float
    v_max: float
    u_h_max: float
    dt: float


@dataclass(frozen=True)
class IrlParams:
    lam: float
    theta: float
    eps_threshold: float
    max_iters: int


@dataclass(frozen=True)
class Scenario:
    name: str
    ts: TransitionSystem
    phi_hard: Formula
    phi_soft: Optional[Formula]
    beta0: float
    gamma: float
    d_s: float
    eps_buffer: float
    control: ControlParams
    irl: IrlParams


_TOP_KEYS = {
    "name",
    "description",
    "ap",
    "regions",
    "edges",
    "initial",
    "phi_hard",
    "phi_soft",
    "beta0",
    "gamma",
    "d_s",
    "eps_buffer",
    "controller",
    "irl",
}


def _parse_shape(rid: str, spec: dict) -> Shape:
    has_disk = "disk" in spec
    has_poly = "polygon" in spec
    if has_disk == has_poly:
        msg = f"region {rid}: exactly one of disk/polygon required"
        raise ScenarioError(msg)
    if has_disk:
        d = spec["disk"]
        try:
            cx, cy = d["center"]
            r = float(d["radius"])
        except (KeyError, TypeError, ValueError):
            msg = f"region {rid}: disk needs center [x, y] and radius"
            raise ScenarioError(msg) from None
        if not (r > 0.0 and math.isfinite(r)):
            msg = f"region {rid}: disk radius must be positive"
            raise ScenarioError(msg)
        return Disk((float(cx), float(cy)), r)
    pts = spec["polygon"]
    if not isinstance(pts, list):
        msg = f"region {rid}: polygon must be a vertex list"
        raise ScenarioError(msg)
    try:
        vs = tuple((float(x), float(y)) for x, y in pts)
    except (TypeError, ValueError):
        msg = f"region {rid}: polygon vertices must be [x, y] pairs"
        raise ScenarioError(msg) from None
    return _check_polygon(rid, vs)


def load_scenario(source) -> Scenario:
    """Parse and validate a scenario from a path, JSON text or dict."""
    if isinstance(source, (str, Path)):
        p = Path(source)
        try:
            # JSON text can exceed the path length limit; such a source is
            # never a file name.
            found = p.exists()
        except OSError:
            found = False
        if found:
            data = json.loads(p.read_text())
        else:
            data = json.loads(str(source))
    else:
        data = source
    if not isinstance(data, dict):
        msg = "scenario must be a JSON object"
        raise ScenarioError(msg)

    unknown = set(data) - _TOP_KEYS
    if unknown:
        msg = f"unknown scenario keys: {sorted(unknown)}"
        raise ScenarioError(msg)
    missing = {"ap", "regions", "edges", "initial", "phi_hard"} - set(data)
    if missing:
        msg = f"scenario misses required keys: {sorted(missing)}"
        raise ScenarioError(msg)

    ap_list = data["ap"]
    if not isinstance(ap_list, list) or len(set(ap_list)) != len(ap_list):
        msg = "ap must be a list of unique proposition names"
        raise ScenarioError(msg)
    aps = frozenset(str(a) for a in ap_list)

    regions = []
    seen_ids = set()
    for spec in data["regions"]:
        rid = spec.get("id")
        if not isinstance(rid, str) or not rid:
            msg = f"region entry without a string id: {spec!r}"
            raise ScenarioError(msg)
        if rid in seen_ids:
            msg = f"duplicate region id {rid!r}"
            raise ScenarioError(msg)
        seen_ids.add(rid)
        labels = frozenset(str(x) for x in spec.get("labels", []))
        if not labels <= aps:
            msg = f"region {rid}: labels {sorted(labels - aps)} not in ap"
            raise ScenarioError(msg)
        regions.append(Region(rid, _parse_shape(rid, spec), labels))

    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            if not interiors_disjoint(regions[i].shape, regions[j].shape):
                msg = (
                    f"regions {regions[i].rid} and {regions[j].rid} have"
                    " overlapping interiors"
                )
                raise ScenarioError(msg)

    by_id = {r.rid: r for r in regions}
    weights: dict[tuple[str, str], float] = {}
    for spec in data["edges"]:
        u, v = spec.get("from"), spec.get("to")
        if u not in by_id or v not in by_id:
            msg = f"edge {u!r}->{v!r} references unknown regions"
            raise ScenarioError(msg)
        if (u, v) in weights:
            msg = f"duplicate edge {u}->{v}"
            raise ScenarioError(msg)
        if "weight" in spec and spec["weight"] is not None:
            w = float(spec["weight"])
        else:
            w = _norm(_sub(centroid(by_id[u].shape), centroid(by_id[v].shape)))
        if not (w > 0.0 and math.isfinite(w)):
            msg = f"edge {u}->{v}: weight must be positive and finite"
            raise ScenarioError(msg)
        weights[(u, v)] = w
        if spec.get("both"):
            if (v, u) in weights:
                msg = f"duplicate edge {v}->{u}"
                raise ScenarioError(msg)
            weights[(v, u)] = w

    # Keep the smallest travel weight at one or above so the unit margin
    # discount used during preference learning can never go negative.
    if weights:
        w_min = min(weights.values())
        if w_min < 1.0:
            weights = {k: w / w_min for k, w in weights.items()}

    initial = data["initial"]
    if initial not in by_id:
        msg = f"initial region {initial!r} does not exist"
        raise ScenarioError(msg)

    phi_hard = parse(str(data["phi_hard"]))
    soft_text = data.get("phi_soft")
    phi_soft = parse(str(soft_text)) if soft_text else None
    for name, f in (("phi_hard", phi_hard), ("phi_soft", phi_soft)):
        if f is not None and not atoms(f) <= aps:
            msg = f"{name} uses atoms {sorted(atoms(f) - aps)} outside ap"
            raise ScenarioError(msg)

    beta0 = float(data.get("beta0", 0.0))
    gamma = float(data.get("gamma", 1.0))
    d_s = float(data.get("d_s", 0.5))
    eps_buffer = float(data.get("eps_buffer", 0.5))
    if beta0 < 0.0 or gamma <= 0.0 or d_s <= 0.0 or eps_buffer <= 0.0:
        msg = "beta0 must be >= 0; gamma, d_s and eps_buffer must be > 0"
        raise ScenarioError(msg)

    ctrl = data.get("controller", {})
    gain = float(ctrl.get("gain", 1.0))
    v_max = float(ctrl.get("v_max", 1.0))
    u_h_max = float(ctrl.get("u_h_max", v_max))
    dt = float(ctrl.get("dt", 0.05))
    if min(gain, v_max, u_h_max, dt) <= 0.0:
        msg = "controller gain, v_max, u_h_max and dt must be positive"
        raise ScenarioError(msg)
    # One tick moves at most dt*(v_max + u_h_max); keeping that under half of
    # d_s means a step can never cross the protective shell, so the distance
    # to trap-inducing regions stays positive for all time.
    if dt * (v_max + u_h_max) > d_s / 2.0:
        msg = (
            f"step bound violated: dt*(v_max + u_h_max) = "
            f"{dt * (v_max + u_h_max):g} exceeds d_s/2 = {d_s / 2.0:g}"
        )
        raise ScenarioError(msg)

    irl = data.get("irl", {})
    lam = float(irl.get("lambda", 0.5))
    theta = float(irl.get("theta", 0.1))
    eps_threshold = float(irl.get("eps_threshold", 0.01))
    max_iters = int(irl.get("max_iters", 200))
    if lam < 0.0 or theta <= 0.0 or eps_threshold <= 0.0 or max_iters < 1:
        msg = "irl parameters out of range"
        raise ScenarioError(msg)
    if theta * lam >= 1.0:
        msg = f"irl step contraction requires theta*lambda < 1, got {theta * lam:g}"
        raise ScenarioError(msg)

    ts = TransitionSystem(
        regions=tuple(regions),
        weights=weights,
        initial=str(initial),
        aps=aps,
    )
    return Scenario(
        name=str(data.get("name", "scenario")),
        ts=ts,
        phi_hard=phi_hard,
        phi_soft=phi_soft,
        beta0=beta0,
        gamma=gamma,
        d_s=d_s,
        eps_buffer=eps_buffer,
        control=ControlParams(gain=gain, v_max=v_max, u_h_max=u_h_max, dt=dt),
        irl=IrlParams(
            lam=lam, theta=theta, eps_threshold=eps_threshold, max_iters=max_iters
        ),
    )


def _shape_dict(shape: Shape) -> dict:
    if isinstance(shape, Disk):
        return {"disk": {"center": list(shape.center), "radius": shape.radius}}
    return {"polygon": [list(v) for v in shape.vertices]}


def scenario_to_dict(sc: Scenario) -> dict:
    """Serialize a scenario back to the loader schema. Feeding the result
    to load_scenario reproduces an equivalent scenario, which lets logs and
    network peers carry a self-contained copy of the model."""
    ts = sc.ts
    edges = []
    emitted: set[tuple[str, str]] = set()
    for (u, v) in sorted(ts.weights):
        if (u, v) in emitted:
            continue
        w = ts.weights[(u, v)]
        both = ts.weights.get((v, u)) == w and (v, u) not in emitted
        edges.append({"from": u, "to": v, "weight": w, "both": both})
        emitted.add((u, v))
        if both:
            emitted.add((v, u))
    return {
        "name": sc.name,
        "ap": sorted(ts.aps),
        "regions": [
            {"id": r.rid, **_shape_dict(r.shape), "labels": sorted(r.labels)}
            for r in ts.regions
        ],
        "edges": edges,
        "initial": ts.initial,
        "phi_hard": to_text(sc.phi_hard),
        "phi_soft": to_text(sc.phi_soft) if sc.phi_soft is not None else None,
        "beta0": sc.beta0,
        "gamma": sc.gamma,
        "d_s": sc.d_s,
        "eps_buffer": sc.eps_buffer,
        "controller": {
            "gain": sc.control.gain,
            "v_max": sc.control.v_max,
            "u_h_max": sc.control.u_h_max,
            "dt": sc.control.dt,
        },
        "irl": {
            "lambda": sc.irl.lam,
            "theta": sc.irl.theta,
            "eps_threshold": sc.irl.eps_threshold,
            "max_iters": sc.irl.max_iters,
        },
    }
