"""Optimal prefix-suffix planning over the product automaton.

A plan is a finite prefix into an accepting state followed by a cycle back to
it, executed forever. Costs combine travel weight and the preference-weighted
soft relaxation distance per edge; the suffix is discounted by gamma. The
searches are heap-based with a deterministic tie rule: lexicographic on
(cost, edge count), residual ties resolved by smallest parent state key at
settle time, so equal inputs always reproduce the same run.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import NoAcceptingRun, NoFeasibleInsertion
from .product import ProductAutomaton, ProductState

CostVector = tuple[float, float, float]


@dataclass(frozen=True)
class AcceptingRun:
    """prefix q1..qS, then the suffix cycle q(S+1)..q(S+F) repeated, with the
    wrap edge q(S+F) -> q(S+1). The suffix head is accepting. The prefix may
    be empty when an initial state itself heads the cycle. pre_delta sums the
    prefix edges including the connecting edge into the suffix head;
    suf_delta sums one full lap including the wrap edge."""

    prefix: tuple[ProductState, ...]
    suffix: tuple[ProductState, ...]
    pre_delta: CostVector
    suf_delta: CostVector

    def states(self) -> tuple[ProductState, ...]:
        return self.prefix + self.suffix

    def regions(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return (
            tuple(q.region for q in self.prefix),
            tuple(q.region for q in self.suffix),
        )


def _combine(delta: CostVector, beta: float) -> float:
    a1, a2, a3 = delta
    if math.isinf(a1) or math.isinf(a2):
        return math.inf
    return a1 + a2 + (beta * a3 if a3 else 0.0)


def total_cost(run: AcceptingRun, beta: float, gamma: float = 1.0) -> float:
    return _combine(run.pre_delta, beta) + gamma * _combine(run.suf_delta, beta)


def _sum_deltas(pa: ProductAutomaton, seq: Iterable[ProductState]) -> CostVector:
    a1 = a2 = a3 = 0.0
    prev: Optional[ProductState] = None
    for q in seq:
        if prev is not None:
            e1, e2, e3 = pa.edge_cost(prev, q)
            a1 += e1
            a2 += e2
            a3 += e3
        prev = q
    return (a1, a2, a3)


def run_deltas(pa: ProductAutomaton, run: AcceptingRun) -> tuple[CostVector, CostVector]:
    """Recompute both accumulated cost vectors from the product edges."""
    pre = _sum_deltas(pa, (*run.prefix, run.suffix[0]))
    suf = _sum_deltas(pa, (*run.suffix, run.suffix[0]))
    return pre, suf


class _Search:
    __slots__ = ("cost", "hops", "parent", "complete")

    def __init__(self) -> None:
        self.cost: dict = {}
        self.hops: dict = {}
        self.parent: dict = {}
        self.complete = True

    def path_to(self, t) -> list:
        out = [t]
        while True:
            p = self.parent[out[-1]]
            if p is None:
                break
            out.append(p)
        out.reverse()
        return out


def _shortest(
    sources: Iterable,
    succ: Callable,
    *,
    bound: Optional[float] = None,
    targets: Optional[set] = None,
    heuristic: Optional[Callable] = None,
    seeds: Optional[Iterable[tuple]] = None,
) -> _Search:
    """Multi-source heap search. succ(state) yields (target, weight) with
    weight >= 0; edges with zero weight are fine because the edge count is a
    strictly increasing secondary key. Stops early once every target is
    settled, or once the frontier exceeds bound (marked incomplete).

    heuristic(state), when given, must be a consistent lower bound on the
    remaining distance; priorities become cost + heuristic while recorded
    costs stay exact. seeds, when given, replaces sources with (state, cost)
    pairs carrying nonzero starting costs."""
    res = _Search()
    best: dict = {}
    settled: set = set()
    h = heuristic if heuristic is not None else (lambda _: 0.0)
    heap = []
    seed_iter = seeds if seeds is not None else ((s, 0.0) for s in sources)
    for s, c0 in seed_iter:
        cur = best.get(s)
        if cur is None or (c0, 0) < cur[:2]:
            hs = h(s)
            if math.isinf(hs):
                continue
            best[s] = (c0, 0, None)
            heapq.heappush(heap, (c0 + hs, 0, s))
    waiting = set(targets) if targets else None
    while heap:
        key, hp, u = heapq.heappop(heap)
        if u in settled:
            continue
        bc, bh, bp = best[u]
        if (key, hp) != (bc + h(u), bh):
            continue
        if bound is not None and key > bound:
            res.complete = False
            break
        settled.add(u)
        res.cost[u] = bc
        res.hops[u] = bh
        res.parent[u] = bp
        if waiting is not None:
            waiting.discard(u)
            if not waiting:
                break
        for v, w in succ(u):
            if v in settled:
                continue
            cand = (bc + w, bh + 1)
            cur = best.get(v)
            if cur is None or cand < cur[:2]:
                hv = h(v)
                if math.isinf(hv):
                    continue
                best[v] = (cand[0], cand[1], u)
                heapq.heappush(heap, (cand[0] + hv, cand[1], v))
            elif cand == cur[:2] and cur[2] is not None and u < cur[2]:
                best[v] = (cand[0], cand[1], u)
    return res


def _weighted_succ(pa: ProductAutomaton, beta: float) -> Callable:
    def succ(q: ProductState):
        for t, a1, a3 in pa.successors(q):
            yield t, (a1 + beta * a3 if a3 else a1)

    return succ


def _weighted_pred(pa: ProductAutomaton, beta: float) -> Callable:
    def pred(q: ProductState):
        for s, a1, a3 in pa.predecessors(q):
            yield s, (a1 + beta * a3 if a3 else a1)

    return pred


def _abs_graph(pa: ProductAutomaton):
    """Relaxation of the product onto (region, hard-state) pairs, keeping
    travel weight only. Every product path projects onto an abstract path of
    no greater weight, so single-target distances in this graph are
    consistent heuristics for goal-directed product searches. Cached per
    product instance; the abstraction ignores beta, the soft automaton and
    the stage counter."""
    hit = pa.__dict__.get("_abs_graph")
    if hit is not None:
        return hit
    rev: dict = {}
    for r in pa.ts.region_ids():
        for q1 in pa.hard.states:
            dsts = pa._hard_fwd[q1][r]
            if not dsts:
                continue
            for nr in pa.ts.neighbors(r):
                a1 = pa.ts.weight(r, nr)
                for d in dsts:
                    rev.setdefault((nr, d), []).append(((r, q1), a1))
    pa.__dict__["_abs_graph"] = rev
    return rev


def _abs_dist_to(pa: ProductAutomaton, r: str, q1: int) -> dict:
    """Distance from every (region, hard) pair to the given one in the
    abstract relaxation; infinity when absent."""
    cache = pa.__dict__.setdefault("_abs_dist", {})
    hit = cache.get((r, q1))
    if hit is not None:
        return hit
    rev = _abs_graph(pa)
    dist = {(r, q1): 0.0}
    heap = [(0.0, (r, q1))]
    while heap:
        c, u = heapq.heappop(heap)
        if c > dist.get(u, math.inf):
            continue
        for v, w in rev.get(u, ()):
            nc = c + w
            if nc < dist.get(v, math.inf):
                dist[v] = nc
                heapq.heappush(heap, (nc, v))
    cache[(r, q1)] = dist
    return dist


def _cycle_through(
    pa: ProductAutomaton, f: ProductState, beta: float, bound: Optional[float]
):
    """Cheapest cycle f -> ... -> f with at least one edge, found by a
    goal-directed search from f's successors back to f (the first edge's
    weight rides along as the seed cost). Returns (cost, hops,
    states-without-final-f) or None. Results live on the product instance,
    so a model revision (which rebuilds the product) drops them."""
    cache = pa.__dict__.setdefault("_cycle_cache", {})
    key = (beta, f)
    hit = cache.get(key)
    if hit is not None:
        return hit if hit != "none" else None

    hmap = _abs_dist_to(pa, f.region, f.hard)

    def h(q):
        return hmap.get((q.region, q.hard), math.inf)

    seeds = []
    for v, a1, a3 in pa.successors(f):
        w0 = a1 + beta * a3 if a3 else a1
        seeds.append((v, w0))
    if not seeds:
        cache[key] = "none"
        return None

    def succ(q):
        for t, a1, a3 in pa.successors(q):
            yield t, (a1 + beta * a3 if a3 else a1)

    res = _shortest(
        (), succ, bound=bound, targets={f}, heuristic=h, seeds=seeds
    )
    if f not in res.cost:
        if res.complete:
            cache[key] = "none"
        return None
    path = res.path_to(f)  # first successor ... f
    cyc = (res.cost[f], res.hops[f] + 1, (f, *path[:-1]))
    cache[key] = cyc
    return cyc


def synthesize_from(
    pa: ProductAutomaton,
    sources: Iterable[ProductState],
    beta: float,
    gamma: float = 1.0,
) -> AcceptingRun:
    """Cheapest accepting prefix-suffix run rooted at any of the sources."""
    if beta < 0.0:
        msg = f"preference weight must be nonnegative, got {beta}"
        raise ValueError(msg)
    sources = list(sources)
    fwd = _shortest(sources, _weighted_succ(pa, beta))
    candidates = sorted(
        (c, f) for f, c in fwd.cost.items() if pa.is_accepting(f)
    )
    if not candidates:
        raise NoAcceptingRun("no accepting state is reachable")

    w_min = pa.ts.min_weight()
    best = None  # (total, hops, f, cyc)
    for pre_cost, f in candidates:
        if best is not None and pre_cost + gamma * w_min > best[0]:
            break
        bound = None if best is None else (best[0] - pre_cost) / gamma
        cyc = _cycle_through(pa, f, beta, bound)
        if cyc is None:
            continue
        total = pre_cost + gamma * cyc[0]
        hops = fwd.hops[f] + cyc[1]
        cand = (total, hops, f, cyc)
        if best is None or cand[:3] < best[:3]:
            best = cand
    if best is None:
        raise NoAcceptingRun("no reachable accepting state lies on a cycle")

    _, _, f, cyc = best
    pre_path = fwd.path_to(f)
    run = AcceptingRun(
        prefix=tuple(pre_path[:-1]),
        suffix=cyc[2],
        pre_delta=(0.0, 0.0, 0.0),
        suf_delta=(0.0, 0.0, 0.0),
    )
    pre, suf = run_deltas(pa, run)
    return AcceptingRun(run.prefix, run.suffix, pre, suf)


def synthesize(pa: ProductAutomaton, beta: float, gamma: float = 1.0) -> AcceptingRun:
    return synthesize_from(pa, pa.initial_states(), beta, gamma)


def revise(
    pa: ProductAutomaton,
    belief: Iterable[ProductState],
    beta: float,
    gamma: float = 1.0,
) -> AcceptingRun:
    """Re-synthesis rooted at every state consistent with the history; the
    returned run is the global cost argmin over those roots."""
    belief = list(belief)
    if not belief:
        raise NoAcceptingRun("empty belief: the observed trace is inconsistent")
    return synthesize_from(pa, belief, beta, gamma)


def validate_run(
    pa: ProductAutomaton, run: AcceptingRun, beta: float = 0.0
) -> None:
    """Raises AssertionError when the run violates its structural contract."""
    assert run.suffix, "suffix must be nonempty"
    assert pa.is_accepting(run.suffix[0]), "suffix head must be accepting"
    seq = [*run.prefix, *run.suffix, run.suffix[0]]
    for a, b in zip(seq, seq[1:]):
        a1, a2, _ = pa.edge_cost(a, b)
        assert math.isfinite(a1), f"missing workspace edge {a} -> {b}"
        assert a2 == 0.0, f"hard-inconsistent edge {a} -> {b}"
    assert math.isfinite(total_cost(run, beta)), "run cost must be finite"


# ---------------------------------------------------------------------------
# Temporary task insertion.


@dataclass(frozen=True)
class TempTask:
    pickup: str
    dropoff: str
    deadline_s: float  # relative to assignment
    assigned_at: float = 0.0


@dataclass(frozen=True)
class Insertion:
    run: AcceptingRun
    k_s: int
    k_g: int
    delay: float  # predicted completion time minus the deadline
    delta_cost: float


def _linearize(run: AcceptingRun, cursor: int) -> list[ProductState]:
    n_pre = len(run.prefix)
    if cursor < 0 or cursor >= n_pre + len(run.suffix):
        msg = f"cursor {cursor} outside the run"
        raise ValueError(msg)
    if cursor < n_pre:
        return [*run.prefix[cursor:], *run.suffix]
    j = cursor - n_pre
    return [*run.suffix[j:], *run.suffix]


def insert_temp_task(
    pa: ProductAutomaton,
    run: AcceptingRun,
    cursor: int,
    task: TempTask,
    beta: float,
    gamma: float = 1.0,
    v_max: float = 1.0,
    now: Optional[float] = None,
) -> Insertion:
    """Splice round-trip detours to the pickup and dropoff regions into the
    remaining run (rest of the prefix plus one unrolled suffix lap, leaving
    the periodic suffix untouched).

    Candidates are ordered index pairs k_s < k_g; each index contributes the
    cheapest go-and-return product path to a state of the requested region,
    zero when the run already stands there. Selection happens in two stages:
    among deadline-feasible candidates the added cost is minimized; when none
    is feasible the sum of predicted lateness and added cost is minimized.
    Ties fall to the smaller (k_s, k_g).
    """
    for rid in (task.pickup, task.dropoff):
        if not pa.ts.has_region(rid):
            msg = f"unknown region {rid!r}"
            raise ValueError(msg)
    if task.deadline_s <= 0.0:
        msg = "deadline must be positive"
        raise ValueError(msg)
    if now is None:
        now = task.assigned_at

    linear = _linearize(run, cursor)

    # Round-trip data per distinct linear state: cost, travel weights and the
    # detour state sequences for both requested regions.
    trips: dict[ProductState, dict[str, Optional[_Trip]]] = {}
    for q in dict.fromkeys(linear):
        trips[q] = {
            task.pickup: _round_trip(pa, q, task.pickup, beta),
            task.dropoff: _round_trip(pa, q, task.dropoff, beta),
        }

    leg_a1 = [0.0]
    for a, b in zip(linear, linear[1:]):
        leg_a1.append(leg_a1[-1] + pa.edge_cost(a, b)[0])

    already_late = now - task.assigned_at - task.deadline_s

    stage1 = None  # (delta_cost, k_s, k_g, delay)
    stage2 = None  # (lateness + delta_cost, k_s, k_g, delay, delta_cost)
    for k_s in range(len(linear) - 1):
        trip_s = trips[linear[k_s]][task.pickup]
        if trip_s is None:
            continue
        for k_g in range(k_s + 1, len(linear)):
            trip_g = trips[linear[k_g]][task.dropoff]
            if trip_g is None:
                continue
            delta_cost = trip_s.cost + trip_g.cost
            t_go = (leg_a1[k_g] + trip_s.a1_round + trip_g.a1_out) / v_max
            delay = already_late + t_go
            if delay <= 0.0:
                cand = (delta_cost, k_s, k_g, delay)
                if stage1 is None or cand < stage1:
                    stage1 = cand
            value = max(0.0, delay) + delta_cost
            cand2 = (value, k_s, k_g, delay, delta_cost)
            if stage2 is None or cand2 < stage2:
                stage2 = cand2

    if stage1 is not None:
        delta_cost, k_s, k_g, delay = stage1
    elif stage2 is not None:
        _, k_s, k_g, delay, delta_cost = stage2
    else:
        raise NoFeasibleInsertion(
            f"no hard-consistent detour reaches {task.pickup} then {task.dropoff}"
        )

    new_prefix = []
    for i, q in enumerate(linear):
        new_prefix.append(q)
        if i == k_s:
            new_prefix.extend(trips[q][task.pickup].detour)
        if i == k_g:
            new_prefix.extend(trips[q][task.dropoff].detour)
    candidate = AcceptingRun(
        prefix=tuple(new_prefix),
        suffix=run.suffix,
        pre_delta=(0.0, 0.0, 0.0),
        suf_delta=(0.0, 0.0, 0.0),
    )
    pre, suf = run_deltas(pa, candidate)
    new_run = AcceptingRun(candidate.prefix, candidate.suffix, pre, suf)
    return Insertion(new_run, k_s, k_g, delay, delta_cost)


@dataclass(frozen=True)
class _Trip:
    cost: float
    a1_round: float
    a1_out: float
    detour: tuple[ProductState, ...]  # states after the anchor, ending at it


def _abs2_dist(pa: ProductAutomaton, cross: str, tr: str, tq1: int) -> dict:
    """Heuristic table for round-trip searches: distance from every
    (phase, region, hard) node to (1, tr, tq1) in the phase-doubled abstract
    relaxation, where phase 0 turns into phase 1 by standing in the cross
    region at no charge."""
    cache = pa.__dict__.setdefault("_abs2_dist", {})
    key = (cross, tr, tq1)
    hit = cache.get(key)
    if hit is not None:
        return hit
    rev = _abs_graph(pa)
    dist = {(1, tr, tq1): 0.0}
    heap = [(0.0, (1, tr, tq1))]
    while heap:
        c, node = heapq.heappop(heap)
        if c > dist.get(node, math.inf):
            continue
        ph, r, q1 = node
        for (pr, pq1), w in rev.get((r, q1), ()):
            v = (ph, pr, pq1)
            nc = c + w
            if nc < dist.get(v, math.inf):
                dist[v] = nc
                heapq.heappush(heap, (nc, v))
        if ph == 1 and r == cross:
            v = (0, r, q1)
            if c < dist.get(v, math.inf):
                dist[v] = c
                heapq.heappush(heap, (c, v))
    cache[key] = dist
    return dist


def _round_trip(
    pa: ProductAutomaton, anchor: ProductState, region: str, beta: float
) -> Optional[_Trip]:
    """Cheapest detour that leaves the anchor state, stands in some product
    state of the requested region, and returns to the anchor. Zero-length
    when the anchor already stands there. Found as a single goal-directed
    search on the phase-doubled product."""
    hmap = _abs2_dist(pa, region, anchor.region, anchor.hard)

    def h(node):
        s, ph = node
        return hmap.get((ph, s.region, s.hard), math.inf)

    def succ(node):
        s, ph = node
        for t, a1, a3 in pa.successors(s):
            yield (t, ph), (a1 + beta * a3 if a3 else a1)
        if ph == 0 and s.region == region:
            yield (s, 1), 0.0

    goal = (anchor, 1)
    res = _shortest([(anchor, 0)], succ, targets={goal}, heuristic=h)
    if goal not in res.cost:
        return None
    path = res.path_to(goal)
    detour = []
    a1_round = 0.0
    a1_out = None
    for prev, node in zip(path, path[1:]):
        if prev[0] == node[0] and prev[1] != node[1]:
            a1_out = a1_round  # the phase flip marks the visit
            continue
        a1_round += pa.edge_cost(prev[0], node[0])[0]
        detour.append(node[0])
    assert a1_out is not None
    return _Trip(
        cost=res.cost[goal],
        a1_round=a1_round,
        a1_out=a1_out,
        detour=tuple(detour),
    )
