"""Learning the preference weight from operator demonstrations.

A guided segment gives a region trace. The trace is lifted to the cheapest
consistent product path (minimal accumulated relaxation, since the travel
part is fixed by the regions). The weight is then driven by a projected
subgradient of a margin objective: the demonstration should beat every other
run between the same endpoints by one unit per differing edge. Travel
weights are kept at one or above by the scenario loader, which makes the
unit margin a plain weight shift instead of a clipped one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import TraceLiftError
from .planner import _shortest
from .product import ProductAutomaton, ProductState
from .workspace import IrlParams


@dataclass(frozen=True)
class LiftedTrace:
    states: tuple[ProductState, ...]
    a1_sum: float
    a3_sum: float

    def edges(self) -> frozenset[tuple[ProductState, ProductState]]:
        return frozenset(zip(self.states, self.states[1:]))


def lift_trace(
    pa: ProductAutomaton,
    trace: Sequence[str],
    anchor: Optional[Iterable[ProductState]] = None,
) -> LiftedTrace:
    """Cheapest product interpretation of a region trace. The first region
    is matched against the anchor states (the belief when guidance began);
    without an anchor the trace is read from mission start. All
    interpretations share the same travel cost, so only the relaxation sum
    is minimized; ties fall to the smallest parent state."""
    trace = list(trace)
    if not trace:
        raise TraceLiftError("empty trace")
    for a, b in zip(trace, trace[1:]):
        if a == b:
            msg = "trace must not repeat a region consecutively"
            raise TraceLiftError(msg)
    pool = pa.initial_states() if anchor is None else anchor
    layer: dict[ProductState, tuple[float, Optional[ProductState]]] = {}
    for s in sorted(pool):
        if s.region == trace[0]:
            layer[s] = (0.0, None)
    if not layer:
        msg = f"no starting product state stands in {trace[0]!r}"
        raise TraceLiftError(msg)
    layers = [layer]
    for i, rid in enumerate(trace[1:], start=1):
        nxt: dict[ProductState, tuple[float, Optional[ProductState]]] = {}
        for s in sorted(layers[-1]):
            c = layers[-1][s][0]
            for t, _, a3 in pa.successors(s):
                if t.region != rid:
                    continue
                cand = c + a3
                cur = nxt.get(t)
                if cur is None or cand < cur[0]:
                    nxt[t] = (cand, s)
        if not nxt:
            msg = (
                f"trace step {i} ({trace[i - 1]!r} -> {rid!r}) has no"
                " consistent product move"
            )
            raise TraceLiftError(msg)
        layers.append(nxt)

    end = min(layers[-1], key=lambda s: (layers[-1][s][0], s))
    states = [end]
    for i in range(len(layers) - 1, 0, -1):
        states.append(layers[i][states[-1]][1])
    states.reverse()
    a1 = a3 = 0.0
    for a, b in zip(states, states[1:]):
        e1, _, e3 = pa.edge_cost(a, b)
        a1 += e1
        a3 += e3
    return LiftedTrace(tuple(states), a1, a3)


def margin_optimal_run(
    pa: ProductAutomaton,
    start: ProductState,
    goal: ProductState,
    beta: float,
    shared: frozenset[tuple[ProductState, ProductState]],
    bound: Optional[float] = None,
) -> tuple[tuple[ProductState, ...], float, float]:
    """Cheapest product path start -> goal under the margin-discounted
    weight: each edge costs its planning weight minus one unless the
    demonstration uses the same edge. Returns (states, a3_sum,
    discounted_cost)."""

    def succ(q):
        for t, a1, a3 in pa.successors(q):
            w = a1 + beta * a3 if a3 else a1
            if (q, t) not in shared:
                w = w - 1.0
                if w < 0.0:
                    w = 0.0
            yield t, w

    res = _shortest([start], succ, targets={goal}, bound=bound)
    if goal not in res.cost:
        msg = f"no product path from {start} to {goal}"
        raise TraceLiftError(msg)
    states = tuple(res.path_to(goal))
    a3 = 0.0
    for a, b in zip(states, states[1:]):
        a3 += pa.edge_cost(a, b)[2]
    return states, a3, res.cost[goal]


@dataclass(frozen=True)
class LearnStep:
    k: int
    beta: float
    grad: float
    a3_demo: float
    a3_model: float


@dataclass(frozen=True)
class LearnResult:
    beta: float
    steps: tuple[LearnStep, ...]
    converged: bool
    lift: LiftedTrace


def learn_beta(
    pa: ProductAutomaton,
    trace: Sequence[str],
    beta0: float,
    params: IrlParams,
    anchor: Optional[Iterable[ProductState]] = None,
) -> LearnResult:
    """Projected subgradient descent on the margin objective. The update is
    beta <- max(0, beta - theta * (lambda * beta + a3(demo) - a3(model)));
    a demonstration dirtier than the model's guess pushes beta down, a
    cleaner one pushes it up. Stops when the step falls to eps_threshold."""
    lift = lift_trace(pa, trace, anchor)
    shared = lift.edges()
    start, goal = lift.states[0], lift.states[-1]
    demo_a3 = lift.a3_sum

    beta = beta0
    steps = []
    converged = False
    for k in range(params.max_iters):
        # The demonstration itself is a valid path, so its undiscounted
        # weight bounds the search; the slack absorbs summation-order noise.
        demo_w = lift.a1_sum + beta * demo_a3 + 1e-9
        _, model_a3, _ = margin_optimal_run(
            pa, start, goal, beta, shared, bound=demo_w
        )
        grad = params.lam * beta + (demo_a3 - model_a3)
        new_beta = beta - params.theta * grad
        if new_beta < 0.0:
            new_beta = 0.0
        steps.append(LearnStep(k, beta, grad, demo_a3, model_a3))
        delta = abs(new_beta - beta)
        beta = new_beta
        if delta <= params.eps_threshold:
            converged = True
            break
    return LearnResult(beta, tuple(steps), converged, lift)
