"""Product of the workspace transition system with two Buchi automata.

States are (region, hard state, soft state, stage). Every edge carries a cost
vector [a1, a2, a3]: travel weight (infinite when the workspace has no such
transition), hard-consistency indicator (0 or infinite) and the soft
relaxation distance. a2 is zero exactly when the source region's label takes
a hard transition, the soft pair has a nonempty enabling label set, and the
stage follows the alternation rule that forces both automata to hit their
accepting sets in every accepting cycle.

Infinite cost is math.inf throughout; arithmetic on it saturates and no
finite sentinel is ever used.
"""
from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .ltl.buchi import Nba
from .workspace import TransitionSystem


class ProductState(NamedTuple):
    region: str
    hard: int
    soft: int
    stage: int


CostVector = tuple[float, float, float]


def trivial_soft_automaton(aps) -> Nba:
    """Single accepting state with a true self-loop; relaxation cost zero."""
    from .ltl.buchi import Guard

    return Nba(
        aps=frozenset(aps),
        n_states=1,
        initial=frozenset({0}),
        accepting=frozenset({0}),
        edges={0: ((0, Guard.true()),)},
    )


class ProductAutomaton:
    def __init__(self, ts: TransitionSystem, hard: Nba, soft: Nba) -> None:
        self.ts = ts
        self.hard = hard
        self.soft = soft
        self._succ_memo: dict[ProductState, tuple] = {}
        self._build_tables()

    def with_ts(self, ts: TransitionSystem) -> "ProductAutomaton":
        return ProductAutomaton(ts, self.hard, self.soft)

    # ------------------------------------------------------------------
    # Static move tables. Hard moves depend only on the source region's
    # label; soft moves and their relaxation gaps likewise. Precomputing
    # them keeps successor enumeration a plain cartesian assembly.

    def _build_tables(self) -> None:
        ts, hard, soft = self.ts, self.hard, self.soft
        regions = ts.region_ids()
        self._label = {r: ts.labels_of(r) for r in regions}

        self._hard_fwd: dict[int, dict[str, tuple[int, ...]]] = {}
        self._hard_rev: dict[int, dict[str, list[int]]] = {
            q: {r: [] for r in regions} for q in hard.states
        }
        for q in hard.states:
            per_region = {}
            for r in regions:
                label = self._label[r]
                dsts = sorted(set(hard.successors(q, label)))
                per_region[r] = tuple(dsts)
                for d in dsts:
                    self._hard_rev[d][r].append(q)
            self._hard_fwd[q] = per_region

        self._soft_fwd: dict[int, tuple[tuple[int, dict[str, float]], ...]] = {}
        self._soft_rev: dict[int, list[tuple[int, dict[str, float]]]] = {
            q: [] for q in soft.states
        }
        for q in soft.states:
            outs = []
            for dst, guard in soft.out_edges(q):
                if not guard.satisfiable():
                    continue
                gaps = {r: soft.edge_gap(q, dst, self._label[r]) for r in regions}
                outs.append((dst, gaps))
            merged: dict[int, dict[str, float]] = {}
            for dst, gaps in outs:
                if dst in merged:
                    for r, g in gaps.items():
                        if g < merged[dst][r]:
                            merged[dst][r] = g
                else:
                    merged[dst] = dict(gaps)
            fwd = tuple(sorted(merged.items()))
            self._soft_fwd[q] = fwd
            for dst, gaps in fwd:
                self._soft_rev[dst].append((q, gaps))

        self._rev_neighbors: dict[str, list[tuple[str, float]]] = {
            r: [] for r in regions
        }
        for (u, v), w in ts.weights.items():
            self._rev_neighbors[v].append((u, w))

    # ------------------------------------------------------------------

    def next_stage(self, state: ProductState) -> int:
        if state.stage == 1:
            return 2 if state.hard in self.hard.accepting else 1
        return 1 if state.soft in self.soft.accepting else 2

    def initial_states(self) -> tuple[ProductState, ...]:
        out = [
            ProductState(self.ts.initial, q1, q2, 1)
            for q1 in sorted(self.hard.initial)
            for q2 in sorted(self.soft.initial)
        ]
        return tuple(out)

    def is_accepting(self, state: ProductState) -> bool:
        return state.stage == 1 and state.hard in self.hard.accepting

    def accepting_states(self) -> Iterable[ProductState]:
        for r in self.ts.region_ids():
            for q1 in sorted(self.hard.accepting):
                for q2 in self.soft.states:
                    yield ProductState(r, q1, q2, 1)

    def size(self) -> int:
        return (
            len(self.ts.regions) * self.hard.n_states * self.soft.n_states * 2
        )

    # ------------------------------------------------------------------

    def edge_cost(self, src: ProductState, dst: ProductState) -> CostVector:
        """Cost vector of an arbitrary ordered state pair."""
        a1 = self.ts.weight(src.region, dst.region)
        label = self._label[src.region]
        hard_ok = dst.hard in self._hard_fwd[src.hard][src.region]
        a3 = self.soft.edge_gap(src.soft, dst.soft, label)
        soft_ok = a3 < math.inf
        stage_ok = dst.stage == self.next_stage(src)
        a2 = 0.0 if (hard_ok and soft_ok and stage_ok) else math.inf
        return (a1, a2, a3)

    def successors(
        self, state: ProductState
    ) -> tuple[tuple[ProductState, float, float], ...]:
        """Finite-cost moves: (target, a1, a3) triples, a2 is zero for all."""
        hit = self._succ_memo.get(state)
        if hit is not None:
            return hit
        region, q1, q2, _ = state
        stage = self.next_stage(state)
        hard_dsts = self._hard_fwd[q1][region]
        soft_dsts = self._soft_fwd[q2]
        out = []
        for nr in self.ts.neighbors(region):
            a1 = self.ts.weight(region, nr)
            for h in hard_dsts:
                for s, gaps in soft_dsts:
                    out.append((ProductState(nr, h, s, stage), a1, gaps[region]))
        out.sort(key=lambda e: e[0])
        result = tuple(out)
        self._succ_memo[state] = result
        return result

    def predecessors(
        self, state: ProductState
    ) -> Iterable[tuple[ProductState, float, float]]:
        """Finite-cost reverse moves: (source, a1, a3) triples."""
        for pr, a1 in self._rev_neighbors[state.region]:
            for q2, gaps in self._soft_rev[state.soft]:
                a3 = gaps[pr]
                for q1 in self._hard_rev[state.hard][pr]:
                    for stage in (1, 2):
                        src = ProductState(pr, q1, q2, stage)
                        if self.next_stage(src) == state.stage:
                            yield (src, a1, a3)

    # ------------------------------------------------------------------

    @cached_property
    def alive(self) -> frozenset[ProductState]:
        """States with a finite-cost path to some accepting state, found by
        one backward sweep. The complement within any state set is its trap
        set; membership does not depend on the preference weight."""
        seen: set[ProductState] = set()
        frontier: list[ProductState] = []
        for f in self.accepting_states():
            if f not in seen:
                seen.add(f)
                frontier.append(f)
        while frontier:
            cur = frontier.pop()
            for src, _, _ in self.predecessors(cur):
                if src not in seen:
                    seen.add(src)
                    frontier.append(src)
        return frozenset(seen)

    def trap_set(self, states: Iterable[ProductState]) -> frozenset[ProductState]:
        """Subset of the given belief that cannot reach any accepting state."""
        alive = self.alive
        return frozenset(q for q in states if q not in alive)

    # ------------------------------------------------------------------

    def step_belief(
        self,
        states: Iterable[ProductState],
        next_region: str,
        require_ts_edge: bool = True,
    ) -> frozenset[ProductState]:
        """Belief advance on entry of next_region. With require_ts_edge off
        the workspace transition is treated as present, which models entries
        discovered by the navigation layer rather than predicted by the map."""
        out: set[ProductState] = set()
        for q in states:
            if require_ts_edge and not math.isfinite(
                self.ts.weight(q.region, next_region)
            ):
                continue
            stage = self.next_stage(q)
            for h in self._hard_fwd[q.hard][q.region]:
                for s, _ in self._soft_fwd[q.soft]:
                    out.add(ProductState(next_region, h, s, stage))
        return frozenset(out)

    def reachable_states(self, history: list[str]) -> frozenset[ProductState]:
        """Product states consistent with an observed region history, i.e.
        reachable from the initial set along zero-a2 edges whose region
        projection equals the history."""
        if not history:
            msg = "history must contain at least the initial region"
            raise ValueError(msg)
        belief = frozenset(
            q for q in self.initial_states() if q.region == history[0]
        )
        for region in history[1:]:
            belief = self.step_belief(belief, region)
        return belief

    def unsafe_regions(
        self, belief: Iterable[ProductState]
    ) -> frozenset[str]:
        """Regions whose entry would leave the hard task unsatisfiable no
        matter how the run is continued: every product state consistent with
        stepping the current belief into the region is a trap (an empty
        consistent set means the entry itself breaks the hard automaton)."""
        belief = list(belief)
        if not belief:
            return frozenset(self.ts.region_ids())
        current = belief[0].region
        alive = self.alive
        out = []
        for r in self.ts.region_ids():
            if r == current:
                continue
            entered = self.step_belief(belief, r, require_ts_edge=False)
            if not any(q in alive for q in entered):
                out.append(r)
        return frozenset(out)

    # ------------------------------------------------------------------

    def dump_reachable(self) -> dict:
        """JSON-ready reachable subgraph over finite-cost edges."""
        seen: set[ProductState] = set(self.initial_states())
        order: list[ProductState] = sorted(seen)
        frontier = list(order)
        edges = []
        while frontier:
            q = frontier.pop()
            for t, a1, a3 in self.successors(q):
                edges.append((q, t, a1, a3))
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        index = {q: i for i, q in enumerate(sorted(seen))}
        return {
            "states": [list(q) for q in sorted(seen)],
            "initial": sorted(index[q] for q in self.initial_states()),
            "accepting": sorted(
                index[q] for q in seen if self.is_accepting(q)
            ),
            "edges": [
                {"src": index[q], "dst": index[t], "cost": [a1, 0.0, a3]}
                for (q, t, a1, a3) in sorted(
                    edges, key=lambda e: (index[e[0]], index[e[1]])
                )
            ],
        }
