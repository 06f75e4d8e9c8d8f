"""Nondeterministic Buchi automata over sets of atomic propositions.

Transitions carry guards in disjunctive normal form over the propositions.
The set of labels enabling an edge (its chi set) is materialized lazily and
memoized; the label-to-edge distance used for soft-constraint relaxation has
a closed form per clause, checked against the materialized route in tests.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

Label = frozenset


@dataclass(frozen=True)
class Clause:
    """Conjunction of literals: every atom in pos, no atom in neg."""

    pos: frozenset[str]
    neg: frozenset[str]

    def satisfiable(self) -> bool:
        return not (self.pos & self.neg)

    def satisfies(self, label: Label) -> bool:
        return self.pos <= label and not (label & self.neg)


@dataclass(frozen=True)
class Guard:
    """Disjunction of clauses; the empty disjunction is unsatisfiable."""

    clauses: tuple[Clause, ...]

    @staticmethod
    def true() -> Guard:
        return Guard((Clause(frozenset(), frozenset()),))

    @staticmethod
    def false() -> Guard:
        return Guard(())

    @staticmethod
    def literals(pos=(), neg=()) -> Guard:
        return Guard((Clause(frozenset(pos), frozenset(neg)),))

    def satisfiable(self) -> bool:
        return any(c.satisfiable() for c in self.clauses)

    def satisfies(self, label: Label) -> bool:
        return any(c.satisfiable() and c.satisfies(label) for c in self.clauses)

    def to_text(self) -> str:
        if not self.clauses:
            return "false"
        parts = []
        for c in self.clauses:
            lits = [*sorted(c.pos)] + ["!" + a for a in sorted(c.neg)]
            parts.append(" && ".join(lits) if lits else "true")
        return " || ".join(parts)


def _clause_gap(c: Clause, label: Label) -> int:
    # Nearest label satisfying c keeps everything in label except label&neg
    # (take pos | (label - neg)), so the dropped-atom count is |label & neg|.
    return len(label & c.neg)


@dataclass
class Nba:
    """States are dense ints; edges[src] lists (dst, guard) pairs sorted by dst."""

    aps: frozenset[str]
    n_states: int
    initial: frozenset[int]
    accepting: frozenset[int]
    edges: dict[int, tuple[tuple[int, "Guard"], ...]]
    _chi_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.initial:
            msg = "automaton must have at least one initial state"
            raise ValueError(msg)
        for src, outs in self.edges.items():
            if not 0 <= src < self.n_states:
                msg = f"edge source {src} out of range"
                raise ValueError(msg)
            for dst, _ in outs:
                if not 0 <= dst < self.n_states:
                    msg = f"edge target {dst} out of range"
                    raise ValueError(msg)

    @property
    def states(self) -> range:
        return range(self.n_states)

    def out_edges(self, src: int) -> tuple[tuple[int, Guard], ...]:
        return self.edges.get(src, ())

    def guard(self, src: int, dst: int) -> Guard:
        """Single guard collecting every (src, dst) edge clause."""
        clauses = []
        for e_dst, g in self.out_edges(src):
            if e_dst == dst:
                clauses.extend(g.clauses)
        return Guard(tuple(clauses))

    def successors(self, src: int, label: Label):
        for dst, g in self.out_edges(src):
            if g.satisfies(label):
                yield dst

    def has_satisfiable_edge(self, src: int, dst: int) -> bool:
        return any(
            e_dst == dst and g.satisfiable() for e_dst, g in self.out_edges(src)
        )

    def chi(self, src: int, dst: int) -> frozenset[Label]:
        """All labels in 2^aps enabling the (src, dst) edge. Memoized; the
        enumeration is exponential in |aps|, callers with wide alphabets
        should prefer edge_gap."""
        key = (src, dst)
        hit = self._chi_cache.get(key)
        if hit is not None:
            return hit
        g = self.guard(src, dst)
        items = sorted(self.aps)
        out = set()
        for r in range(len(items) + 1):
            for combo in itertools.combinations(items, r):
                label = frozenset(combo)
                if g.satisfies(label):
                    out.add(label)
        result = frozenset(out)
        self._chi_cache[key] = result
        return result

    def edge_gap(self, src: int, dst: int, label: Label) -> float:
        """dist(label, chi(src, dst)) computed from guards in O(clauses)."""
        best = math.inf
        for e_dst, g in self.out_edges(src):
            if e_dst != dst:
                continue
            for c in g.clauses:
                if not c.satisfiable():
                    continue
                gap = _clause_gap(c, label)
                if gap < best:
                    best = gap
                    if best == 0:
                        return 0
        return best


def dist(label: Label, chi_set: frozenset[Label]) -> float:
    """Fewest atoms of label that must be dropped to land in chi_set;
    0 when label already belongs, infinity when chi_set is empty."""
    if label in chi_set:
        return 0
    best = math.inf
    for other in chi_set:
        gap = len(label - other)
        if gap < best:
            best = gap
    return best


def dump_nba(nba: Nba) -> dict:
    """JSON-ready description: states, initial, accepting, guarded edges."""
    edges = []
    for src in sorted(nba.edges):
        for dst, g in nba.edges[src]:
            edges.append({"src": src, "dst": dst, "guard": g.to_text()})
    return {
        "aps": sorted(nba.aps),
        "states": nba.n_states,
        "initial": sorted(nba.initial),
        "accepting": sorted(nba.accepting),
        "edges": edges,
    }
