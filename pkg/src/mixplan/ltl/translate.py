"""Formula to Buchi automaton translation.

Pipeline: negation normal form -> on-the-fly tableau expansion into a
generalized automaton with one acceptance set per until subformula ->
counter-based degeneralization -> reachable/dead state pruning. No
simulation-based minimization; pruning only drops states that cannot lie on
an accepting lasso.

Node expansion follows the classic tableau scheme: each node carries the
obligations still to split (new), the ones already recorded (old) and the
ones deferred one step (next); nodes with identical (old, next) merge.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .ast import (
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Top,
    Until,
    atoms,
)
from .buchi import Clause, Guard, Nba


# Negation normal form nodes; release is required as the dual of until.
@dataclass(frozen=True)
class _TT:
    pass


@dataclass(frozen=True)
class _FF:
    pass


@dataclass(frozen=True)
class _Lit:
    name: str
    negated: bool


@dataclass(frozen=True)
class _And:
    left: "_N"
    right: "_N"


@dataclass(frozen=True)
class _Or:
    left: "_N"
    right: "_N"


@dataclass(frozen=True)
class _X:
    op: "_N"


@dataclass(frozen=True)
class _U:
    left: "_N"
    right: "_N"


@dataclass(frozen=True)
class _R:
    left: "_N"
    right: "_N"


_N = Union[_TT, _FF, _Lit, _And, _Or, _X, _U, _R]

_TRUE = _TT()
_FALSE = _FF()


def _nnf(f: Formula, negated: bool) -> _N:
    if isinstance(f, Top):
        return _FALSE if negated else _TRUE
    if isinstance(f, Atom):
        return _Lit(f.name, negated)
    if isinstance(f, Not):
        return _nnf(f.operand, not negated)
    if isinstance(f, And):
        a, b = _nnf(f.left, negated), _nnf(f.right, negated)
        return _Or(a, b) if negated else _And(a, b)
    if isinstance(f, Or):
        a, b = _nnf(f.left, negated), _nnf(f.right, negated)
        return _And(a, b) if negated else _Or(a, b)
    if isinstance(f, Implies):
        a, b = _nnf(f.left, not negated), _nnf(f.right, negated)
        return _And(a, b) if negated else _Or(a, b)
    if isinstance(f, Next):
        return _X(_nnf(f.operand, negated))
    if isinstance(f, Until):
        a, b = _nnf(f.left, negated), _nnf(f.right, negated)
        return _R(a, b) if negated else _U(a, b)
    if isinstance(f, Eventually):
        inner = _nnf(f.operand, negated)
        return _R(_FALSE, inner) if negated else _U(_TRUE, inner)
    if isinstance(f, Always):
        inner = _nnf(f.operand, negated)
        return _U(_TRUE, inner) if negated else _R(_FALSE, inner)
    msg = f"not a formula node: {f!r}"
    raise TypeError(msg)


def _key(g: _N) -> tuple:
    """Total order over normal-form nodes; drives every set iteration."""
    if isinstance(g, _TT):
        return (0,)
    if isinstance(g, _FF):
        return (1,)
    if isinstance(g, _Lit):
        return (2, g.name, g.negated)
    if isinstance(g, _And):
        return (3, _key(g.left), _key(g.right))
    if isinstance(g, _Or):
        return (4, _key(g.left), _key(g.right))
    if isinstance(g, _X):
        return (5, _key(g.op))
    if isinstance(g, _U):
        return (6, _key(g.left), _key(g.right))
    if isinstance(g, _R):
        return (7, _key(g.left), _key(g.right))
    msg = f"not a normal-form node: {g!r}"
    raise TypeError(msg)


def _until_subformulas(root: _N) -> list[_U]:
    seen = set()
    out = []

    def walk(g: _N) -> None:
        if g in seen:
            return
        seen.add(g)
        if isinstance(g, _U):
            out.append(g)
        if isinstance(g, (_And, _Or, _U, _R)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, _X):
            walk(g.op)

    walk(root)
    out.sort(key=_key)
    return out


class _Node:
    __slots__ = ("incoming", "new", "old", "nxt")

    def __init__(self, incoming, new, old, nxt) -> None:
        self.incoming = incoming
        self.new = new
        self.old = old
        self.nxt = nxt


def _expand_tableau(root: _N):
    """Returns (nodes, incoming) where nodes[i] is the finalized
    (old, next) pair of state i+1 and incoming[i] its source-state ids;
    state 0 is the virtual initial state."""
    done_keys: dict[tuple, int] = {}
    done_old: list[frozenset] = []
    done_nxt: list[frozenset] = []
    done_inc: list[set[int]] = []

    stack = [_Node({0}, {root}, set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            old = frozenset(node.old)
            nxt = frozenset(node.nxt)
            sig = (
                tuple(sorted((_key(g) for g in old))),
                tuple(sorted((_key(g) for g in nxt))),
            )
            hit = done_keys.get(sig)
            if hit is not None:
                done_inc[hit] |= node.incoming
                continue
            nid = len(done_old) + 1
            done_keys[sig] = nid - 1
            done_old.append(old)
            done_nxt.append(nxt)
            done_inc.append(set(node.incoming))
            stack.append(_Node({nid}, set(nxt), set(), set()))
            continue

        eta = min(node.new, key=_key)
        node.new.discard(eta)
        if isinstance(eta, _TT):
            stack.append(node)
        elif isinstance(eta, _FF):
            continue
        elif isinstance(eta, _Lit):
            if _Lit(eta.name, not eta.negated) in node.old:
                continue
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, _And):
            for part in (eta.left, eta.right):
                if part not in node.old:
                    node.new.add(part)
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, _X):
            node.nxt.add(eta.op)
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, (_Or, _U, _R)):
            if isinstance(eta, _Or):
                curr1, nxt1, curr2 = {eta.left}, set(), {eta.right}
            elif isinstance(eta, _U):
                curr1, nxt1, curr2 = {eta.left}, {eta}, {eta.right}
            else:
                curr1, nxt1, curr2 = {eta.right}, {eta}, {eta.left, eta.right}
            second = _Node(
                set(node.incoming),
                node.new | {g for g in curr2 if g not in node.old},
                node.old | {eta},
                set(node.nxt),
            )
            node.new |= {g for g in curr1 if g not in node.old}
            node.old.add(eta)
            node.nxt |= nxt1
            stack.append(second)
            stack.append(node)
        else:  # pragma: no cover
            msg = f"not a normal-form node: {eta!r}"
            raise TypeError(msg)

    return done_old, done_nxt, done_inc


def translate(f: Formula, aps=None) -> Nba:
    """Automaton whose language is exactly the words satisfying f.

    aps widens the alphabet beyond the formula's own atoms; guards never
    mention the extra atoms but chi materialization ranges over all of them.
    """
    needed = atoms(f)
    alphabet = frozenset(needed if aps is None else aps)
    if not needed <= alphabet:
        msg = f"alphabet {sorted(alphabet)} misses atoms {sorted(needed - alphabet)}"
        raise ValueError(msg)

    root = _nnf(f, False)
    done_old, done_nxt, done_inc = _expand_tableau(root)
    untils = _until_subformulas(root)

    n_nodes = len(done_old) + 1  # node 0 is the virtual initial state

    def node_guard(i: int) -> Guard:
        old = done_old[i - 1]
        pos = frozenset(g.name for g in old if isinstance(g, _Lit) and not g.negated)
        neg = frozenset(g.name for g in old if isinstance(g, _Lit) and g.negated)
        return Guard((Clause(pos, neg),))

    gba_edges: dict[int, list[int]] = {s: [] for s in range(n_nodes)}
    for i in range(1, n_nodes):
        for src in done_inc[i - 1]:
            gba_edges[src].append(i)
    for src in gba_edges:
        gba_edges[src].sort()

    if untils:
        acc_sets = []
        for u in untils:
            members = {0}  # the virtual initial state carries no obligations
            for i in range(1, n_nodes):
                old = done_old[i - 1]
                if u not in old or u.right in old:
                    members.add(i)
            acc_sets.append(members)
    else:
        acc_sets = [set(range(n_nodes))]
    k = len(acc_sets)

    # Counter construction: the counter advances when the source state sits
    # in the current acceptance set; accepting = first set at counter zero.
    def bump(src: int, ctr: int) -> int:
        return (ctr + 1) % k if src in acc_sets[ctr] else ctr

    pair_edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    frontier = [(0, 0)]
    seen = {(0, 0)}
    while frontier:
        src_pair = frontier.pop()
        s, c = src_pair
        nc = bump(s, c)
        outs = []
        for t in gba_edges[s]:
            dst_pair = (t, nc)
            outs.append(dst_pair)
            if dst_pair not in seen:
                seen.add(dst_pair)
                frontier.append(dst_pair)
        pair_edges[src_pair] = outs

    accepting_pairs = {
        (s, 0) for s in acc_sets[0] if (s, 0) in seen
    }

    keep = _prune(seen, pair_edges, {(0, 0)}, accepting_pairs)

    order = sorted(keep)
    ids = {pair: i for i, pair in enumerate(order)}
    edges: dict[int, tuple[tuple[int, Guard], ...]] = {}
    for pair in order:
        outs = []
        for dst_pair in pair_edges.get(pair, ()):
            if dst_pair in keep:
                outs.append((ids[dst_pair], node_guard(dst_pair[0])))
        outs.sort(key=lambda e: e[0])
        if outs:
            edges[ids[pair]] = tuple(outs)

    return Nba(
        aps=alphabet,
        n_states=len(order),
        initial=frozenset({ids[(0, 0)]}),
        accepting=frozenset(ids[p] for p in accepting_pairs if p in keep),
        edges=edges,
    )


def _prune(states, edge_map, initial, accepting):
    """States reachable from the start that can still reach an accepting
    cycle; initial states are always kept so the state set stays nonempty."""
    fwd = set()
    frontier = [s for s in initial if s in states]
    while frontier:
        s = frontier.pop()
        if s in fwd:
            continue
        fwd.add(s)
        frontier.extend(t for t in edge_map.get(s, ()) if t not in fwd)

    rev: dict = {}
    for s in fwd:
        for t in edge_map.get(s, ()):
            if t in fwd:
                rev.setdefault(t, []).append(s)

    on_cycle = set()
    for f in accepting:
        if f not in fwd:
            continue
        reach = set()
        frontier = [t for t in edge_map.get(f, ()) if t in fwd]
        while frontier:
            t = frontier.pop()
            if t in reach:
                continue
            reach.add(t)
            frontier.extend(u for u in edge_map.get(t, ()) if u in fwd and u not in reach)
        if f in reach:
            on_cycle.add(f)

    useful = set()
    frontier = list(on_cycle)
    while frontier:
        s = frontier.pop()
        if s in useful:
            continue
        useful.add(s)
        frontier.extend(u for u in rev.get(s, ()) if u not in useful)

    return (useful | set(initial)) & (fwd | set(initial))
