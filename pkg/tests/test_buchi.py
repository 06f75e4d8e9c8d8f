"""Automaton guards and the label-distance closed form.

The relaxation distance has two independent routes: a per-clause closed form
(edge_gap) and full materialization of the enabling label set followed by
the set-based distance (dist over chi). They must agree everywhere.
"""
from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formula_gen import random_formula
from mixplan.ltl.buchi import Clause, Guard, Nba, dist
from mixplan.ltl.parse import parse
from mixplan.ltl.translate import translate
from oracles import subsets


def test_clause_satisfies():
    c = Clause(frozenset({"a"}), frozenset({"b"}))
    assert c.satisfies(frozenset({"a"}))
    assert c.satisfies(frozenset({"a", "c"}))
    assert not c.satisfies(frozenset({"a", "b"}))
    assert not c.satisfies(frozenset())


def test_contradictory_clause():
    c = Clause(frozenset({"a"}), frozenset({"a"}))
    assert not c.satisfiable()
    assert not Guard((c,)).satisfiable()


def test_guard_constructors():
    assert Guard.true().satisfies(frozenset())
    assert Guard.true().satisfies(frozenset({"x"}))
    assert not Guard.false().satisfiable()
    g = Guard.literals(pos=["a"], neg=["b"])
    assert g.satisfies(frozenset({"a"}))
    assert not g.satisfies(frozenset({"a", "b"}))


def test_guard_text():
    g = Guard((Clause(frozenset({"a"}), frozenset({"b"})), Clause(frozenset(), frozenset())))
    assert g.to_text() == "a && !b || true"
    assert Guard.false().to_text() == "false"


def test_dist_examples():
    l_ = frozenset
    assert dist(l_(), frozenset({l_()})) == 0
    assert dist(l_({"a"}), frozenset({l_({"a"})})) == 0
    assert dist(l_({"a"}), frozenset({l_({"b"})})) == 1
    assert dist(l_({"a", "b"}), frozenset({l_({"b"})})) == 1
    assert dist(l_({"a", "b"}), frozenset({l_(), l_({"a"})})) == 1
    assert dist(l_({"a"}), frozenset()) == math.inf


def test_dist_charges_only_extra_atoms():
    # A label missing wanted atoms is free; only atoms that must be dropped
    # count. This asymmetry shapes which soft constraints can ever charge.
    l_ = frozenset
    assert dist(l_(), frozenset({l_({"c"})})) == 0
    assert dist(l_({"d"}), frozenset({l_({"c"})})) == 1
    assert dist(l_({"c", "d"}), frozenset({l_({"c"})})) == 1


def _clauses(names):
    lit = st.sampled_from(sorted(names))
    sets = st.frozensets(lit, max_size=len(names))
    return st.tuples(sets, sets).map(lambda t: Clause(*t))


@given(_clauses({"a", "b", "c"}), st.frozensets(st.sampled_from(["a", "b", "c"])))
@settings(max_examples=300, deadline=None)
def test_clause_gap_matches_set_distance(c, label):
    nba = Nba(
        aps=frozenset({"a", "b", "c"}),
        n_states=2,
        initial=frozenset({0}),
        accepting=frozenset({1}),
        edges={0: ((1, Guard((c,))),)},
    )
    assert nba.edge_gap(0, 1, label) == dist(label, nba.chi(0, 1))


def test_edge_gap_matches_chi_on_translated_automata():
    rng = random.Random(11)
    labels = subsets(["a", "b"])
    for _ in range(20):
        f = random_formula(rng, ["a", "b"], 3)
        nba = translate(f, aps={"a", "b"})
        for src in nba.states:
            for dst in nba.states:
                chi = nba.chi(src, dst)
                for label in labels:
                    assert nba.edge_gap(src, dst, label) == dist(label, chi)


def test_chi_agrees_with_successors():
    nba = translate(parse("[](a -> X b)"))
    for src in nba.states:
        for label in subsets(["a", "b"]):
            via_succ = set(nba.successors(src, label))
            via_chi = {d for d in nba.states if label in nba.chi(src, d)}
            assert via_succ == via_chi


def test_validation_rejects_bad_edges():
    with pytest.raises(ValueError):
        Nba(
            aps=frozenset(),
            n_states=1,
            initial=frozenset({0}),
            accepting=frozenset(),
            edges={0: ((3, Guard.true()),)},
        )
    with pytest.raises(ValueError):
        Nba(
            aps=frozenset(),
            n_states=1,
            initial=frozenset(),
            accepting=frozenset(),
            edges={},
        )


def test_guard_collects_parallel_edges():
    nba = Nba(
        aps=frozenset({"a"}),
        n_states=2,
        initial=frozenset({0}),
        accepting=frozenset({1}),
        edges={
            0: (
                (1, Guard.literals(pos=["a"])),
                (1, Guard.literals(neg=["a"])),
            )
        },
    )
    g = nba.guard(0, 1)
    assert g.satisfies(frozenset({"a"})) and g.satisfies(frozenset())
    assert nba.edge_gap(0, 1, frozenset({"a"})) == 0
