"""Syntax trees for linear temporal logic formulas.

Core connectives are truth, atoms, negation, conjunction, next and until;
disjunction, implication, eventually and always are derived forms kept as
explicit nodes so parsed text round-trips.
"""
from __future__ import annotations

from dataclasses import dataclass


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, Top):
        return frozenset()
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms(f.operand)
    if isinstance(f, (And, Or, Implies, Until)):
        return atoms(f.left) | atoms(f.right)
    msg = f"not a formula node: {f!r}"
    raise TypeError(msg)


# Binding strength, loosest first: -> , || , && , U , unary.
_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNTIL = 4
_PREC_UNARY = 5
_PREC_ATOM = 6


def _prec(f: Formula) -> int:
    if isinstance(f, (Top, Atom)):
        return _PREC_ATOM
    if isinstance(f, (Not, Next, Eventually, Always)):
        return _PREC_UNARY
    if isinstance(f, Until):
        return _PREC_UNTIL
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, Implies):
        return _PREC_IMPLIES
    msg = f"not a formula node: {f!r}"
    raise TypeError(msg)


def to_text(f: Formula) -> str:
    """Concrete syntax with minimal parentheses; parse(to_text(f)) == f."""
    return _fmt(f, 0)


def _fmt(f: Formula, context: int) -> str:
    p = _prec(f)
    if isinstance(f, Top):
        s = "true"
    elif isinstance(f, Atom):
        s = f.name
    elif isinstance(f, Not):
        s = "!" + _fmt(f.operand, _PREC_UNARY)
    elif isinstance(f, Next):
        s = "X " + _fmt(f.operand, _PREC_UNARY)
    elif isinstance(f, Always):
        s = "[]" + _fmt(f.operand, _PREC_UNARY)
    elif isinstance(f, Eventually):
        s = "<>" + _fmt(f.operand, _PREC_UNARY)
    elif isinstance(f, Until):
        # right associative
        s = _fmt(f.left, p + 1) + " U " + _fmt(f.right, p)
    elif isinstance(f, And):
        s = _fmt(f.left, p) + " && " + _fmt(f.right, p + 1)
    elif isinstance(f, Or):
        s = _fmt(f.left, p) + " || " + _fmt(f.right, p + 1)
    elif isinstance(f, Implies):
        s = _fmt(f.left, p + 1) + " -> " + _fmt(f.right, p)
    else:
        msg = f"not a formula node: {f!r}"
        raise TypeError(msg)
    if p < context:
        return "(" + s + ")"
    return s


def normalize(f: Formula) -> Formula:
    """Rewrite derived connectives into the core set.

    <>g becomes true U g, []g becomes !(true U !g), disjunction and
    implication become negated conjunctions. Satisfaction over any word is
    unchanged.
    """
    if isinstance(f, (Top, Atom)):
        return f
    if isinstance(f, Not):
        return Not(normalize(f.operand))
    if isinstance(f, And):
        return And(normalize(f.left), normalize(f.right))
    if isinstance(f, Next):
        return Next(normalize(f.operand))
    if isinstance(f, Until):
        return Until(normalize(f.left), normalize(f.right))
    if isinstance(f, Or):
        return Not(And(Not(normalize(f.left)), Not(normalize(f.right))))
    if isinstance(f, Implies):
        return Not(And(normalize(f.left), Not(normalize(f.right))))
    if isinstance(f, Eventually):
        return Until(Top(), normalize(f.operand))
    if isinstance(f, Always):
        return Not(Until(Top(), Not(normalize(f.operand))))
    msg = f"not a formula node: {f!r}"
    raise TypeError(msg)


def is_sc_ltl(f: Formula) -> bool:
    """Syntactic co-safety check: in negation normal form the formula uses
    only atoms, negated atoms, &&, ||, X, U and <>."""
    return _sc(f, False)


def _sc(f: Formula, negated: bool) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return _sc(f.operand, not negated)
    if isinstance(f, And) or isinstance(f, Or):
        return _sc(f.left, negated) and _sc(f.right, negated)
    if isinstance(f, Implies):
        return _sc(f.left, not negated) and _sc(f.right, negated)
    if isinstance(f, Next):
        return _sc(f.operand, negated)
    if isinstance(f, Until):
        if negated:
            return False
        return _sc(f.left, False) and _sc(f.right, False)
    if isinstance(f, Eventually):
        if negated:  # !<>g is an always
            return False
        return _sc(f.operand, False)
    if isinstance(f, Always):
        if not negated:
            return False
        return _sc(f.operand, True)
    msg = f"not a formula node: {f!r}"
    raise TypeError(msg)
