"""Recursive-descent parser for the concrete formula syntax.

Grammar, loosest binding first:

    formula := or_expr ('->' formula)?
    or_expr := and_expr ('||' and_expr)*
    and_expr := until_expr ('&&' until_expr)*
    until_expr := unary ('U' until_expr)?
    unary := ('!' | 'X' | '[]' | '<>') unary | primary
    primary := 'true' | IDENT | '(' formula ')'

Identifiers match [a-zA-Z_][a-zA-Z0-9_]*; 'X', 'U' and 'true' are reserved.
'->' and 'U' associate to the right, '&&' and '||' to the left.
"""
from __future__ import annotations

import re

from ..errors import LtlSyntaxError
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
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>&&|\|\||->|\[\]|<>|[!()]))"
)

_RESERVED = {"X", "U", "true"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            bad_at = len(text) - len(rest)
            msg = f"unexpected character {rest[0]!r}"
            raise LtlSyntaxError(msg, bad_at)
        if m.group("ident") is not None:
            word = m.group("ident")
            kind = word if word in _RESERVED else "ident"
            tokens.append((kind, word, m.start("ident")))
        else:
            op = m.group("op")
            tokens.append((op, op, m.start("op")))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> None:
        tok = self.take()
        if tok[0] != kind:
            msg = f"expected {kind!r}, found {tok[1] or 'end of input'!r}"
            raise LtlSyntaxError(msg, tok[2])

    def formula(self) -> Formula:
        left = self.or_expr()
        if self.peek()[0] == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def or_expr(self) -> Formula:
        node = self.and_expr()
        while self.peek()[0] == "||":
            self.take()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> Formula:
        node = self.until_expr()
        while self.peek()[0] == "&&":
            self.take()
            node = And(node, self.until_expr())
        return node

    def until_expr(self) -> Formula:
        left = self.unary()
        if self.peek()[0] == "U":
            self.take()
            return Until(left, self.until_expr())
        return left

    def unary(self) -> Formula:
        kind, _, _ = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind == "X":
            self.take()
            return Next(self.unary())
        if kind == "[]":
            self.take()
            return Always(self.unary())
        if kind == "<>":
            self.take()
            return Eventually(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, text, pos = self.take()
        if kind == "true":
            return Top()
        if kind == "ident":
            return Atom(text)
        if kind == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        msg = f"expected a formula, found {text or 'end of input'!r}"
        raise LtlSyntaxError(msg, pos)


def parse(text: str) -> Formula:
    p = _Parser(text)
    node = p.formula()
    kind, tail, pos = p.peek()
    if kind != "eof":
        msg = f"trailing input {tail!r}"
        raise LtlSyntaxError(msg, pos)
    return node
