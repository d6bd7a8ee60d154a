"""Recursive-descent parser for the one-variable expression grammar.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    atom    := number | 'x' | func '(' expr ')' | '(' expr ')'
    func    := exp | log | sin | cos | sqrt

Exponents must fold to an integer constant; ``x^(1/2)`` is rejected and
must be written ``sqrt(x)``.  Numbers are decimals (optionally with an
exponent); ``p/q`` is a quotient of two literals and folds to the exact
rational.
"""

from __future__ import annotations

import re
from fractions import Fraction

from certquad.errors import ParseError
from certquad.funcmodel.expr import (
    FUNCTIONS,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    children,
    has_variable,
)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    end = len(source.rstrip())
    while pos < end:
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ParseError(
                f"unexpected character {source[start]!r}",
                len(source[:start].encode("utf-8")),
                source,
            )
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(source[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(("end", "", len(source.encode("utf-8"))))
    return tokens


def _fold_constant(node: Expr) -> Fraction | None:
    """Exact value of an x-free, function-free tree, else None."""
    if isinstance(node, Const):
        return node.exact
    if has_variable(node) or isinstance(node, Func):
        return None
    vals = [_fold_constant(c) for c in children(node)]
    if any(v is None for v in vals):
        return None
    if isinstance(node, Neg):
        return -vals[0]
    if isinstance(node, Add):
        return vals[0] + vals[1]
    if isinstance(node, Sub):
        return vals[0] - vals[1]
    if isinstance(node, Mul):
        return vals[0] * vals[1]
    if isinstance(node, Div):
        return None if vals[1] == 0 else vals[0] / vals[1]
    if isinstance(node, Pow):
        if vals[0] == 0 and node.exponent < 0:
            return None
        return vals[0] ** node.exponent
    return None


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, offset=None):
        raise ParseError(message, self.tok[2] if offset is None else offset, self.source)

    def accept(self, op: str) -> bool:
        kind, text, _ = self.tok
        if kind == "op" and text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str):
        if not self.accept(op):
            found = self.tok[1] or "end of input"
            self.error(f"expected {op!r}, found {found!r}")

    def parse(self) -> Expr:
        if self.tok[0] == "end":
            self.error("empty expression")
        node = self.expr()
        if self.tok[0] != "end":
            self.error(f"unexpected {self.tok[1]!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            if self.accept("*"):
                node = Mul(node, self.unary())
            elif self.accept("/"):
                offset = self.tok[2]
                right = self.unary()
                if isinstance(node, Const) and isinstance(right, Const):
                    if right.exact == 0:
                        self.error("division by zero", offset)
                    node = Const(node.exact / right.exact)
                else:
                    node = Div(node, right)
            else:
                return node

    def unary(self) -> Expr:
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, Const):
                return Const(-arg.exact)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            offset = self.tok[2]
            if self.accept("-"):
                exp_node = self.atom()
                value = _fold_constant(exp_node)
                value = None if value is None else -value
            else:
                exp_node = self.atom()
                value = _fold_constant(exp_node)
            if value is None:
                self.error("exponent must be a constant integer", offset)
            if value.denominator != 1:
                self.error(
                    f"non-integer exponent {value}; use sqrt() for half powers", offset
                )
            return Pow(base, int(value))
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.tok
        if kind == "num":
            self.i += 1
            return Const(Fraction(text))
        if kind == "name":
            self.i += 1
            if text == "x":
                return Var()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            self.error(f"unknown identifier {text!r}", offset)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {text!r}")


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises ParseError carrying the byte offset of the offending token.
    """
    if not isinstance(source, str):
        raise TypeError("source must be str")
    return _Parser(source).parse()
