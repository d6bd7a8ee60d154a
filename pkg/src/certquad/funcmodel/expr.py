"""Expression trees for scalar functions of one variable ``x``.

Nodes are immutable and hashable.  Constants carry their exact rational
value next to the float used by the numeric paths, so a polynomial typed as
``x^3/6 - 0.1*x`` can be differentiated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class Expr:
    """Base node.  Arithmetic operators build new trees."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, exponent):
        return Pow(self, exponent)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expr):
    exact: Fraction
    value: float = field(init=False, compare=False, hash=False)

    def __post_init__(self):
        exact = self.exact
        if isinstance(exact, float):
            if not math.isfinite(exact):
                raise ValueError("constants must be finite")
            exact = Fraction(exact)
        elif not isinstance(exact, Fraction):
            exact = Fraction(exact)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "value", float(exact))

    def __repr__(self):
        return f"Const({self.exact})"


@dataclass(frozen=True, repr=False)
class Var(Expr):
    def __repr__(self):
        return "Var()"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
            raise TypeError("Pow exponent must be an int")


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")


X = Var()


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, Fraction)):
        return Const(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def exp(arg) -> Func:
    return Func("exp", as_expr(arg))


def log(arg) -> Func:
    return Func("log", as_expr(arg))


def sin(arg) -> Func:
    return Func("sin", as_expr(arg))


def cos(arg) -> Func:
    return Func("cos", as_expr(arg))


def sqrt(arg) -> Func:
    return Func("sqrt", as_expr(arg))


def children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, (Add, Sub, Mul, Div)):
        return (node.left, node.right)
    if isinstance(node, (Neg, Func)):
        return (node.arg,)
    if isinstance(node, Pow):
        return (node.base,)
    return ()


def has_variable(node: Expr) -> bool:
    if isinstance(node, Var):
        return True
    return any(has_variable(c) for c in children(node))


def is_exact_capable(node: Expr) -> bool:
    """True for polynomial trees: constants, x, +, -, *, unary minus,
    non-negative integer powers, and division by an x-free polynomial
    subtree."""
    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, (Neg, Add, Sub, Mul)):
        return all(is_exact_capable(c) for c in children(node))
    if isinstance(node, Pow):
        return node.exponent >= 0 and is_exact_capable(node.base)
    if isinstance(node, Div):
        return (
            is_exact_capable(node.left)
            and not has_variable(node.right)
            and is_exact_capable(node.right)
        )
    return False


def size(node: Expr) -> int:
    return 1 + sum(size(c) for c in children(node))


# -- unparsing ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _const_text(c: Fraction, exact: bool) -> str:
    if c.denominator == 1:
        text = str(c.numerator)
    else:
        decimal = repr(float(c))
        if Fraction(decimal) == c or not exact:
            text = decimal
        else:
            text = f"{c.numerator}/{c.denominator}"
            return f"({text})"
    if c < 0:
        return f"({text})"
    return text


def to_source(node: Expr, exact: bool = False) -> str:
    """Render ``node`` in the input grammar.

    With ``exact=True`` every constant is printed so that re-parsing yields
    the identical rational; otherwise non-decimal rationals are printed as
    their shortest round-trip float.
    """

    def go(n: Expr, parent: int) -> str:
        if isinstance(n, Const):
            return _const_text(n.exact, exact)
        if isinstance(n, Var):
            return "x"
        if isinstance(n, Func):
            return f"{n.name}({go(n.arg, 0)})"
        if isinstance(n, Pow):
            base = go(n.base, 5)
            e = str(n.exponent) if n.exponent >= 0 else f"({n.exponent})"
            text = f"{base}^{e}"
            prec = 4
        elif isinstance(n, Neg):
            text = "-" + go(n.arg, 3)
            prec = 3
        else:
            prec = _PREC[type(n)]
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(n)]
            # left-associative: the right operand needs parens at equal precedence
            text = f"{go(n.left, prec)} {op} {go(n.right, prec + 1)}"
        return f"({text})" if prec < parent else text

    return go(node, 0)
