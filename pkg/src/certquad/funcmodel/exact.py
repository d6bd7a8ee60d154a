"""Exact rational derivatives for polynomial trees.

This path expands the tree into a coefficient list and differentiates by the
power rule, so it shares no arithmetic with the Taylor recurrences in
``jets``; tests use it as an oracle.
"""

from __future__ import annotations

from fractions import Fraction

from certquad.errors import DomainError, NotExactCapableError, OrderOverflowError
from certquad.funcmodel.expr import Add, Const, Div, Expr, Mul, Neg, Pow, Sub, Var, is_exact_capable
from certquad.funcmodel.jets import MAX_ORDER, Jet


def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q, sign=1):
    n = max(len(p), len(q))
    out = [Fraction(0)] * n
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += sign * c
    return _trim(out)


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, c in enumerate(p):
        if c:
            for j, d in enumerate(q):
                out[i + j] += c * d
    return _trim(out)


def to_polynomial(node: Expr) -> list[Fraction]:
    """Ascending coefficients of the polynomial represented by ``node``."""
    if not is_exact_capable(node):
        raise NotExactCapableError(f"{node} is not a polynomial tree")
    return _poly(node)


def _poly(node: Expr) -> list[Fraction]:
    if isinstance(node, Const):
        return [node.exact]
    if isinstance(node, Var):
        return [Fraction(0), Fraction(1)]
    if isinstance(node, Neg):
        return [-c for c in _poly(node.arg)]
    if isinstance(node, Add):
        return _padd(_poly(node.left), _poly(node.right))
    if isinstance(node, Sub):
        return _padd(_poly(node.left), _poly(node.right), -1)
    if isinstance(node, Mul):
        return _pmul(_poly(node.left), _poly(node.right))
    if isinstance(node, Div):
        denom = _poly(node.right)
        if len(denom) != 1 or denom[0] == 0:
            raise DomainError(f"division by zero in {node}")
        return [c / denom[0] for c in _poly(node.left)]
    if isinstance(node, Pow):
        base = _poly(node.base)
        out = [Fraction(1)]
        for _ in range(node.exponent):
            out = _pmul(out, base)
        return out
    raise NotExactCapableError(f"{node} is not a polynomial tree")


def eval_jet_exact(f: Expr, t, m: int, max_order: int = MAX_ORDER) -> Jet:
    """Exact jet of a polynomial tree at rational ``t``.

    ``t`` may be an int, Fraction, or a string such as ``"1/2"``.
    """
    if m < 0:
        raise ValueError("derivative order must be >= 0")
    if m > max_order:
        raise OrderOverflowError(f"order {m} exceeds cap {max_order}")
    t = Fraction(t)
    coeffs = to_polynomial(f)
    out = []
    for k in range(m + 1):
        # k-th derivative: sum_i c_i * i!/(i-k)! * t^(i-k)
        s = Fraction(0)
        for i in range(len(coeffs) - 1, k - 1, -1):
            falling = 1
            for r in range(i - k + 1, i + 1):
                falling *= r
            s = s * t + coeffs[i] * falling
        out.append(s)
    return Jet(t, tuple(out))
