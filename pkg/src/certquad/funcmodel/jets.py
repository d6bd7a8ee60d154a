"""Taylor-mode derivative evaluation.

Every node is propagated as a truncated Taylor series in *divided* form,
``u[k] = u^(k)(t) / k!``.  Products use the Cauchy convolution and the
elementary functions use their usual first-order recurrences, so a jet of
order ``m`` costs O(m^2) per node.  Coefficients may be Python floats or
numpy arrays (one lane per evaluation point); the recurrences are the same.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from certquad.errors import DomainError, OrderOverflowError
from certquad.funcmodel.expr import Add, Const, Div, Expr, Func, Mul, Neg, Pow, Sub, Var

MAX_ORDER = 32

_FACTORIALS = [float(math.factorial(k)) for k in range(MAX_ORDER + 1)]


@dataclass(frozen=True)
class Jet:
    """Derivative values ``(f(t), f'(t), ..., f^(m)(t))`` at ``center``."""

    center: object
    coefficients: tuple

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k):
        return self.coefficients[k]

    def __len__(self):
        return len(self.coefficients)

    def __iter__(self):
        return iter(self.coefficients)


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray)


def _any(cond) -> bool:
    return bool(np.any(cond)) if _is_array(cond) else bool(cond)


def _mul(u, v, m):
    # skip known-zero tails: constants and x have short series
    nu = _support(u)
    nv = _support(v)
    out = []
    for k in range(m + 1):
        s = 0.0
        for j in range(max(0, k - nv + 1), min(k, nu - 1) + 1):
            s = s + u[j] * v[k - j]
        out.append(s)
    return out


def _support(u) -> int:
    """Length of ``u`` ignoring trailing literal zeros."""
    n = len(u)
    while n > 1 and not _is_array(u[n - 1]) and u[n - 1] == 0.0:
        n -= 1
    return n


def _div(u, v, m, node):
    v0 = v[0]
    if _any(v0 == 0):
        raise DomainError(f"division by zero in {node}")
    w = []
    for k in range(m + 1):
        s = u[k]
        for j in range(1, k + 1):
            s = s - v[j] * w[k - j]
        w.append(s / v0)
    return w


def _pow(u, e, m, node):
    if e < 0:
        one = [1.0] + [0.0] * m
        u = _div(one, u, m, node)
        e = -e
    result = [1.0] + [0.0] * m
    base = u
    while e:
        if e & 1:
            result = _mul(result, base, m)
        e >>= 1
        if e:
            base = _mul(base, base, m)
    return result


def _elementary(name, u, m, node):
    arr = _is_array(u[0])
    lib = np if arr else math
    u0 = u[0]
    if name == "exp":
        try:
            w = [lib.exp(u0)]
        except OverflowError:
            raise DomainError(f"exp overflow in {node}") from None
        for k in range(1, m + 1):
            s = 0.0
            for j in range(1, k + 1):
                s = s + j * u[j] * w[k - j]
            w.append(s / k)
        return w
    if name == "log":
        if _any(u0 <= 0):
            raise DomainError(f"log of non-positive argument in {node}")
        w = [lib.log(u0)]
        for k in range(1, m + 1):
            s = 0.0
            for j in range(1, k):
                s = s + j * w[j] * u[k - j]
            w.append((u[k] - s / k) / u0)
        return w
    if name in ("sin", "cos"):
        s_ = [lib.sin(u0)]
        c_ = [lib.cos(u0)]
        for k in range(1, m + 1):
            ss = 0.0
            cc = 0.0
            for j in range(1, k + 1):
                ss = ss + j * u[j] * c_[k - j]
                cc = cc + j * u[j] * s_[k - j]
            s_.append(ss / k)
            c_.append(-cc / k)
        return s_ if name == "sin" else c_
    if name == "sqrt":
        if _any(u0 < 0):
            raise DomainError(f"sqrt of negative argument in {node}")
        if m > 0 and _any(u0 == 0):
            raise DomainError(f"sqrt is not differentiable at 0 in {node}")
        w0 = lib.sqrt(u0)
        w = [w0]
        for k in range(1, m + 1):
            s = u[k]
            for j in range(1, k):
                s = s - w[j] * w[k - j]
            w.append(s / (2 * w0))
        return w
    raise ValueError(f"unknown function {name!r}")


def _series(node: Expr, t, m: int) -> list:
    if isinstance(node, Const):
        return [node.value] + [0.0] * m
    if isinstance(node, Var):
        out = [t] + [0.0] * m
        if m >= 1:
            out[1] = 1.0
        return out
    if isinstance(node, Neg):
        return [-c for c in _series(node.arg, t, m)]
    if isinstance(node, Add):
        u, v = _series(node.left, t, m), _series(node.right, t, m)
        return [p + q for p, q in zip(u, v)]
    if isinstance(node, Sub):
        u, v = _series(node.left, t, m), _series(node.right, t, m)
        return [p - q for p, q in zip(u, v)]
    if isinstance(node, Mul):
        return _mul(_series(node.left, t, m), _series(node.right, t, m), m)
    if isinstance(node, Div):
        return _div(_series(node.left, t, m), _series(node.right, t, m), m, node)
    if isinstance(node, Pow):
        return _pow(_series(node.base, t, m), node.exponent, m, node)
    if isinstance(node, Func):
        return _elementary(node.name, _series(node.arg, t, m), m, node)
    raise TypeError(f"not an expression node: {node!r}")


def _check_order(m: int, max_order: int):
    if m < 0:
        raise ValueError("derivative order must be >= 0")
    if m > max_order or m > MAX_ORDER:
        raise OrderOverflowError(f"order {m} exceeds cap {min(max_order, MAX_ORDER)}")


def taylor_coefficients(f: Expr, t, m: int, max_order: int = MAX_ORDER) -> list:
    """Divided Taylor coefficients ``f^(k)(t)/k!`` for ``k = 0..m``."""
    _check_order(m, max_order)
    with np.errstate(all="ignore"):
        return _series(f, t, m)


def derivatives(f: Expr, t, m: int, max_order: int = MAX_ORDER) -> list:
    """Derivative values ``f^(k)(t)`` for ``k = 0..m``.

    ``t`` may be a float or a 1-d array; array input returns one array per
    order.  Raises DomainError if any lane leaves the domain or produces a
    non-finite value.
    """
    if _is_array(t):
        t = np.asarray(t, dtype=float)
    else:
        t = float(t)
    coeffs = taylor_coefficients(f, t, m, max_order)
    out = []
    for k, c in enumerate(coeffs):
        if _is_array(c) or _is_array(t):
            c = np.broadcast_to(np.asarray(c, dtype=float), np.shape(t)) * _FACTORIALS[k]
            if not np.all(np.isfinite(c)):
                raise DomainError(f"non-finite derivative of order {k} of {f}")
        else:
            c = c * _FACTORIALS[k]
            if not math.isfinite(c):
                raise DomainError(f"non-finite derivative of order {k} of {f} at {t}")
        out.append(c)
    return out


def eval_jet(f: Expr, t: float, m: int, max_order: int = MAX_ORDER) -> Jet:
    """Jet of ``f`` at the scalar point ``t`` up to order ``m``.

    >>> from certquad.funcmodel import parse
    >>> eval_jet(parse("x^3"), 2.0, 3).coefficients
    (8.0, 12.0, 12.0, 6.0)
    """
    t = float(t)
    return Jet(t, tuple(float(c) for c in derivatives(f, t, m, max_order)))


def evaluate(f: Expr, t):
    """Plain function value; vectorised over arrays."""
    return derivatives(f, t, 0)[0]
