"""Boundary-Taylor quadrature rule and its exact kernel remainder.

For ``x`` in ``[a, b]`` and ``n >= 1``::

    int_a^b f = sum_{k<n} [(x-a)^(k+1) f^(k)(a) + (-1)^k (b-x)^(k+1) f^(k)(b)] / (k+1)!
                + (1/n!) int_a^b (x-t)^n f^(n)(t) dt

``quad_rule`` is the sum, ``remainder_numeric`` the integral term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from certquad.funcmodel import MAX_ORDER, Expr, derivatives, eval_jet_exact, to_polynomial
from certquad.oracle import DEFAULT, OracleConfig, integrate_reference, kernel_integrand


@dataclass(frozen=True)
class RuleParams:
    a: float
    b: float
    x: float
    n: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not self.a <= self.x <= self.b:
            raise ValueError(f"x={self.x} lies outside [{self.a}, {self.b}]")
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise TypeError("n must be an int")
        if not 1 <= self.n <= MAX_ORDER:
            raise ValueError(f"n must be in 1..{MAX_ORDER}")

    @classmethod
    def midpoint(cls, a, b, n) -> "RuleParams":
        return cls(a, b, (a + b) / 2, n)

    @property
    def length(self):
        return self.b - self.a


@dataclass(frozen=True)
class MomentSet:
    """The four kernel moments over ``[a, x]`` and ``[x, b]``."""

    m1: float  # int_a^x (x-t)^n (b-t) dt
    m2: float  # int_a^x (x-t)^n (t-a) dt
    m3: float  # int_x^b (t-x)^n (t-a) dt
    m4: float  # int_x^b (t-x)^n (b-t) dt

    def as_tuple(self):
        return (self.m1, self.m2, self.m3, self.m4)


def endpoint_derivatives(f: Expr, a: float, b: float, order: int):
    """Derivative lists ``[f(a), ..., f^(order)(a)]`` and the same at ``b``."""
    return derivatives(f, float(a), order), derivatives(f, float(b), order)


def rule_from_derivatives(da, db, a, b, x, n):
    """The rule sum given endpoint derivatives of order at least ``n - 1``.

    Works on floats or on Fractions (exact path); ``da``/``db`` may be longer
    than ``n``.
    """
    left = x - a
    right = b - x
    terms = []
    fact = 1
    for k in range(n):
        fact *= k + 1
        sign = 1 if k % 2 == 0 else -1
        terms.append((left ** (k + 1) * da[k] + sign * right ** (k + 1) * db[k]) / fact)
    if isinstance(left, Fraction):
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def quad_rule(f: Expr, p: RuleParams) -> float:
    """Boundary-Taylor rule using derivatives of order ``0..n-1`` at both ends.

    >>> from certquad.funcmodel import parse
    >>> quad_rule(parse("x^2"), RuleParams(0.0, 1.0, 0.5, 2))
    0.25
    """
    da, db = endpoint_derivatives(f, p.a, p.b, p.n - 1)
    return rule_from_derivatives(da, db, float(p.a), float(p.b), float(p.x), p.n)


def quad_rule_exact(f: Expr, p: RuleParams) -> Fraction:
    """Rule sum in exact rational arithmetic for polynomial ``f``."""
    a, b, x = Fraction(p.a), Fraction(p.b), Fraction(p.x)
    da = eval_jet_exact(f, a, p.n - 1).coefficients
    db = eval_jet_exact(f, b, p.n - 1).coefficients
    return rule_from_derivatives(da, db, a, b, x, p.n)


def remainder_numeric(f: Expr, p: RuleParams, cfg: OracleConfig = DEFAULT) -> float:
    """``(1/n!) int_a^b (x-t)^n f^(n)(t) dt`` by reference quadrature."""
    return integrate_reference(kernel_integrand(f, float(p.x), p.n), p.a, p.b, cfg).value


def remainder_exact(f: Expr, p: RuleParams) -> Fraction:
    """Kernel remainder for polynomial ``f``, integrated exactly."""
    a, b, x = Fraction(p.a), Fraction(p.b), Fraction(p.x)
    coeffs = to_polynomial(f)
    # f^(n) coefficients
    dn = [c * math.perm(i, p.n) for i, c in enumerate(coeffs)][p.n :]
    # (x - t)^n coefficients in t
    kern = [Fraction(math.comb(p.n, j)) * x ** (p.n - j) * (-1) ** j for j in range(p.n + 1)]
    prod = [Fraction(0)] * (len(dn) + len(kern))
    for i, c in enumerate(dn):
        for j, d in enumerate(kern):
            prod[i + j] += c * d
    total = sum((c * (b ** (i + 1) - a ** (i + 1)) / (i + 1) for i, c in enumerate(prod)), Fraction(0))
    return total / math.factorial(p.n)


def kernel_moments(p: RuleParams) -> MomentSet:
    """Closed forms of the four moments of ``|x-t|^n`` against ``b-t`` and ``t-a``."""
    n = p.n
    left = p.x - p.a
    right = p.b - p.x
    l1, r1 = left ** (n + 1), right ** (n + 1)
    l2, r2 = l1 * left, r1 * right
    return MomentSet(
        m1=right * l1 / (n + 1) + l2 / (n + 2),
        m2=l2 / ((n + 1) * (n + 2)),
        m3=r1 * left / (n + 1) + r2 / (n + 2),
        m4=r2 / ((n + 1) * (n + 2)),
    )


class IdentityCheck(NamedTuple):
    residual: float
    passed: bool
    integral: float
    rule: float
    remainder: float


def verify_identity(
    f: Expr, p: RuleParams, tol: float = 1e-9, cfg: OracleConfig = DEFAULT
) -> IdentityCheck:
    """Compare the reference integral with rule + remainder.

    The two sides are computed independently; a sign slip in the
    alternating ``b``-terms shows up as a large residual.  Passes iff
    ``residual <= tol * (1 + |integral|)``.
    """
    integral = integrate_reference(f, p.a, p.b, cfg).value
    rule = quad_rule(f, p)
    rem = remainder_numeric(f, p, cfg)
    residual = abs(integral - rule - rem)
    return IdentityCheck(residual, residual <= tol * (1 + abs(integral)), integral, rule, rem)


def verify_identity_exact(f: Expr, p: RuleParams) -> Fraction:
    """Exact residual for polynomial ``f``; zero when the identity holds."""
    coeffs = to_polynomial(f)
    a, b = Fraction(p.a), Fraction(p.b)
    integral = sum((c * (b ** (i + 1) - a ** (i + 1)) / (i + 1) for i, c in enumerate(coeffs)), Fraction(0))
    return abs(integral - quad_rule_exact(f, p) - remainder_exact(f, p))
