"""Error bounds for the boundary-Taylor rule.

Each family has a pure closed-form function of the endpoint data (the
``*_value`` functions, which take ``|f^(n)(a)|``, ``|f^(n)(b)|`` or
``|f^(n)(mid)|`` directly) and a wrapper that evaluates those magnitudes from
an expression, checks the family's hypothesis and returns a BoundReport.

All families bound ``|int_a^b f - quad_rule|`` except the two baseline
trapezoid families (``da-t11``, ``da-t12``), which bound the mean-value form
``|(f(a)+f(b))/2 - (1/(b-a)) int_a^b f|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from certquad.errors import HypothesisViolated
from certquad.funcmodel import (
    ABS_CONVEX,
    ABS_Q_CONCAVE,
    ConvexityVerdict,
    Expr,
    assumed,
    check_convexity,
    check_function_convex,
    derivatives,
    evaluate,
)
from certquad.identity import RuleParams, kernel_moments
from certquad.oracle import DEFAULT, OracleConfig, integrate_reference

CONVEX = "convex-t21"
HOLDER = "holder-t22"
CONCAVE = "concave-t23"
MIDPOINT = "midpoint-c11"
N1 = "n1-c12"
DA11 = "da-t11"
DA12 = "da-t12"

FAMILIES = (CONVEX, HOLDER, CONCAVE, MIDPOINT, N1, DA11, DA12)
MEAN_FORM = frozenset({DA11, DA12})

DEFAULT_P = 2.0
SCAN_POINTS = 33


def conjugate(p: float) -> float:
    if not p > 1:
        raise ValueError(f"Hölder exponent must exceed 1, got {p}")
    return p / (p - 1.0)


# -- closed forms --------------------------------------------------------------


def convex_value(a, b, x, n, fa, fb):
    m = kernel_moments(RuleParams(a, b, x, n))
    return (fa * (m.m1 + m.m4) + fb * (m.m2 + m.m3)) / (math.factorial(n) * (b - a))


def midpoint_value(a, b, n, fa, fb):
    return (b - a) ** (n + 1) / (2 ** (n + 1) * math.factorial(n + 1)) * (fa + fb)


def n1_value(a, b, x, fa, fb):
    left, right = x - a, b - x
    wa = (right**3 + left**2 * (3 * b - 2 * a - x)) / (6 * (b - a))
    wb = (left**3 + right**2 * (2 * b + x - 3 * a)) / (6 * (b - a))
    return fa * wa + fb * wb


def _holder_kernel(a, b, x, n, p):
    e = n * p + 1
    return ((x - a) ** e + (b - x) ** e) / e


def holder_value(a, b, x, n, p, fa, fb):
    q = conjugate(p)
    kern = _holder_kernel(a, b, x, n, p) ** (1 / p)
    data = ((fa**q + fb**q) / 2) ** (1 / q)
    return (b - a) ** (1 / q) / math.factorial(n) * kern * data


def concave_value(a, b, x, n, p, fmid):
    q = conjugate(p)
    return (b - a) ** (1 / q) / math.factorial(n) * _holder_kernel(a, b, x, n, p) ** (1 / p) * fmid


def da_t11_value(a, b, fa, fb):
    return (b - a) * (fa + fb) / 8


def da_t12_value(a, b, p, fa, fb):
    q = conjugate(p)
    return (b - a) / (2 * (p + 1) ** (1 / p)) * ((fa**q + fb**q) / 2) ** (1 / q)


def holder_midpoint_mean_value(a, b, p, fa, fb):
    """Hölder family at ``n = 1``, ``x = mid``, rewritten in mean-value form."""
    q = conjugate(p)
    return (2 / (p + 1)) ** (1 / p) * (b - a) / 4 * (fa**q + fb**q) ** (1 / q)


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    family: str
    params: RuleParams
    value: float
    fa: float = 0.0
    fb: float = 0.0
    fmid: float | None = None
    p: float | None = None
    q: float | None = None
    verdict: ConvexityVerdict | None = field(default=None, compare=False)

    @property
    def mean_form(self) -> bool:
        return self.family in MEAN_FORM

    @property
    def integral_value(self) -> float:
        """Bound on ``|int f - rule|``; mean-form families are rescaled by b-a."""
        if self.mean_form:
            return self.value * (self.params.b - self.params.a)
        return self.value

    def to_dict(self) -> dict:
        p = self.params
        return {
            "family": self.family,
            "a": p.a,
            "b": p.b,
            "x": p.x,
            "n": p.n,
            "p": self.p,
            "q": self.q,
            "Fa": self.fa,
            "Fb": self.fb,
            "Fmid": self.fmid,
            "value": self.value,
            "lhs_form": "mean" if self.mean_form else "integral",
            "hypothesis": None if self.verdict is None else self.verdict.status,
        }


def hypothesis_for(family: str, p: float = DEFAULT_P) -> tuple[str, float]:
    """Grid-check mode and exponent ``q`` needed by ``family``."""
    if family in (CONVEX, MIDPOINT, N1, DA11):
        return ABS_CONVEX, 1.0
    if family in (HOLDER, DA12):
        return ABS_CONVEX, conjugate(p)
    if family == CONCAVE:
        return ABS_Q_CONCAVE, conjugate(p)
    raise ValueError(f"unknown bound family {family!r}")


def check_hypothesis(f: Expr, a, b, n, family, p=DEFAULT_P, assume_hypotheses=False):
    mode, q = hypothesis_for(family, p)
    if assume_hypotheses:
        return assumed(mode, q, n)
    return check_convexity(f, a, b, n, mode, q)


def _gate(f, a, b, n, family, p, assume_hypotheses, verdict):
    if verdict is None:
        verdict = check_hypothesis(f, a, b, n, family, p, assume_hypotheses)
    if not verdict.ok:
        raise HypothesisViolated(verdict, f"{family}: {verdict.property} fails near t={verdict.witness}")
    return verdict


def nth_magnitudes(f: Expr, a, b, n):
    """``(|f^(n)(a)|, |f^(n)(b)|)``."""
    fa = abs(float(derivatives(f, float(a), n)[n]))
    fb = abs(float(derivatives(f, float(b), n)[n]))
    return fa, fb


def mid_magnitude(f: Expr, a, b, n):
    return abs(float(derivatives(f, (a + b) / 2, n)[n]))


def bound_convex(f: Expr, p: RuleParams, assume_hypotheses=False, verdict=None) -> BoundReport:
    """Bound for convex ``|f^(n)|``, weighting each endpoint by kernel moments."""
    verdict = _gate(f, p.a, p.b, p.n, CONVEX, DEFAULT_P, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, p.a, p.b, p.n)
    return BoundReport(CONVEX, p, convex_value(p.a, p.b, p.x, p.n, fa, fb), fa, fb, verdict=verdict)


def bound_midpoint(f: Expr, a, b, n, assume_hypotheses=False, verdict=None) -> BoundReport:
    verdict = _gate(f, a, b, n, MIDPOINT, DEFAULT_P, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, a, b, n)
    return BoundReport(MIDPOINT, RuleParams.midpoint(a, b, n), midpoint_value(a, b, n, fa, fb), fa, fb, verdict=verdict)


def bound_n1(f: Expr, a, b, x, assume_hypotheses=False, verdict=None) -> BoundReport:
    verdict = _gate(f, a, b, 1, N1, DEFAULT_P, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, a, b, 1)
    return BoundReport(N1, RuleParams(a, b, x, 1), n1_value(a, b, x, fa, fb), fa, fb, verdict=verdict)


def bound_holder(f: Expr, p: RuleParams, hp=DEFAULT_P, assume_hypotheses=False, verdict=None) -> BoundReport:
    q = conjugate(hp)
    verdict = _gate(f, p.a, p.b, p.n, HOLDER, hp, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, p.a, p.b, p.n)
    value = holder_value(p.a, p.b, p.x, p.n, hp, fa, fb)
    return BoundReport(HOLDER, p, value, fa, fb, p=hp, q=q, verdict=verdict)


def bound_concave(f: Expr, p: RuleParams, hp=DEFAULT_P, assume_hypotheses=False, verdict=None) -> BoundReport:
    """Bound for concave ``|f^(n)|^q``; uses only the midpoint magnitude."""
    q = conjugate(hp)
    verdict = _gate(f, p.a, p.b, p.n, CONCAVE, hp, assume_hypotheses, verdict)
    fmid = mid_magnitude(f, p.a, p.b, p.n)
    value = concave_value(p.a, p.b, p.x, p.n, hp, fmid)
    return BoundReport(CONCAVE, p, value, fmid=fmid, p=hp, q=q, verdict=verdict)


def bound_da_t11(f: Expr, a, b, assume_hypotheses=False, verdict=None) -> BoundReport:
    verdict = _gate(f, a, b, 1, DA11, DEFAULT_P, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, a, b, 1)
    return BoundReport(DA11, RuleParams.midpoint(a, b, 1), da_t11_value(a, b, fa, fb), fa, fb, verdict=verdict)


def bound_da_t12(f: Expr, a, b, hp=DEFAULT_P, assume_hypotheses=False, verdict=None) -> BoundReport:
    q = conjugate(hp)
    verdict = _gate(f, a, b, 1, DA12, hp, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, a, b, 1)
    value = da_t12_value(a, b, hp, fa, fb)
    return BoundReport(DA12, RuleParams.midpoint(a, b, 1), value, fa, fb, p=hp, q=q, verdict=verdict)


def bound(f: Expr, family: str, p: RuleParams, hp=DEFAULT_P, assume_hypotheses=False, verdict=None) -> BoundReport:
    """Dispatch by family name.  Midpoint-only families ignore ``p.x``."""
    kw = dict(assume_hypotheses=assume_hypotheses, verdict=verdict)
    if family == CONVEX:
        return bound_convex(f, p, **kw)
    if family == HOLDER:
        return bound_holder(f, p, hp, **kw)
    if family == CONCAVE:
        return bound_concave(f, p, hp, **kw)
    if family == MIDPOINT:
        return bound_midpoint(f, p.a, p.b, p.n, **kw)
    if family == N1:
        if p.n != 1:
            raise ValueError("n1-c12 requires n = 1")
        return bound_n1(f, p.a, p.b, p.x, **kw)
    if family == DA11:
        return bound_da_t11(f, p.a, p.b, **kw)
    if family == DA12:
        return bound_da_t12(f, p.a, p.b, hp, **kw)
    raise ValueError(f"unknown bound family {family!r}")


# -- Hermite-Hadamard ----------------------------------------------------------


class Sandwich(NamedTuple):
    lower: float
    mid: float
    upper: float

    @property
    def holds(self) -> bool:
        slack = 1e-12 * (1 + abs(self.mid))
        return self.lower <= self.mid + slack and self.mid <= self.upper + slack


def hh_sandwich(f: Expr, a, b, assume_hypotheses=False, cfg: OracleConfig = DEFAULT) -> Sandwich:
    """``(f(mid), mean of f, (f(a)+f(b))/2)`` for convex ``f``."""
    if not assume_hypotheses:
        verdict = check_function_convex(f, a, b)
        if not verdict.ok:
            raise HypothesisViolated(verdict, f"f is not convex near t={verdict.witness}")
    mean = integrate_reference(f, a, b, cfg).value / (b - a)
    fa, fm, fb = (float(v) for v in evaluate(f, np.array([a, (a + b) / 2, b], dtype=float)))
    return Sandwich(fm, mean, (fa + fb) / 2)


# -- choice of x -------------------------------------------------------------

_GOLDEN = (math.sqrt(5) - 1) / 2


def golden_section(fun, lo, hi, tol):
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = fun(c), fun(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = fun(d)
    x = 0.5 * (lo + hi)
    return x, fun(x)


def minimize_over_x(fun, a, b, points=SCAN_POINTS):
    """Scan then golden-section refine ``fun`` over ``[a, b]``."""
    xs = np.linspace(a, b, points)
    vals = [fun(float(x)) for x in xs]
    i = int(np.argmin(vals))
    lo, hi = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, points - 1)])
    x_best, v_best = golden_section(fun, lo, hi, 1e-10 * (b - a))
    candidates = [(v_best, x_best), (vals[i], float(xs[i])), (fun((a + b) / 2), (a + b) / 2)]
    v, x = min(candidates)
    return x, v


def x_profile(family, a, b, n, fa=0.0, fb=0.0, fmid=0.0, hp=DEFAULT_P):
    """The bound of ``family`` as a function of ``x`` for fixed endpoint data."""
    if family == CONVEX:
        return lambda x: convex_value(a, b, x, n, fa, fb)
    if family == HOLDER:
        return lambda x: holder_value(a, b, x, n, hp, fa, fb)
    if family == CONCAVE:
        return lambda x: concave_value(a, b, x, n, hp, fmid)
    if family == N1:
        if n != 1:
            raise ValueError("n1-c12 requires n = 1")
        return lambda x: n1_value(a, b, x, fa, fb)
    raise ValueError(f"family {family!r} has no free x")


def optimize_x(f: Expr, a, b, n, family=CONVEX, hp=DEFAULT_P, assume_hypotheses=False, verdict=None):
    """Bound-minimising ``x`` in ``[a, b]`` for ``family``; returns ``(x*, value*)``."""
    _gate(f, a, b, n, family, hp, assume_hypotheses, verdict)
    fa, fb = nth_magnitudes(f, a, b, n) if family != CONCAVE else (0.0, 0.0)
    fmid = mid_magnitude(f, a, b, n) if family == CONCAVE else 0.0
    return minimize_over_x(x_profile(family, a, b, n, fa, fb, fmid, hp), a, b)


# -- comparison --------------------------------------------------------------


@dataclass
class Comparison:
    reports: list
    minimum: str | None
    skipped: dict = field(default_factory=dict)


def _is_mid(a, b, x):
    return abs(x - (a + b) / 2) <= 1e-15 * max(1.0, abs(a), abs(b))


def compare_bounds(f: Expr, p: RuleParams, hp=DEFAULT_P, assume_hypotheses=False) -> Comparison:
    """Every family whose shape and hypothesis fit ``p``, minimum flagged.

    The minimum is taken on the integral scale; ties go to the family that
    comes first in FAMILIES.
    """
    a, b, x, n = p.a, p.b, p.x, p.n
    mid = _is_mid(a, b, x)
    reports = []
    skipped = {}
    verdicts = {}
    for family in FAMILIES:
        if family == MIDPOINT and not mid:
            skipped[family] = "x is not the midpoint"
            continue
        if family in (N1, DA11, DA12) and n != 1:
            skipped[family] = "requires n = 1"
            continue
        if family in (DA11, DA12) and not mid:
            skipped[family] = "x is not the midpoint"
            continue
        key = hypothesis_for(family, hp)
        if key not in verdicts:
            verdicts[key] = check_hypothesis(f, a, b, n, family, hp, assume_hypotheses)
        verdict = verdicts[key]
        if not verdict.ok:
            skipped[family] = f"hypothesis {verdict.property} (q={verdict.q:g}) violated"
            continue
        fp = replace(p, x=(a + b) / 2) if family in (MIDPOINT, DA11, DA12) else p
        reports.append(bound(f, family, fp, hp, verdict=verdict))
    minimum = None
    if reports:
        minimum = min(reports, key=lambda r: r.integral_value).family
    return Comparison(reports, minimum, skipped)
