"""Composite certified integration.

The rule and one bound family are applied panel by panel.  Both the
integral and the bound are additive over a partition, so the sum of the
panel bounds certifies the composite estimate.  Refinement bisects the
panel with the largest bound until the total meets the tolerance.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from certquad import bounds as B
from certquad.errors import HypothesisViolated
from certquad.funcmodel import ConvexityVerdict, Expr, derivatives
from certquad.identity import rule_from_derivatives
from certquad.oracle import DEFAULT, OracleConfig, integrate_reference

X_MID = "mid"
X_OPT = "optimized"


@dataclass(frozen=True)
class Panel:
    lo: float
    hi: float
    x: float
    estimate: float
    certified: float
    verdict: ConvexityVerdict | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "x": self.x, "estimate": self.estimate, "certified": self.certified}


@dataclass
class QuadratureResult:
    estimate: float
    certified: float
    panels: list
    n: int
    family: str
    evaluations: int
    converged: bool
    tol: float = float("nan")
    verdict: ConvexityVerdict | None = None
    history: list = field(default_factory=list, repr=False)

    def to_dict(self, include_panels: bool = True) -> dict:
        out = {
            "estimate": self.estimate,
            "certified": self.certified,
            "n": self.n,
            "family": self.family,
            "tol": self.tol,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "panel_count": len(self.panels),
            "hypothesis": None if self.verdict is None else self.verdict.to_dict(),
        }
        if include_panels:
            out["panels"] = [p.to_dict() for p in self.panels]
        return out


class _PanelEvaluator:
    """Evaluates panels, caching endpoint derivatives shared by neighbours."""

    def __init__(self, f, n, family, hp, x_choice, verdict):
        self.f = f
        self.n = n
        self.family = family
        self.hp = hp
        self.x_choice = x_choice
        self.verdict = verdict
        self.cache = {}
        self.evaluations = 0

    def derivs(self, t):
        d = self.cache.get(t)
        if d is None:
            d = derivatives(self.f, t, self.n)
            self.cache[t] = d
            self.evaluations += 1
        return d

    def mid_magnitude(self, lo, hi):
        self.evaluations += 1
        return abs(float(derivatives(self.f, 0.5 * (lo + hi), self.n)[self.n]))

    def __call__(self, lo, hi, verdict=None):
        n, fam = self.n, self.family
        da, db = self.derivs(lo), self.derivs(hi)
        fa, fb = abs(da[n]), abs(db[n])
        fmid = self.mid_magnitude(lo, hi) if fam == B.CONCAVE else 0.0
        if fam in (B.MIDPOINT, B.DA11, B.DA12):
            x = 0.5 * (lo + hi)
        elif self.x_choice == X_MID:
            x = 0.5 * (lo + hi)
        elif self.x_choice == X_OPT:
            x, _ = B.minimize_over_x(B.x_profile(fam, lo, hi, n, fa, fb, fmid, self.hp), lo, hi)
        else:
            x = lo + float(self.x_choice) * (hi - lo)
            x = min(max(x, lo), hi)
        estimate = rule_from_derivatives(da, db, lo, hi, x, n)
        certified = _family_value(fam, lo, hi, x, n, self.hp, fa, fb, fmid)
        return Panel(lo, hi, x, estimate, certified, verdict or self.verdict)


def _family_value(fam, lo, hi, x, n, hp, fa, fb, fmid):
    if fam == B.CONVEX:
        return B.convex_value(lo, hi, x, n, fa, fb)
    if fam == B.HOLDER:
        return B.holder_value(lo, hi, x, n, hp, fa, fb)
    if fam == B.CONCAVE:
        return B.concave_value(lo, hi, x, n, hp, fmid)
    if fam == B.MIDPOINT:
        return B.midpoint_value(lo, hi, n, fa, fb)
    if fam == B.N1:
        return B.n1_value(lo, hi, x, fa, fb)
    if fam == B.DA11:
        return B.da_t11_value(lo, hi, fa, fb) * (hi - lo)
    if fam == B.DA12:
        return B.da_t12_value(lo, hi, hp, fa, fb) * (hi - lo)
    raise ValueError(f"unknown bound family {fam!r}")


def _validate(a, b, n, family, x_choice):
    if not a < b:
        raise ValueError("need a < b")
    if n < 1:
        raise ValueError("n must be >= 1")
    if family not in B.FAMILIES:
        raise ValueError(f"unknown bound family {family!r}")
    if family in (B.N1, B.DA11, B.DA12) and n != 1:
        raise ValueError(f"{family} requires n = 1")
    if x_choice not in (X_MID, X_OPT):
        s = float(x_choice)
        if not 0.0 <= s <= 1.0:
            raise ValueError("a fixed x position must lie in [0, 1]")


def _global_verdict(f, a, b, n, family, hp, assume_hypotheses):
    verdict = B.check_hypothesis(f, a, b, n, family, hp, assume_hypotheses)
    if not verdict.ok:
        raise HypothesisViolated(verdict, f"{family}: {verdict.property} fails near t={verdict.witness}")
    return verdict


def integrate_certified(
    f: Expr,
    a: float,
    b: float,
    n: int,
    family: str = B.CONVEX,
    hp: float = B.DEFAULT_P,
    tol: float = 1e-8,
    max_panels: int = 10000,
    x_choice=X_MID,
    assume_hypotheses: bool = False,
    recheck_panels: bool = False,
) -> QuadratureResult:
    """Refine until the summed certified bound is at most ``tol``.

    ``x_choice`` is ``"mid"``, ``"optimized"`` or a fixed relative position
    in ``[0, 1]`` applied to every panel.  The hypothesis is checked once on
    ``[a, b]`` (restrictions of convex functions stay convex); with
    ``recheck_panels`` every new panel is re-checked as well.  Running out of
    panels is not an error: the result has ``converged=False``.
    """
    a, b = float(a), float(b)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_panels < 1:
        raise ValueError("max_panels must be >= 1")
    _validate(a, b, n, family, x_choice)
    verdict = _global_verdict(f, a, b, n, family, hp, assume_hypotheses)
    evaluate = _PanelEvaluator(f, n, family, hp, x_choice, verdict)

    def make(lo, hi):
        v = None
        if recheck_panels and not assume_hypotheses:
            v = _global_verdict(f, lo, hi, n, family, hp, False)
        return evaluate(lo, hi, v)

    first = make(a, b)
    heap = [(-first.certified, 0, first)]
    seq = 1
    # exact running sum keeps the history free of rounding drift
    exact_total = Fraction(first.certified)
    total = first.certified
    history = [total]
    while total > tol and len(heap) < max_panels:
        _, _, worst = heapq.heappop(heap)
        if worst.certified == 0.0:
            heapq.heappush(heap, (0.0, seq, worst))
            break
        mid = 0.5 * (worst.lo + worst.hi)
        if not worst.lo < mid < worst.hi:
            heapq.heappush(heap, (-worst.certified, seq, worst))
            break
        exact_total -= Fraction(worst.certified)
        for lo, hi in ((worst.lo, mid), (mid, worst.hi)):
            child = make(lo, hi)
            heapq.heappush(heap, (-child.certified, seq, child))
            exact_total += Fraction(child.certified)
            seq += 1
        total = float(exact_total)
        history.append(total)
    panels = sorted((item[2] for item in heap), key=lambda p: p.lo)
    certified = math.fsum(p.certified for p in panels)
    return QuadratureResult(
        estimate=math.fsum(p.estimate for p in panels),
        certified=certified,
        panels=panels,
        n=n,
        family=family,
        evaluations=evaluate.evaluations,
        converged=certified <= tol,
        tol=tol,
        verdict=verdict,
        history=history,
    )


def composite(f: Expr, a, b, n, m, family=B.CONVEX, hp=B.DEFAULT_P, x_choice=X_MID, verdict=None):
    """Uniform ``m``-panel composite rule; returns ``(estimate, certified, panels)``."""
    evaluate = _PanelEvaluator(f, n, family, hp, x_choice, verdict)
    edges = [a + (b - a) * i / m for i in range(m)] + [b]
    panels = [evaluate(edges[i], edges[i + 1]) for i in range(m)]
    return (
        math.fsum(p.estimate for p in panels),
        math.fsum(p.certified for p in panels),
        panels,
    )


@dataclass
class ScanRow:
    panels: int
    certified: float
    max_panel_certified: float
    true_error: float


@dataclass
class ConvergenceScan:
    rows: list
    reference: float
    certified_slope: float
    panel_slope: float
    error_slope: float

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "certified_slope": self.certified_slope,
            "panel_slope": self.panel_slope,
            "error_slope": self.error_slope,
            "rows": [vars(r) for r in self.rows],
        }


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x) over positive ``y``."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if y > 0]
    if len(pts) < 2:
        return float("nan")
    lx, ly = np.array(pts).T
    return float(np.polyfit(lx, ly, 1)[0])


def convergence_scan(
    f: Expr,
    a: float,
    b: float,
    n: int,
    family: str = B.CONVEX,
    panel_counts=(1, 2, 4, 8, 16, 32, 64, 128, 256),
    hp: float = B.DEFAULT_P,
    assume_hypotheses: bool = False,
    cfg: OracleConfig = DEFAULT,
) -> ConvergenceScan:
    """Certified sum, largest panel bound and true error for uniform panels.

    Slopes are least-squares fits in log-log coordinates against the panel
    count.  With ``m`` panels of width ``h = (b-a)/m`` each panel bound is
    O(h^(n+1)), so ``panel_slope`` tends to ``-(n+1)`` while the summed bound
    over ``m`` panels decays one order slower.
    """
    a, b = float(a), float(b)
    _validate(a, b, n, family, X_MID)
    verdict = _global_verdict(f, a, b, n, family, hp, assume_hypotheses)
    reference = integrate_reference(f, a, b, cfg).value
    rows = []
    for m in panel_counts:
        est, cert, panels = composite(f, a, b, n, m, family, hp, X_MID, verdict)
        rows.append(ScanRow(m, cert, max(p.certified for p in panels), abs(reference - est)))
    ms = [r.panels for r in rows]
    return ConvergenceScan(
        rows,
        reference,
        loglog_slope(ms, [r.certified for r in rows]),
        loglog_slope(ms, [r.max_panel_certified for r in rows]),
        loglog_slope(ms, [r.true_error for r in rows]),
    )
