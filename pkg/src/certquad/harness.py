"""Randomised verification of every inequality and identity.

Test functions are built so that the relevant hypothesis holds by
construction: the n-th derivative is chosen first (a non-negative convex
quadratic, a scaled exponential, a square root of a positive affine
function, or a sine restricted to a window where it is concave) and
integrated n times in closed form.  Every trial draws from its own RNG
stream derived from ``(seed, suite, index)``, so any record can be
reproduced in isolation and trial order never matters.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from certquad import bounds as B
from certquad.funcmodel import (
    ABS_CONVEX,
    ABS_Q_CONCAVE,
    Const,
    Expr,
    X,
    check_convexity,
    derivatives,
    is_exact_capable,
    to_polynomial,
    to_source,
)
from certquad.funcmodel import expr as E
from certquad.identity import (
    RuleParams,
    kernel_moments,
    quad_rule,
    quad_rule_exact,
    rule_from_derivatives,
    verify_identity,
)
from certquad.oracle import integrate_reference, jensen_check

POLY_NONNEG_NTH = "poly-nonneg-nth"
EXP_SCALED = "exp-scaled"
SQRT_CONCAVE_Q = "sqrt-concave-q"
TRIG_WINDOW = "trig-window"
POLY_EXACT = "poly-exact"
KINDS = (POLY_NONNEG_NTH, EXP_SCALED, SQRT_CONCAVE_Q, TRIG_WINDOW, POLY_EXACT)

P_VALUES = (1.1, 1.5, 2.0, 3.0, 10.0)
PASS_SLACK = 1e-9
EQUALITY_TOL = 1e-12
TIGHTNESS_TOL = 1e-10

SUITES = (
    "lemma-identity",
    "thm21",
    "cor11",
    "cor12",
    "thm22",
    "thm23",
    "thm11",
    "thm12",
    "hh",
    "reductions",
    "tightness",
    "moments",
    "jensen",
)
SOUNDNESS_SUITES = ("thm21", "cor11", "cor12", "thm22", "thm23", "thm11", "thm12", "hh")

CSV_COLUMNS = ("suite", "fn", "a", "b", "x", "n", "p", "q", "lhs", "rhs", "margin", "pass", "seed", "index")


# -- function families ---------------------------------------------------------


@dataclass(frozen=True)
class FamilySpec:
    """Sampling ranges for one family kind."""

    kind: str
    a_range: tuple = (-3.0, 3.0)
    length_range: tuple = (0.1, 4.0)
    n_range: tuple = (1, 8)
    coeff_range: tuple = (-1.0, 1.0)


@dataclass(frozen=True)
class Draw:
    kind: str
    f: Expr
    a: float
    b: float
    n: int

    @property
    def description(self) -> str:
        return to_source(self.f)


def _c(v: float) -> Const:
    return Const(float(v))


def _lower_poly(rng, n: int, spec: FamilySpec, degree: int | None = None) -> Expr | None:
    """Random polynomial of degree < n (left unchanged by n derivatives)."""
    degree = n - 1 if degree is None else degree
    if degree < 0:
        return None
    lo, hi = spec.coeff_range
    terms = [_c(rng.uniform(lo, hi))]
    for j in range(1, degree + 1):
        terms.append(_c(rng.uniform(lo, hi)) * (X if j == 1 else X**j))
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _with_lower(core: Expr, lower: Expr | None) -> Expr:
    return core if lower is None else core + lower


def _interval(rng, spec: FamilySpec):
    a = rng.uniform(*spec.a_range)
    return a, a + rng.uniform(*spec.length_range)


def poly_nonneg_nth(rng, n, a, b, spec, constant=False, sign=None, lower_degree=None) -> Expr:
    """``f^(n) = s*(c2 (t-v)^2 + m0)`` with ``c2, m0 >= 0`` (so |f^(n)| is a
    non-negative convex quadratic, and ``|f^(n)|^q`` is convex for q >= 1)."""
    c2 = 0.0 if constant or rng.random() < 0.1 else rng.uniform(0.0, 2.0)
    v = rng.uniform(a - 1.0, b + 1.0)
    m0 = rng.uniform(0.0, 2.0)
    if sign is None:
        sign = 1.0 if rng.random() < 0.5 else -1.0
    parts = []
    if c2:
        # n-fold antiderivative of (t-v)^2 is 2 (t-v)^(n+2) / (n+2)!
        parts.append(_c(sign * 2 * c2 / math.factorial(n + 2)) * (X - _c(v)) ** (n + 2))
    if m0 or not parts:
        parts.append(_c(sign * m0 / math.factorial(n)) * X**n)
    core = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    return _with_lower(core, _lower_poly(rng, n, spec, lower_degree))


def exp_scaled(rng, n, a, b, spec, positive=False, lower_degree=None) -> Expr:
    """``A exp(lam t + c)`` plus a degree < n polynomial."""
    amp = rng.uniform(0.1, 3.0) * (1.0 if positive or rng.random() < 0.5 else -1.0)
    lam = rng.uniform(0.2, 2.0) * (1.0 if rng.random() < 0.5 else -1.0)
    shift = rng.uniform(-1.0, 1.0) - lam * 0.5 * (a + b)
    core = _c(amp) * E.exp(_c(lam) * X + _c(shift))
    return _with_lower(core, _lower_poly(rng, n, spec, lower_degree))


def sqrt_concave(rng, n, a, b, spec) -> Expr:
    """``f^(n) = s*sqrt(alpha t + beta)`` with the radicand >= delta > 0 on
    [a, b]; ``|f^(n)|^q`` is concave for every ``q <= 2``."""
    alpha = rng.uniform(0.2, 2.0) * (1.0 if rng.random() < 0.5 else -1.0)
    delta = rng.uniform(0.05, 2.0)
    beta = delta - alpha * (a if alpha > 0 else b)
    scale = rng.uniform(0.2, 2.0) * (1.0 if rng.random() < 0.5 else -1.0)
    # n-fold antiderivative of u^(1/2) is u^(n+1/2) / (alpha^n prod_{j<=n}(j+1/2))
    denom = alpha**n * math.prod(j + 0.5 for j in range(1, n + 1))
    u = _c(alpha) * X + _c(beta)
    core = _c(scale / denom) * (u**n if n > 1 else u) * E.sqrt(u)
    return _with_lower(core, _lower_poly(rng, n, spec))


def trig_window(rng, n, a, b, spec, q) -> Expr:
    """``f^(n) = A sin(w t + phi)`` with the phase confined to
    ``[t0, pi - t0]``, ``tan(t0)^2 = q - 1``, where ``sin^q`` is concave."""
    theta0 = math.atan(math.sqrt(max(q - 1.0, 0.0)))
    window = math.pi - 2 * theta0
    length = b - a
    w = window * rng.uniform(0.3, 1.0) / length
    phi = theta0 + rng.uniform(0.0, 1.0) * (window - w * length) - w * a
    amp = rng.uniform(0.2, 2.0) * (1.0 if rng.random() < 0.5 else -1.0)
    phase = math.remainder(phi - n * math.pi / 2, 2 * math.pi)
    core = _c(amp / w**n) * E.sin(_c(w) * X + _c(phase))
    return _with_lower(core, _lower_poly(rng, n, spec))


def poly_exact(rng, n, a, b, spec) -> Expr:
    """Random polynomial of degree <= n - 1 (the rule is exact on these)."""
    return _lower_poly(rng, n, spec)


def draw(kind: str, rng, spec: FamilySpec | None = None, n: int | None = None, q: float = 2.0) -> Draw:
    spec = spec or FamilySpec(kind)
    a, b = _interval(rng, spec)
    if n is None:
        n = int(rng.integers(spec.n_range[0], spec.n_range[1] + 1))
    if kind == POLY_NONNEG_NTH:
        f = poly_nonneg_nth(rng, n, a, b, spec)
    elif kind == EXP_SCALED:
        f = exp_scaled(rng, n, a, b, spec)
    elif kind == SQRT_CONCAVE_Q:
        f = sqrt_concave(rng, n, a, b, spec)
    elif kind == TRIG_WINDOW:
        f = trig_window(rng, n, a, b, spec, q)
    elif kind == POLY_EXACT:
        f = poly_exact(rng, n, a, b, spec)
    else:
        raise ValueError(f"unknown family kind {kind!r}")
    return Draw(kind, f, a, b, n)


def hypothesis_of(kind: str, q: float = 1.0) -> tuple[str, float] | None:
    """Grid-check mode that ``kind`` guarantees for exponent ``q``."""
    if kind in (POLY_NONNEG_NTH, EXP_SCALED, POLY_EXACT):
        return ABS_CONVEX, q
    if kind == SQRT_CONCAVE_Q and q <= 2.0:
        return ABS_Q_CONCAVE, q
    if kind == TRIG_WINDOW:
        return ABS_Q_CONCAVE, q
    return None


def validate_generator(kind: str, draws: int = 1000, seed: int = 0, q: float = 2.0) -> tuple[int, list]:
    """Grid-check the constructed hypothesis on ``draws`` samples.

    Returns the number verified and the failing draws.
    """
    mode, q = hypothesis_of(kind, q)
    failures = []
    for i in range(draws):
        d = draw(kind, _trial_rng(seed, f"gen-{kind}", i), q=q)
        verdict = check_convexity(d.f, d.a, d.b, d.n, mode, q)
        if not verdict.ok:
            failures.append((i, d, verdict))
    return draws - len(failures), failures


# -- records -------------------------------------------------------------------


@dataclass
class TrialRecord:
    suite: str
    fn: str
    a: float
    b: float
    x: float | None
    n: int | None
    p: float | None
    q: float | None
    lhs: float
    rhs: float
    margin: float
    passed: bool
    seed: int
    index: int

    def as_row(self) -> dict:
        row = asdict(self)
        row["pass"] = row.pop("passed")
        return {k: row[k] for k in CSV_COLUMNS}


def _inequality(suite, fn, a, b, x, n, p, q, lhs, rhs, seed, index) -> TrialRecord:
    margin = rhs - lhs
    return TrialRecord(suite, fn, a, b, x, n, p, q, lhs, rhs, margin,
                       bool(margin >= -PASS_SLACK * (1 + abs(lhs))), seed, index)


def _within(suite, fn, a, b, x, n, p, q, discrepancy, tol, seed, index) -> TrialRecord:
    """Record for a check whose LHS is a discrepancy that must not exceed ``tol``."""
    return TrialRecord(suite, fn, a, b, x, n, p, q, discrepancy, tol, tol - discrepancy,
                       bool(discrepancy <= tol), seed, index)


@dataclass
class SuiteSummary:
    suite: str
    trials: int
    passed: int
    min_margin: float
    argmin_index: int
    seed: int
    seconds: float = 0.0

    @property
    def all_passed(self) -> bool:
        return self.passed == self.trials

    def to_dict(self) -> dict:
        out = asdict(self)
        out["all_passed"] = self.all_passed
        return out


def summarize(records: list, seconds: float = 0.0) -> SuiteSummary:
    worst = min(records, key=lambda r: r.margin)
    return SuiteSummary(
        suite=records[0].suite,
        trials=len(records),
        passed=sum(r.passed for r in records),
        min_margin=worst.margin,
        argmin_index=worst.index,
        seed=records[0].seed,
        seconds=seconds,
    )


# -- trials ----------------------------------------------------------------------


def _trial_rng(seed: int, suite: str, index: int):
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(suite.encode()), index])


def reference_integral(f: Expr, a: float, b: float) -> float:
    """Exact for polynomials, reference quadrature otherwise."""
    if is_exact_capable(f):
        coeffs = to_polynomial(f)
        fa, fb = Fraction(a), Fraction(b)
        return float(sum((c * (fb ** (i + 1) - fa ** (i + 1)) / (i + 1) for i, c in enumerate(coeffs)), Fraction(0)))
    return integrate_reference(f, a, b).value


def _rule_error(d: Draw, x: float, n: int, integral: float, da, db) -> float:
    return abs(integral - rule_from_derivatives(da, db, d.a, d.b, x, n))


def _uniform_x(rng, a, b):
    return min(max(a + rng.uniform() * (b - a), a), b)


def _convex_kind(rng):
    return POLY_NONNEG_NTH if rng.random() < 0.5 else EXP_SCALED


def _trial(suite: str, seed: int, index: int) -> TrialRecord:
    rng = _trial_rng(seed, suite, index)
    rec = dict(seed=seed, index=index)

    if suite == "lemma-identity":
        kind = KINDS[int(rng.integers(len(KINDS)))]
        q = float(rng.choice([B.conjugate(p) for p in P_VALUES if p >= 2])) if kind == SQRT_CONCAVE_Q else 2.0
        d = draw(kind, rng, q=q)
        x = _uniform_x(rng, d.a, d.b)
        check = verify_identity(d.f, RuleParams(d.a, d.b, x, d.n))
        tol = 1e-9 * (1 + abs(check.integral))
        return _within(suite, d.description, d.a, d.b, x, d.n, None, None, check.residual, tol, **rec)

    if suite in ("thm21", "cor11", "thm22"):
        d = draw(_convex_kind(rng), rng)
        x = 0.5 * (d.a + d.b) if suite == "cor11" else _uniform_x(rng, d.a, d.b)
        da, db = derivatives(d.f, d.a, d.n), derivatives(d.f, d.b, d.n)
        lhs = _rule_error(d, x, d.n, reference_integral(d.f, d.a, d.b), da, db)
        fa, fb = abs(da[d.n]), abs(db[d.n])
        p = q = None
        if suite == "thm21":
            rhs = B.convex_value(d.a, d.b, x, d.n, fa, fb)
        elif suite == "cor11":
            rhs = B.midpoint_value(d.a, d.b, d.n, fa, fb)
        else:
            p = float(rng.choice(P_VALUES))
            q = B.conjugate(p)
            rhs = B.holder_value(d.a, d.b, x, d.n, p, fa, fb)
        return _inequality(suite, d.description, d.a, d.b, x, d.n, p, q, lhs, rhs, **rec)

    if suite == "cor12":
        d = draw(_convex_kind(rng), rng, n=1)
        x = _uniform_x(rng, d.a, d.b)
        da, db = derivatives(d.f, d.a, 1), derivatives(d.f, d.b, 1)
        lhs = _rule_error(d, x, 1, reference_integral(d.f, d.a, d.b), da, db)
        rhs = B.n1_value(d.a, d.b, x, abs(da[1]), abs(db[1]))
        return _inequality(suite, d.description, d.a, d.b, x, 1, None, None, lhs, rhs, **rec)

    if suite == "thm23":
        p = float(rng.choice(P_VALUES))
        q = B.conjugate(p)
        kind = SQRT_CONCAVE_Q if q <= 2.0 and rng.random() < 0.5 else TRIG_WINDOW
        d = draw(kind, rng, q=q)
        x = _uniform_x(rng, d.a, d.b)
        lhs = abs(reference_integral(d.f, d.a, d.b) - quad_rule(d.f, RuleParams(d.a, d.b, x, d.n)))
        fmid = B.mid_magnitude(d.f, d.a, d.b, d.n)
        rhs = B.concave_value(d.a, d.b, x, d.n, p, fmid)
        return _inequality(suite, d.description, d.a, d.b, x, d.n, p, q, lhs, rhs, **rec)

    if suite in ("thm11", "thm12"):
        d = draw(_convex_kind(rng), rng, n=1)
        da, db = derivatives(d.f, d.a, 1), derivatives(d.f, d.b, 1)
        mean = reference_integral(d.f, d.a, d.b) / (d.b - d.a)
        lhs = abs((da[0] + db[0]) / 2 - mean)
        p = q = None
        if suite == "thm11":
            rhs = B.da_t11_value(d.a, d.b, abs(da[1]), abs(db[1]))
        else:
            p = float(rng.choice(P_VALUES))
            q = B.conjugate(p)
            rhs = B.da_t12_value(d.a, d.b, p, abs(da[1]), abs(db[1]))
        mid = 0.5 * (d.a + d.b)
        return _inequality(suite, d.description, d.a, d.b, mid, 1, p, q, lhs, rhs, **rec)

    if suite == "hh":
        spec = FamilySpec(POLY_NONNEG_NTH)
        a, b = _interval(rng, spec)
        if rng.random() < 0.5:
            f = poly_nonneg_nth(rng, 2, a, b, spec, sign=1.0)
        else:
            f = exp_scaled(rng, 2, a, b, spec, positive=True)
        lo, mid_v, hi = (float(v) for v in derivatives(f, np.array([a, 0.5 * (a + b), b]), 0)[0])
        lower, upper = mid_v, 0.5 * (lo + hi)
        mean = reference_integral(f, a, b) / (b - a)
        # lower <= mean <= upper  <=>  |mean - centre| <= half-width
        lhs = abs(mean - 0.5 * (lower + upper))
        rhs = 0.5 * (upper - lower)
        return _inequality(suite, to_source(f), a, b, 0.5 * (a + b), None, None, None, lhs, rhs, **rec)

    if suite == "reductions":
        d = draw(_convex_kind(rng), rng)
        a, b, n = d.a, d.b, d.n
        mid = 0.5 * (a + b)
        p = float(rng.choice(P_VALUES))
        d1a, d1b = derivatives(d.f, a, max(n, 1)), derivatives(d.f, b, max(n, 1))
        f1a, f1b = abs(d1a[1]), abs(d1b[1])
        fna, fnb = abs(d1a[n]), abs(d1b[n])
        pairs = [
            (B.n1_value(a, b, mid, f1a, f1b), (b - a) * B.da_t11_value(a, b, f1a, f1b)),
            (B.holder_value(a, b, mid, 1, p, f1a, f1b), (b - a) * B.da_t12_value(a, b, p, f1a, f1b)),
            (B.holder_value(a, b, mid, 1, p, f1a, f1b), (b - a) * B.holder_midpoint_mean_value(a, b, p, f1a, f1b)),
            (B.convex_value(a, b, mid, n, fna, fnb), B.midpoint_value(a, b, n, fna, fnb)),
        ]
        disc = max(_rel(u, v) for u, v in pairs)
        return _within(suite, d.description, a, b, mid, n, p, B.conjugate(p), disc, EQUALITY_TOL, **rec)

    if suite == "tightness":
        spec = FamilySpec(POLY_NONNEG_NTH)
        a, b = _interval(rng, spec)
        n = int(rng.choice([2, 4, 6, 8]))
        f = poly_nonneg_nth(rng, n, a, b, spec, constant=True)
        p_ = RuleParams(a, b, 0.5 * (a + b), n)
        coeffs = to_polynomial(f)
        fa_, fb_ = Fraction(a), Fraction(b)
        integral = sum((c * (fb_ ** (i + 1) - fa_ ** (i + 1)) / (i + 1) for i, c in enumerate(coeffs)), Fraction(0))
        true_err = float(abs(integral - quad_rule_exact(f, p_)))
        fa, fb = B.nth_magnitudes(f, a, b, n)
        value = B.convex_value(a, b, p_.x, n, fa, fb)
        return _within(suite, to_source(f), a, b, p_.x, n, None, None, _rel(true_err, value), TIGHTNESS_TOL, **rec)

    if suite == "moments":
        a = rng.uniform(-3, 3)
        b = a + rng.uniform(0.1, 4)
        x = _uniform_x(rng, a, b)
        n = int(rng.integers(1, 11))
        p_ = RuleParams(a, b, x, n)
        m = kernel_moments(p_)
        ref = moment_integrals(p_)
        disc = max(_rel(u, v) for u, v in zip(m.as_tuple(), ref))
        return _within(suite, "kernel-moments", a, b, x, n, None, None, disc, 1e-10, **rec)

    if suite == "jensen":
        p = float(rng.choice(P_VALUES))
        q = B.conjugate(p)
        kind = SQRT_CONCAVE_Q if q <= 2.0 and rng.random() < 0.5 else TRIG_WINDOW
        d = draw(kind, rng, q=q)
        lhs, rhs = jensen_check(d.f, d.a, d.b, d.n, q, assume_hypotheses=True)
        return _inequality(suite, d.description, d.a, d.b, 0.5 * (d.a + d.b), d.n, p, q, lhs, rhs, **rec)

    raise ValueError(f"unknown suite {suite!r}")


def moment_integrals(p: RuleParams):
    """The four moment integrals by reference quadrature."""
    a, b, x, n = p.a, p.b, p.x, p.n
    return (
        integrate_reference(lambda t: (x - t) ** n * (b - t), a, x).value,
        integrate_reference(lambda t: (x - t) ** n * (t - a), a, x).value,
        integrate_reference(lambda t: (t - x) ** n * (t - a), x, b).value,
        integrate_reference(lambda t: (t - x) ** n * (b - t), x, b).value,
    )


def _rel(u: float, v: float) -> float:
    scale = max(abs(u), abs(v))
    return 0.0 if scale == 0 else abs(u - v) / scale


def run_trial(suite: str, seed: int, index: int) -> TrialRecord:
    """Reproduce a single trial from its ``(seed, index)``."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return _trial(suite, seed, index)


def _run_chunk(args):
    suite, seed, start, stop = args
    return [_trial(suite, seed, i) for i in range(start, stop)]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CERTQUAD_THREADS", "1")))
    except ValueError:
        return 1


def run_suite(suite: str, trials: int, seed: int = 0, workers: int | None = None):
    """Run ``trials`` independent trials; returns ``(records, summary)``.

    Failures are recorded, never raised.  ``workers`` (default from
    ``CERTQUAD_THREADS``) splits the index range over processes; results are
    identical for any worker count.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = default_workers() if workers is None else workers
    start = time.perf_counter()
    if workers <= 1 or trials < 200:
        records = _run_chunk((suite, seed, 0, trials))
    else:
        step = math.ceil(trials / (4 * workers))
        chunks = [(suite, seed, i, min(i + step, trials)) for i in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    return records, summarize(records, time.perf_counter() - start)


# -- profiles ----------------------------------------------------------------------


@dataclass
class ProfileRow:
    x: float
    mean: float
    min: float
    max: float
    count: int


def _ratio(f, a, b, x, n, family, hp, integral, da, db, fmid=None):
    lhs = abs(integral - rule_from_derivatives(da, db, a, b, x, n))
    fa, fb = abs(da[n]), abs(db[n])
    if family == B.CONVEX:
        rhs = B.convex_value(a, b, x, n, fa, fb)
    elif family == B.HOLDER:
        rhs = B.holder_value(a, b, x, n, hp, fa, fb)
    elif family == B.CONCAVE:
        rhs = B.concave_value(a, b, x, n, hp, fmid)
    elif family == B.N1:
        rhs = B.n1_value(a, b, x, fa, fb)
    else:
        raise ValueError(f"family {family!r} has no free x")
    return None if rhs == 0 else lhs / rhs


def ratio_profile_expr(f: Expr, a, b, n, xs, family=B.CONVEX, hp=B.DEFAULT_P) -> list:
    """Tightness ratio ``|error| / bound`` at each absolute ``x`` in ``xs``."""
    integral = reference_integral(f, a, b)
    da, db = derivatives(f, float(a), n), derivatives(f, float(b), n)
    fmid = B.mid_magnitude(f, a, b, n) if family == B.CONCAVE else None
    rows = []
    for x in xs:
        r = _ratio(f, a, b, float(x), n, family, hp, integral, da, db, fmid)
        r = float("nan") if r is None else r
        rows.append(ProfileRow(float(x), r, r, r, 0 if math.isnan(r) else 1))
    return rows


def ratio_profile(kind: str, n: int, x_grid, trials: int, seed: int = 0, family=B.CONVEX, hp=B.DEFAULT_P) -> list:
    """Tightness ratios over random draws of ``kind``.

    ``x_grid`` holds relative positions in ``[0, 1]``; each draw maps them
    onto its own interval.
    """
    x_grid = [float(s) for s in x_grid]
    if any(not 0.0 <= s <= 1.0 for s in x_grid):
        raise ValueError("x_grid positions must lie in [0, 1]")
    q = B.conjugate(hp)
    samples = [[] for _ in x_grid]
    for i in range(trials):
        rng = _trial_rng(seed, f"profile-{kind}", i)
        d = draw(kind, rng, n=n, q=q)
        integral = reference_integral(d.f, d.a, d.b)
        da, db = derivatives(d.f, d.a, n), derivatives(d.f, d.b, n)
        fmid = B.mid_magnitude(d.f, d.a, d.b, n) if family == B.CONCAVE else None
        for j, s in enumerate(x_grid):
            x = min(max(d.a + s * (d.b - d.a), d.a), d.b)
            r = _ratio(d.f, d.a, d.b, x, n, family, hp, integral, da, db, fmid)
            if r is not None:
                samples[j].append(r)
    rows = []
    for s, vals in zip(x_grid, samples):
        if vals:
            rows.append(ProfileRow(s, float(np.mean(vals)), float(min(vals)), float(max(vals)), len(vals)))
        else:
            rows.append(ProfileRow(s, float("nan"), float("nan"), float("nan"), 0))
    return rows


def profile_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "mean", "min", "max", "count"])
    for r in rows:
        w.writerow([_fmt(r.x), _fmt(r.mean), _fmt(r.min), _fmt(r.max), r.count])
    return buf.getvalue()


# -- reports -------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def records_to_json(records: list) -> str:
    return json.dumps([r.as_row() for r in records], indent=1)


def records_from_json(text: str) -> list:
    out = []
    for row in json.loads(text):
        row = dict(row)
        row["passed"] = row.pop("pass")
        out.append(TrialRecord(**row))
    return out


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = r.as_row()
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        vals = {}
        for k in CSV_COLUMNS:
            raw = row[k]
            key = "passed" if k == "pass" else k
            if raw == "":
                vals[key] = None
            elif key == "passed":
                vals[key] = raw == "true"
            elif key in ("suite", "fn"):
                vals[key] = raw
            elif key in ("n", "seed", "index"):
                vals[key] = int(raw)
            else:
                vals[key] = float(raw)
        out.append(TrialRecord(**vals))
    return out


def records_to_text(records: list) -> str:
    by_suite = {}
    for r in records:
        by_suite.setdefault(r.suite, []).append(r)
    lines = [f"{'suite':<16}{'trials':>8}{'passed':>8}{'min margin':>16}{'argmin':>8}"]
    for suite, recs in by_suite.items():
        s = summarize(recs)
        lines.append(f"{suite:<16}{s.trials:>8}{s.passed:>8}{s.min_margin:>16.6g}{s.argmin_index:>8}")
    failed = [r for r in records if not r.passed]
    for r in failed[:20]:
        lines.append(f"FAIL {r.suite} #{r.index} seed={r.seed} lhs={r.lhs:.6g} rhs={r.rhs:.6g} fn={r.fn}")
    if len(failed) > 20:
        lines.append(f"... {len(failed) - 20} more failures")
    return "\n".join(lines) + "\n"


def emit_report(records: list, fmt: str = "text", path: str | None = None) -> str:
    """Serialise records as ``json``, ``csv`` or ``text``; write to ``path`` if given."""
    if not records:
        raise ValueError("no records to report")
    if fmt == "json":
        text = records_to_json(records)
    elif fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "text":
        text = records_to_text(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
