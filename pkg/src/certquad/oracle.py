"""Reference quadrature used to check everything else.

Globally adaptive Gauss-Kronrod (7/15) bisection.  This module depends only
on ``funcmodel`` so it stays independent of the rule, bound and integrator
code it is used to validate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np

from certquad.errors import DomainError, HypothesisViolated, NoConvergenceError
from certquad.funcmodel import ABS_Q_CONCAVE, Expr, check_convexity, derivatives

# Kronrod nodes on [0, 1) (symmetric), Kronrod weights, and Gauss weights for
# the odd-indexed nodes; values as tabulated in QUADPACK's qk15.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))  # 15 nodes, ascending
KRONROD_WEIGHTS = np.concatenate((_WGK[:-1], _WGK[::-1]))
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps

Integrand = Union[Expr, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class OracleConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-11
    max_depth: int = 50
    max_panels: int = 20000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT = OracleConfig()


class OracleResult(NamedTuple):
    value: float
    error: float


def _as_callable(fn: Integrand) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(fn, Expr):
        return lambda t: derivatives(fn, t, 0)[0]
    return fn


def _call(g, t) -> np.ndarray:
    with np.errstate(all="ignore"):
        y = np.asarray(g(t), dtype=float)
    y = np.broadcast_to(y, np.shape(t))
    if not np.all(np.isfinite(y)):
        raise DomainError("integrand is not finite on the interval")
    return y


def _panels(g, los: np.ndarray, his: np.ndarray):
    """Kronrod value, Gauss-Kronrod error and K15 of |g| for several panels."""
    centre = 0.5 * (los + his)
    half = 0.5 * (his - los)
    t = centre[:, None] + half[:, None] * NODES[None, :]
    y = _call(g, t.ravel()).reshape(t.shape)
    k = half * (y @ KRONROD_WEIGHTS)
    gs = half * (y @ GAUSS_WEIGHTS)
    resabs = half * (np.abs(y) @ KRONROD_WEIGHTS)
    return k, np.abs(k - gs), resabs


def _endpoint_ok(g, t: float) -> bool:
    try:
        _call(g, np.array([t]))
    except (DomainError, ArithmeticError, ValueError):
        return False
    return True


def _adaptive(g, a: float, b: float, cfg: OracleConfig) -> OracleResult:
    k, e, r = _panels(g, np.array([a]), np.array([b]))
    total, total_err, total_abs = float(k[0]), float(e[0]), float(r[0])
    heap = [(-total_err, 0, a, b, total, total_err, float(r[0]), 0)]
    seq = 1
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        # accuracy floor set by rounding in the panel sums
        floor = 50 * _EPS * total_abs
        if total_err <= tol or total_err <= floor:
            return OracleResult(total, total_err)
        if seq > cfg.max_panels:
            raise NoConvergenceError("panel budget exhausted", total, total_err)
        _, _, lo, hi, val, err, rabs, depth = heapq.heappop(heap)
        if depth >= cfg.max_depth:
            raise NoConvergenceError(
                f"no convergence at depth {depth} near [{lo}, {hi}]", total, total_err
            )
        mid = 0.5 * (lo + hi)
        k, e, r = _panels(g, np.array([lo, mid]), np.array([mid, hi]))
        total += float(k[0] + k[1]) - val
        total_err += float(e[0] + e[1]) - err
        total_abs += float(r[0] + r[1]) - rabs
        for i, (l, h) in enumerate(((lo, mid), (mid, hi))):
            heapq.heappush(heap, (-float(e[i]), seq, l, h, float(k[i]), float(e[i]), float(r[i]), depth + 1))
            seq += 1
        # the running sums drift; resum exactly once in a while
        if seq % 64 == 0:
            total = math.fsum(p[4] for p in heap)
            total_err = math.fsum(p[5] for p in heap)
            total_abs = math.fsum(p[6] for p in heap)


def integrate_reference(
    fn: Integrand, a: float, b: float, cfg: OracleConfig = DEFAULT
) -> OracleResult:
    """Integral of ``fn`` over ``[a, b]`` with an error estimate.

    ``fn`` is an expression tree or a vectorised callable.  If the integrand
    cannot be evaluated at an endpoint, that end is handled by the
    substitution ``t = end + (mid - end) * s**2``, which removes inverse
    square-root type singularities.
    """
    a, b = float(a), float(b)
    if a == b:
        return OracleResult(0.0, 0.0)
    if b < a:
        value, err = integrate_reference(fn, b, a, cfg)
        return OracleResult(-value, err)
    g = _as_callable(fn)
    left_ok = _endpoint_ok(g, a)
    right_ok = _endpoint_ok(g, b)
    if left_ok and right_ok:
        return _adaptive(g, a, b, cfg)
    mid = 0.5 * (a + b)
    parts = []
    for end, other, ok in ((a, mid, left_ok), (b, mid, right_ok)):
        lo, hi = (end, other) if end < other else (other, end)
        if ok:
            parts.append(_adaptive(g, lo, hi, cfg))
            continue
        span = other - end

        def substituted(s, end=end, span=span):
            return 2.0 * span * s * g(end + span * s * s)

        # s runs 0 -> 1 from the singular end towards the midpoint
        v, e = _adaptive(substituted, 0.0, 1.0, cfg)
        parts.append(OracleResult(v if span > 0 else -v, e))
    return OracleResult(parts[0].value + parts[1].value, parts[0].error + parts[1].error)


def kernel_integrand(f: Expr, x: float, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """``t -> (x - t)^n f^(n)(t) / n!`` as a vectorised callable."""
    scale = 1.0 / math.factorial(n)

    def kernel(t):
        return (x - t) ** n * derivatives(f, t, n)[n] * scale

    return kernel


class JensenCheck(NamedTuple):
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12 * (1.0 + abs(self.rhs))


def jensen_check(
    f: Expr,
    a: float,
    b: float,
    n: int,
    q: float,
    cfg: OracleConfig = DEFAULT,
    assume_hypotheses: bool = False,
) -> JensenCheck:
    """Mean of ``|f^(n)|**q`` over ``[a, b]`` against its value at the midpoint.

    Refuses (HypothesisViolated) unless ``|f^(n)|**q`` passes the concavity
    grid check; for concave integrands the mean never exceeds the midpoint
    value.
    """
    if q <= 1:
        raise ValueError("q must exceed 1")
    if not assume_hypotheses:
        verdict = check_convexity(f, a, b, n, ABS_Q_CONCAVE, q)
        if not verdict.ok:
            raise HypothesisViolated(verdict)

    def power(t):
        return np.abs(derivatives(f, t, n)[n]) ** q

    mean = integrate_reference(power, a, b, cfg).value / (b - a)
    mid = abs(float(derivatives(f, 0.5 * (a + b), n)[n])) ** q
    return JensenCheck(mean, mid)
