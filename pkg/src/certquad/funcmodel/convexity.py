"""Grid midpoint tests for the convexity hypotheses on |f^(n)|.

The test samples ``g = |f^(n)|**q`` on ``m_grid + 1`` equispaced points and
checks ``g(mid) <= (g(u) + g(v))/2 + tol`` for every symmetric triple at
spacings 1, 2, 4, ... grid steps, plus the triple (a, (a+b)/2, b).  The
concave test reverses the inequality.  It cannot prove convexity, only
catch violations that the grid resolves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from certquad.errors import DomainError
from certquad.funcmodel.expr import Expr
from certquad.funcmodel.jets import derivatives

ABS_CONVEX = "abs-convex"
ABS_Q_CONCAVE = "abs-q-concave"

VERIFIED = "verified-on-grid"
VIOLATED = "violated"
ASSUMED = "assumed-by-user"

DEFAULT_GRID = 129
# relative inward step used when a derivative does not exist at an endpoint
ENDPOINT_NUDGE = 1e-13


@dataclass(frozen=True)
class ConvexityVerdict:
    property: str  # "abs-nth-convex" | "abs-nth-q-concave" | "convex"
    q: float
    status: str
    m_grid: int
    tol: float
    n: int = 0
    a: float = float("nan")
    b: float = float("nan")
    witness: float | None = None
    excess: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status != VIOLATED

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "q": self.q,
            "status": self.status,
            "m_grid": self.m_grid,
            "tol": self.tol,
            "witness": self.witness,
        }


def assumed(mode: str = ABS_CONVEX, q: float = 1.0, n: int = 0) -> ConvexityVerdict:
    prop = "abs-nth-convex" if mode == ABS_CONVEX else "abs-nth-q-concave"
    return ConvexityVerdict(prop, q, ASSUMED, 0, 0.0, n)


def _sample(f: Expr, ts: np.ndarray, n: int) -> np.ndarray:
    """n-th derivative on the grid, nudging endpoints inward if needed."""
    try:
        return derivatives(f, ts, n)[n]
    except DomainError:
        pass
    inner = derivatives(f, ts[1:-1], n)[n]
    h = (ts[-1] - ts[0]) * ENDPOINT_NUDGE
    ends = []
    for t, step in ((ts[0], h), (ts[-1], -h)):
        try:
            ends.append(float(derivatives(f, float(t), n)[n]))
        except DomainError:
            ends.append(float(derivatives(f, float(t + step), n)[n]))
    return np.concatenate(([ends[0]], inner, [ends[1]]))


def _midpoint_violations(g: np.ndarray, g_mid: float, sign: float, tol: float):
    """Largest signed violation over all dyadic triples and its index."""
    m = len(g) - 1
    worst = -np.inf
    worst_idx = None
    s = 1
    while 2 * s <= m:
        centre = g[s : m - s + 1]
        chord = 0.5 * (g[: m - 2 * s + 1] + g[2 * s :])
        excess = sign * (centre - chord) - tol
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst, worst_idx = float(excess[i]), i + s
        s *= 2
    whole = sign * (g_mid - 0.5 * (g[0] + g[-1])) - tol
    if whole > worst:
        worst, worst_idx = float(whole), -1
    return worst, worst_idx


def _grid_check(f, a, b, n, q, sign, m_grid, tol, absolute, prop):
    if not a < b:
        raise ValueError("need a < b")
    if m_grid < 3:
        raise ValueError("m_grid must be >= 3")
    a, b = float(a), float(b)
    ts = np.linspace(a, b, m_grid + 1)
    vals = _sample(f, ts, n)
    mid_val = float(_sample(f, np.array([a, 0.5 * (a + b), b]), n)[1])
    if absolute:
        g = np.abs(vals) ** q
        g_mid = abs(mid_val) ** q
    else:
        g, g_mid = vals, mid_val
    if tol is None:
        tol = 1e-10 * (1.0 + float(np.max(np.abs(g))))
    worst, idx = _midpoint_violations(g, g_mid, sign, tol)
    if worst > 0:
        witness = 0.5 * (a + b) if idx == -1 else float(ts[idx])
        return ConvexityVerdict(prop, q, VIOLATED, m_grid, tol, n, a, b, witness, worst)
    return ConvexityVerdict(prop, q, VERIFIED, m_grid, tol, n, a, b)


def check_convexity(
    f: Expr,
    a: float,
    b: float,
    n: int,
    mode: str = ABS_CONVEX,
    q: float = 1.0,
    m_grid: int = DEFAULT_GRID,
    tol: float | None = None,
) -> ConvexityVerdict:
    """Grid-check that ``|f^(n)|**q`` is convex (``abs-convex``) or concave
    (``abs-q-concave``) on ``[a, b]``.

    ``tol`` defaults to ``1e-10 * (1 + max|g|)``.  Domain errors from the
    derivative evaluation propagate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if q < 1:
        raise ValueError("q must be >= 1")
    if mode == ABS_CONVEX:
        return _grid_check(f, a, b, n, q, 1.0, m_grid, tol, True, "abs-nth-convex")
    if mode == ABS_Q_CONCAVE:
        return _grid_check(f, a, b, n, q, -1.0, m_grid, tol, True, "abs-nth-q-concave")
    raise ValueError(f"unknown mode {mode!r}")


def check_function_convex(
    f: Expr, a: float, b: float, m_grid: int = DEFAULT_GRID, tol: float | None = None
) -> ConvexityVerdict:
    """Grid-check that ``f`` itself (signed, no absolute value) is convex."""
    return _grid_check(f, a, b, 0, 1.0, 1.0, m_grid, tol, False, "convex")
