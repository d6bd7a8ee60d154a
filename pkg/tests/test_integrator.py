import math

import pytest

from certquad import bounds as B
from certquad.errors import HypothesisViolated
from certquad.funcmodel import parse
from certquad.integrator import composite, convergence_scan, integrate_certified, loglog_slope

EXP = parse("exp(x)")


def test_exp_reaches_tolerance():
    res = integrate_certified(EXP, 0, 1, 2, tol=1e-8)
    assert res.converged
    err = abs(res.estimate - (math.e - 1))
    assert err <= res.certified <= 1e-8
    assert len(res.panels) < 10000


def test_history_is_monotone():
    res = integrate_certified(EXP, 0, 1, 2, tol=1e-6)
    h = res.history
    assert all(later <= earlier for earlier, later in zip(h, h[1:]))


def test_panels_tile_the_interval():
    res = integrate_certified(parse("sin(x) + 2"), 0, 1, 1, B.CONVEX, tol=1e-4, assume_hypotheses=True)
    assert res.panels[0].lo == 0 and res.panels[-1].hi == 1
    for left, right in zip(res.panels, res.panels[1:]):
        assert left.hi == right.lo


def test_low_degree_polynomial_needs_one_panel():
    res = integrate_certified(parse("3*x - 1"), 0, 2, 2, tol=1e-14)
    assert len(res.panels) == 1
    assert res.certified == 0.0
    assert res.estimate == pytest.approx(4.0)


def test_huge_tolerance_single_panel():
    res = integrate_certified(EXP, 0, 1, 2, tol=1e3)
    assert len(res.panels) == 1
    assert res.certified == pytest.approx(B.midpoint_value(0, 1, 2, 1.0, math.e))


def test_panel_budget_reports_non_convergence():
    res = integrate_certified(EXP, 0, 1, 1, tol=1e-12, max_panels=8)
    assert not res.converged
    assert len(res.panels) <= 8
    assert abs(res.estimate - (math.e - 1)) <= res.certified


@pytest.mark.parametrize("x_choice", ["mid", "optimized", 0.25])
def test_x_choices_are_sound(x_choice):
    res = integrate_certified(EXP, 0, 1, 2, tol=1e-6, x_choice=x_choice)
    assert abs(res.estimate - (math.e - 1)) <= res.certified <= 1e-6


@pytest.mark.parametrize("family", [B.HOLDER, B.MIDPOINT])
def test_other_families(family):
    res = integrate_certified(EXP, 0, 1, 2, family=family, tol=1e-6)
    assert abs(res.estimate - (math.e - 1)) <= res.certified <= 1e-6


def test_concave_family():
    f = parse("(2/3) * x * sqrt(x)")
    res = integrate_certified(f, 0.5, 2, 1, family=B.CONCAVE, tol=1e-3)
    exact = (4 / 15) * (2**2.5 - 0.5**2.5)
    assert res.converged
    assert abs(res.estimate - exact) <= res.certified <= 1e-3


def test_hypothesis_violation_raises():
    with pytest.raises(HypothesisViolated):
        integrate_certified(parse("sin(x)"), 0, 6, 1)


def test_composite_matches_refined_rule():
    est, cert, panels = composite(EXP, 0, 1, 2, 16)
    assert len(panels) == 16
    assert abs(est - (math.e - 1)) <= cert


def test_loglog_slope():
    assert loglog_slope([1, 2, 4, 8], [1, 0.25, 0.0625, 0.015625]) == pytest.approx(-2.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_convergence_rates(n):
    scan = convergence_scan(EXP, 0, 1, n)
    # each panel bound is O(h^(n+1)); m of them sum to O(h^n)
    assert scan.panel_slope == pytest.approx(-(n + 1), abs=0.1)
    assert scan.certified_slope == pytest.approx(-n, abs=0.1)
    for row in scan.rows:
        assert row.true_error <= row.certified * (1 + 1e-9) + 1e-15


def test_true_error_rates():
    # the rule at the midpoint picks up an extra order for odd n
    slopes = {n: convergence_scan(EXP, 0, 1, n).error_slope for n in (1, 2, 3)}
    assert slopes[1] == pytest.approx(-2, abs=0.1)
    assert slopes[2] == pytest.approx(-2, abs=0.1)
    assert slopes[3] == pytest.approx(-4, abs=0.1)
