import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from certquad import bounds as B
from certquad.errors import HypothesisViolated
from certquad.funcmodel import parse
from certquad.identity import RuleParams, quad_rule
from certquad.oracle import integrate_reference

X2 = parse("x^2")
SQRT_ANTI = parse("(2/3) * x * sqrt(x)")


def true_error(f, p):
    return abs(integrate_reference(f, p.a, p.b).value - quad_rule(f, p))


def test_convex_tight_case():
    p = RuleParams(0.0, 1.0, 0.5, 2)
    r = B.bound_convex(X2, p)
    assert r.value == pytest.approx(1 / 12, rel=1e-14)
    assert r.fa == r.fb == 2.0
    assert true_error(X2, p) == pytest.approx(r.value, rel=1e-12)


def test_convex_n1_example():
    r = B.bound_convex(X2, RuleParams(0.0, 1.0, 0.5, 1))
    assert r.value == pytest.approx(0.25, rel=1e-14)


def test_midpoint_examples():
    assert B.bound_midpoint(X2, 0, 1, 2).value == pytest.approx(1 / 12, rel=1e-14)
    assert B.bound_midpoint(X2, 0, 1, 1).value == pytest.approx(B.da_t11_value(0, 1, 0.0, 2.0), rel=1e-15)


def test_n1_matches_convex():
    for x in (0.0, 0.25, 0.5, 0.9, 1.0):
        p = RuleParams(0.0, 1.0, x, 1)
        assert B.bound_n1(X2, 0, 1, x).value == pytest.approx(B.bound_convex(X2, p).value, rel=1e-14)
    assert B.bound_n1(X2, 0, 1, 0.5).value == pytest.approx(0.25, rel=1e-14)


def test_holder_example():
    p = RuleParams(0.0, 1.0, 0.5, 1)
    r = B.bound_holder(X2, p, 2.0)
    assert r.value == pytest.approx(1 / math.sqrt(6), rel=1e-14)
    assert r.q == pytest.approx(2.0)
    assert true_error(X2, p) <= r.value


def test_concave_example():
    p = RuleParams(0.0, 1.0, 0.5, 1)
    r = B.bound_concave(SQRT_ANTI, p, 2.0)
    assert r.value == pytest.approx(1 / math.sqrt(24), rel=1e-12)
    err = true_error(SQRT_ANTI, p)
    assert err == pytest.approx(1 / 15, rel=1e-9)
    assert err <= r.value


def test_concave_refuses_convex_derivative():
    with pytest.raises(HypothesisViolated):
        B.bound_concave(parse("x^3"), RuleParams(0.0, 1.0, 0.5, 1), 2.0)


def test_convex_refuses_sign_changing_derivative():
    with pytest.raises(HypothesisViolated) as info:
        B.bound_convex(parse("sin(x)"), RuleParams(0.0, 6.0, 3.0, 1))
    assert info.value.verdict.witness is not None


def test_assume_hypotheses_skips_check():
    r = B.bound_convex(parse("sin(x)"), RuleParams(0.0, 6.0, 3.0, 1), assume_hypotheses=True)
    assert r.value > 0


def test_da_values():
    assert B.bound_da_t11(X2, 0, 1).value == pytest.approx(0.25)
    t12 = B.bound_da_t12(parse("exp(x)"), 0, 1, 2.0).value
    expected = 1 / (2 * math.sqrt(3)) * math.sqrt((1 + math.e**2) / 2)
    assert t12 == pytest.approx(expected, rel=1e-14)


def test_hh_sandwich():
    s = B.hh_sandwich(X2, 0, 1)
    assert s == pytest.approx((0.25, 1 / 3, 0.5), rel=1e-13)
    assert s.holds
    s = B.hh_sandwich(parse("exp(x)"), 0, 1)
    assert s.holds
    with pytest.raises(HypothesisViolated):
        B.hh_sandwich(parse("-x^2"), 0, 1)


def test_optimize_symmetric_data_gives_midpoint():
    x, v = B.optimize_x(X2, -1, 1, 1)
    assert x == pytest.approx(0.0, abs=1e-8 * 2)


def test_optimize_shifts_to_small_derivative_end():
    # |f'| is 0 at a and 2 at b
    x, v = B.optimize_x(X2, 0, 1, 1)
    assert x > 0.5
    assert v <= B.bound_convex(X2, RuleParams(0.0, 1.0, 0.5, 1)).value


def test_optimize_holder_is_midpoint():
    x, _ = B.optimize_x(parse("exp(x)"), 0, 2, 3, B.HOLDER, 3.0)
    assert x == pytest.approx(1.0, abs=1e-8)


def test_optimize_endpoint_example():
    x, v = B.optimize_x(parse("x^2"), 0, 1, 1)
    assert x == pytest.approx(1 / math.sqrt(2), abs=1e-6)


def test_compare_example():
    cmp = B.compare_bounds(X2, RuleParams(0.0, 1.0, 0.5, 1), 2.0)
    values = {r.family: r.value for r in cmp.reports}
    assert values[B.CONVEX] == pytest.approx(0.25)
    assert values[B.HOLDER] == pytest.approx(0.40825, abs=1e-5)
    assert values[B.DA11] == pytest.approx(0.25)
    assert cmp.minimum == B.CONVEX
    assert B.CONCAVE in cmp.skipped


def test_compare_skips_midpoint_families_off_midpoint():
    cmp = B.compare_bounds(X2, RuleParams(0.0, 1.0, 0.3, 2))
    fams = {r.family for r in cmp.reports}
    assert B.MIDPOINT not in fams and B.DA11 not in fams and B.N1 not in fams
    assert B.CONVEX in fams


def test_report_to_dict():
    d = B.bound_convex(X2, RuleParams(0.0, 1.0, 0.5, 2)).to_dict()
    assert d["family"] == B.CONVEX and d["lhs_form"] == "integral"
    assert d["hypothesis"] == "verified-on-grid"


# -- algebraic properties of the closed forms -------------------------------

reals = st.floats(-3, 3)
lengths = st.floats(0.1, 4)
rel = st.floats(0, 1)
mags = st.floats(0, 10)
orders = st.integers(1, 8)
ps = st.sampled_from([1.1, 1.5, 2.0, 3.0, 10.0])


@settings(max_examples=300, deadline=None)
@given(reals, lengths, rel, orders, mags, mags)
def test_convex_equals_midpoint_at_mid(a, length, s, n, fa, fb):
    b = a + length
    mid = (a + b) / 2
    assert B.convex_value(a, b, mid, n, fa, fb) == pytest.approx(B.midpoint_value(a, b, n, fa, fb), rel=1e-12, abs=1e-300)


@settings(max_examples=300, deadline=None)
@given(reals, lengths, rel, orders, mags, mags)
def test_convex_mirror_symmetry(a, length, s, n, fa, fb):
    b = a + length
    x = a + s * length
    y = a + b - x
    assume(a <= y <= b)
    assert B.convex_value(a, b, x, n, fa, fb) == pytest.approx(B.convex_value(a, b, y, n, fb, fa), rel=1e-10, abs=1e-300)


@settings(max_examples=300, deadline=None)
@given(reals, lengths, rel, orders, mags, mags, st.floats(0.1, 10))
def test_convex_is_linear_in_derivative_data(a, length, s, n, fa, fb, c):
    b = a + length
    x = a + s * length
    v = B.convex_value(a, b, x, n, fa, fb)
    assert B.convex_value(a, b, x, n, c * fa, c * fb) == pytest.approx(c * v, rel=1e-12, abs=1e-300)


@settings(max_examples=300, deadline=None)
@given(reals, lengths, orders, mags, mags, mags, mags)
def test_monotone_in_derivative_data(a, length, n, fa, fb, da, db):
    b = a + length
    x = (a + b) / 2
    assert B.convex_value(a, b, x, n, fa, fb) <= B.convex_value(a, b, x, n, fa + da, fb + db) * (1 + 1e-14)


@settings(max_examples=200, deadline=None)
@given(reals, lengths, orders, mags, mags)
def test_midpoint_scaling_law(a, length, n, fa, fb):
    full = B.midpoint_value(a, a + length, n, fa, fb)
    half = B.midpoint_value(a, a + length / 2, n, fa, fb)
    assert half == pytest.approx(full * 2.0 ** -(n + 1), rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(reals, lengths, mags, mags, ps)
def test_mean_form_reductions(a, length, fa, fb, p):
    b = a + length
    mid = (a + b) / 2
    assert B.n1_value(a, b, mid, fa, fb) == pytest.approx(length * B.da_t11_value(a, b, fa, fb), rel=1e-12, abs=1e-300)
    h = B.holder_value(a, b, mid, 1, p, fa, fb)
    assert h == pytest.approx(length * B.da_t12_value(a, b, p, fa, fb), rel=1e-12, abs=1e-300)
    assert h == pytest.approx(length * B.holder_midpoint_mean_value(a, b, p, fa, fb), rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(reals, lengths, rel, orders, ps, mags, mags)
def test_holder_minimised_at_midpoint(a, length, s, n, p, fa, fb):
    b = a + length
    x = a + s * length
    assert B.holder_value(a, b, (a + b) / 2, n, p, fa, fb) <= B.holder_value(a, b, x, n, p, fa, fb) * (1 + 1e-12)


def test_conjugate():
    assert B.conjugate(2.0) == 2.0
    assert B.conjugate(3.0) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        B.conjugate(1.0)
