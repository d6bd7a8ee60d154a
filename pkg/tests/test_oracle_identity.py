import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from certquad.errors import HypothesisViolated
from certquad.funcmodel import parse
from certquad.identity import (
    RuleParams,
    kernel_moments,
    quad_rule,
    quad_rule_exact,
    remainder_exact,
    remainder_numeric,
    verify_identity,
    verify_identity_exact,
)
from certquad.oracle import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    integrate_reference,
    jensen_check,
    kernel_integrand,
)

# Closed-form integrals used to pin the reference quadrature.
CLOSED_FORMS = [
    ("x^2", 0, 1, 1 / 3),
    ("exp(x)", 0, 1, math.e - 1),
    ("sin(x)", 0, math.pi, 2.0),
    ("cos(x)", 0, math.pi / 2, 1.0),
    ("1/x", 1, math.e, 1.0),
    ("log(x)", 1, 2, 2 * math.log(2) - 1),
    ("sqrt(x)", 0, 4, 16 / 3),
    ("1/(1 + x^2)", 0, 1, math.pi / 4),
    ("x^7 - 3*x^2", -1, 2, (2**8 - 1) / 8 - (8 + 1)),
    ("exp(-x)", 0, 10, 1 - math.exp(-10)),
    ("x * exp(x)", 0, 1, 1.0),
    ("sin(x)^2", 0, math.pi, math.pi / 2),
    ("1/sqrt(x)", 0, 1, 2.0),
    ("x^(-2)", 1, 3, 2 / 3),
    ("exp(2*x)", -1, 1, math.sinh(2)),
    ("cos(10*x)", 0, 1, math.sin(10) / 10),
    ("x * log(x)", 1, 2, 2 * math.log(2) - 0.75),
    ("sqrt(1 - x^2)", -1, 1, math.pi / 2),
    ("1/(2 + sin(x))", 0, 2 * math.pi, 2 * math.pi / math.sqrt(3)),
    ("x^20", 0, 1, 1 / 21),
]


@pytest.mark.parametrize("src, a, b, value", CLOSED_FORMS)
def test_reference_closed_forms(src, a, b, value):
    res = integrate_reference(parse(src), a, b)
    assert res.value == pytest.approx(value, rel=1e-10, abs=1e-12)


def test_rule_weights_are_consistent():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    for k in range(23):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert KRONROD_WEIGHTS @ NODES**k == pytest.approx(exact, abs=1e-14)


def test_reversed_bounds():
    f = parse("exp(x)")
    assert integrate_reference(f, 1, 0).value == pytest.approx(-(math.e - 1), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 3), st.floats(0.05, 0.95))
def test_splitting_invariance(a, length, s):
    f = parse("exp(sin(3*x)) + x^2")
    b = a + length
    c = a + s * length
    whole = integrate_reference(f, a, b).value
    parts = integrate_reference(f, a, c).value + integrate_reference(f, c, b).value
    assert whole == pytest.approx(parts, rel=1e-11, abs=1e-12)


def test_kernel_integrand_value():
    k = kernel_integrand(parse("x^2"), 0.5, 2)
    assert integrate_reference(k, 0.0, 1.0).value == pytest.approx(1 / 12, rel=1e-14)


def test_jensen_equality_case():
    # f' = sqrt(t), |f'|^2 = t
    lhs, rhs = jensen_check(parse("(2/3) * x * sqrt(x)"), 0, 1, 1, 2.0)
    assert lhs == pytest.approx(0.5, abs=1e-12)
    assert rhs == pytest.approx(0.5, abs=1e-12)


def test_jensen_refuses_convex_integrand():
    with pytest.raises(HypothesisViolated):
        jensen_check(parse("x^3"), 0, 1, 1, 2.0)


# -- rule and identity -------------------------------------------------------


def test_rule_examples():
    assert quad_rule(parse("x^2"), RuleParams(0.0, 1.0, 0.5, 2)) == 0.25
    assert quad_rule(parse("x^2"), RuleParams(0.0, 1.0, 0.5, 1)) == 0.5
    assert quad_rule(parse("exp(x)"), RuleParams(0.0, 1.0, 0.0, 1)) == pytest.approx(math.e)


def test_remainder_example():
    assert remainder_numeric(parse("x^2"), RuleParams(0.0, 1.0, 0.5, 2)) == pytest.approx(1 / 12, rel=1e-14)
    assert remainder_exact(parse("x^2"), RuleParams(0, 1, 0.5, 2)) == Fraction(1, 12)


def test_remainder_exp_example():
    # at x = a with n = 1 the rule is (b - a) f(b) = e, so the remainder is (e - 1) - e
    p = RuleParams(0.0, 1.0, 0.0, 1)
    assert remainder_numeric(parse("exp(x)"), p) == pytest.approx(-1.0, rel=1e-13)


def test_rule_exact_on_low_degree_polynomials():
    f = parse("3*x^4 - x^3 + 2*x - 7")
    for n in range(5, 9):
        p = RuleParams(-1.0, 2.0, 0.3, n)
        assert verify_identity_exact(f, p) == 0
        assert remainder_exact(f, p) == 0
        integral = Fraction(3 * 32, 5) + Fraction(3, 5) - Fraction(16 - 1, 4) + (4 - 1) - 7 * 3
        assert quad_rule_exact(f, p) == integral


def test_exact_identity_example():
    assert verify_identity_exact(parse("x^5"), RuleParams(-1, 2, 0.25, 3)) == 0


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(["exp(x)", "sin(2*x) + x^3", "log(3 + x)", "sqrt(4 + x) * cos(x)", "1/(5 - x)"]),
    st.floats(-2, 1),
    st.floats(0.1, 1.5),
    st.floats(0, 1),
    st.integers(1, 8),
)
def test_identity_holds(src, a, length, s, n):
    b = a + length
    x = min(max(a + s * length, a), b)
    check = verify_identity(parse(src), RuleParams(a, b, x, n))
    assert check.passed, check


def test_identity_detects_a_sign_slip():
    # dropping the alternating sign makes the identity fail badly
    f = parse("exp(x)")
    p = RuleParams(0.0, 1.0, 0.3, 3)
    check = verify_identity(f, p)
    from certquad.funcmodel import derivatives

    da, db = derivatives(f, 0.0, 2), derivatives(f, 1.0, 2)
    wrong = sum((0.3 ** (k + 1) * da[k] + 0.7 ** (k + 1) * db[k]) / math.factorial(k + 1) for k in range(3))
    assert abs(check.integral - wrong - check.remainder) > 1e-3


def test_moments_example():
    m = kernel_moments(RuleParams(0.0, 1.0, 0.5, 1))
    assert m.m1 == pytest.approx(5 / 48, rel=1e-15)
    assert m.m2 == pytest.approx(1 / 48, rel=1e-15)
    assert m.m3 == pytest.approx(5 / 48, rel=1e-15)
    assert m.m4 == pytest.approx(1 / 48, rel=1e-15)


def test_moments_at_endpoint():
    m = kernel_moments(RuleParams(0.0, 2.0, 0.0, 3))
    assert m.m1 == 0 and m.m2 == 0
    assert m.m3 == pytest.approx(2.0**5 / 5)


@pytest.mark.parametrize(
    "kwargs", [dict(a=1, b=0, x=0.5, n=1), dict(a=0, b=1, x=2, n=1), dict(a=0, b=1, x=0.5, n=0), dict(a=0, b=1, x=0.5, n=33)]
)
def test_rule_params_validation(kwargs):
    with pytest.raises(ValueError):
        RuleParams(**kwargs)
