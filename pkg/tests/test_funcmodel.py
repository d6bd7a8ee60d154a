import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from certquad.errors import DomainError, NotExactCapableError, OrderOverflowError, ParseError
from certquad.funcmodel import (
    ABS_CONVEX,
    ABS_Q_CONCAVE,
    Const,
    Func,
    Pow,
    Sub,
    Var,
    check_convexity,
    check_function_convex,
    derivatives,
    eval_jet,
    eval_jet_exact,
    evaluate,
    is_exact_capable,
    parse,
    to_polynomial,
    to_source,
)

# -- parser ------------------------------------------------------------------


def test_parse_power():
    assert parse("x^2") == Pow(Var(), 2)


def test_parse_exp_minus_one():
    assert parse("exp(x) - 1") == Sub(Func("exp", Var()), Const(1))


@pytest.mark.parametrize("src", ["x^(1/2)", "x^1.5", "x^x", "x^(2*x)"])
def test_non_integer_exponent_rejected(src):
    with pytest.raises(ParseError):
        parse(src)


@pytest.mark.parametrize(
    "src, offset",
    [("x +", 3), ("foo(x)", 0), ("x $ 2", 2), ("(x + 1", 6), ("1/0", None)],
)
def test_parse_errors_carry_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src)
    if offset is not None:
        assert info.value.offset == offset


def test_unary_minus_binds_looser_than_power():
    assert evaluate(parse("-x^2"), 3.0) == -9.0
    assert evaluate(parse("(-x)^2"), 3.0) == 9.0


def test_rational_literal_is_exact():
    assert parse("1/3") == Const(Fraction(1, 3))


def test_negative_integer_exponent():
    assert evaluate(parse("x^(-2)"), 2.0) == 0.25
    assert evaluate(parse("x^-1"), 4.0) == 0.25


@pytest.mark.parametrize(
    "src",
    [
        "x^2",
        "exp(x) - 1",
        "-x^3 + 2*x - 1/3",
        "sin(2*x + 0.25) * cos(x)",
        "sqrt(x + 1) / (x^2 + 1)",
        "log(1 + x^2)^3",
        "x - (x - 1)",
        "2^3 * x",
        "1e-3 * x^(-2)",
    ],
)
def test_unparse_round_trip(src):
    f = parse(src)
    assert parse(to_source(f, exact=True)) == f
    # the default form shows non-decimal rationals as floats, so it
    # round-trips in value rather than structurally
    ts = np.linspace(0.5, 1.5, 5)
    np.testing.assert_allclose(evaluate(parse(to_source(f)), ts), evaluate(f, ts), rtol=1e-15)


def test_exact_capability():
    assert is_exact_capable(parse("x^4 - x/3 + 2"))
    assert not is_exact_capable(parse("exp(x)"))
    assert not is_exact_capable(parse("1/x"))
    assert not is_exact_capable(parse("x^(-1)"))


# -- jets --------------------------------------------------------------------


def test_jet_of_exp_at_zero():
    assert eval_jet(parse("exp(x)"), 0.0, 4).coefficients == (1.0, 1.0, 1.0, 1.0, 1.0)


def test_jet_of_sin_at_zero():
    assert eval_jet(parse("sin(x)"), 0.0, 3).coefficients == pytest.approx((0.0, 1.0, 0.0, -1.0), abs=1e-15)


def test_jet_of_cube():
    assert eval_jet(parse("x^3"), 2.0, 3).coefficients == (8.0, 12.0, 12.0, 6.0)


@pytest.mark.parametrize(
    "src, t, expected",
    [
        ("log(x)", 2.0, [math.log(2), 0.5, -0.25, 0.25]),
        ("sqrt(x)", 4.0, [2.0, 0.25, -1 / 32, 3 / 256]),
        ("cos(x)", 0.0, [1.0, 0.0, -1.0, 0.0]),
        ("1/x", 2.0, [0.5, -0.25, 0.25, -0.375]),
        ("exp(2*x)", 0.0, [1.0, 2.0, 4.0, 8.0]),
        ("x^(-2)", 1.0, [1.0, -2.0, 6.0, -24.0]),
    ],
)
def test_closed_form_derivatives(src, t, expected):
    assert derivatives(parse(src), t, 3) == pytest.approx(expected, rel=1e-14, abs=1e-15)


def test_vectorised_matches_scalar():
    f = parse("exp(sin(x)) * sqrt(1 + x^2)")
    ts = np.linspace(-2, 2, 9)
    vec = derivatives(f, ts, 4)
    for i, t in enumerate(ts):
        scal = derivatives(f, float(t), 4)
        assert [v[i] for v in vec] == pytest.approx(scal, rel=1e-13)


@pytest.mark.parametrize("src, t", [("log(x)", 0.0), ("log(x)", -1.0), ("sqrt(x)", -1.0), ("1/x", 0.0)])
def test_domain_errors(src, t):
    with pytest.raises(DomainError):
        derivatives(parse(src), t, 2)


def test_sqrt_derivative_at_zero_is_domain_error():
    assert evaluate(parse("sqrt(x)"), 0.0) == 0.0
    with pytest.raises(DomainError):
        derivatives(parse("sqrt(x)"), 0.0, 1)


def test_order_cap():
    with pytest.raises(OrderOverflowError):
        derivatives(parse("x"), 0.0, 33)


def test_exact_jet():
    assert eval_jet_exact(parse("x^2"), Fraction(1, 2), 2).coefficients == (Fraction(1, 4), 1, 2)
    assert eval_jet_exact(parse("x^4 - x"), 1, 4).coefficients == (0, 3, 12, 24, 24)


def test_exact_jet_rejects_transcendental():
    with pytest.raises(NotExactCapableError):
        to_polynomial(parse("exp(x)"))


coeffs = st.lists(st.integers(-20, 20), min_size=1, max_size=7)


@settings(max_examples=200, deadline=None)
@given(coeffs, st.floats(-2, 2), st.integers(0, 8))
def test_float_jet_agrees_with_exact(cs, t, m):
    src = " + ".join(f"({c})*x^{i}" for i, c in enumerate(cs))
    f = parse(src)
    exact = eval_jet_exact(f, Fraction(t), m).coefficients
    fl = derivatives(f, t, m)
    scale = 1 + sum(abs(c) * math.factorial(i) * 2.0**i for i, c in enumerate(cs))
    for e, v in zip(exact, fl):
        assert abs(float(e) - v) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.5, 1.5))
def test_first_derivative_against_central_difference(t):
    f = parse("exp(sin(x)) + log(2 + cos(3*x)) * sqrt(4 + x)")
    h = 1e-5
    fd = (evaluate(f, t + h) - evaluate(f, t - h)) / (2 * h)
    assert derivatives(f, t, 1)[1] == pytest.approx(fd, rel=1e-7, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.5, 1.5), st.integers(1, 6))
def test_higher_derivative_is_derivative_of_lower(t, k):
    f = parse("exp(x) * sin(x) / (2 + x^2)")
    h = 1e-5
    lo = derivatives(f, t - h, k - 1)[k - 1]
    hi = derivatives(f, t + h, k - 1)[k - 1]
    scale = max(1.0, abs(lo), abs(hi))
    assert derivatives(f, t, k)[k] == pytest.approx((hi - lo) / (2 * h), abs=1e-6 * scale)


# -- convexity grid check ----------------------------------------------------


def test_convex_nth_derivative_verified():
    assert check_convexity(parse("x^2"), 0, 1, 1, ABS_CONVEX).ok
    assert check_convexity(parse("exp(x)"), 0, 1, 2, ABS_CONVEX).ok
    assert check_convexity(parse("x^4"), -1, 1, 2, ABS_CONVEX, q=3).ok


def test_violation_reports_witness():
    v = check_function_convex(parse("sin(x)"), 0, 3)
    assert not v.ok
    assert 0 <= v.witness <= 3
    assert v.excess > 0


def test_concave_q_case():
    # |f'|^2 = x is affine, hence concave
    assert check_convexity(parse("(2/3) * x * sqrt(x)"), 0.01, 1, 1, ABS_Q_CONCAVE, q=2).ok
    assert not check_convexity(parse("x^3"), 0, 1, 1, ABS_Q_CONCAVE, q=2).ok


def test_signed_convexity():
    assert check_function_convex(parse("exp(x)"), -1, 1).ok
    assert not check_function_convex(parse("-x^2"), -1, 1).ok
