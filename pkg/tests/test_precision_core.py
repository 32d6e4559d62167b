from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betadyn.errors import NotGreaterThanOne, ParseError, PrecisionExhausted, RootNotIsolated
from betadyn.precision_core import (
    Ordering,
    Refinable,
    bit_schedule,
    compare_exact,
    make_beta,
    parse_rational,
    parse_scalar,
    precision_budget,
    safe_floor,
    to_decimal_string,
)

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=50)


def test_golden_alias_is_root_of_x2_minus_x_minus_1(golden):
    b = golden.gen
    assert b * b - b - 1 == 0
    assert golden.digit_bound == 1
    assert float(b) == pytest.approx(1.6180339887498949)


def test_tribonacci_alias(tribonacci):
    b = tribonacci.gen
    assert b ** 3 - b ** 2 - b - 1 == 0
    assert float(b) == pytest.approx(1.839286755214161)


def test_decimal_beta_is_exact_rational():
    b = make_beta("dec:2.5")
    assert b.rational == Fraction(5, 2)
    assert b.digit_bound == 2


def test_integer_beta_digit_bound():
    assert make_beta("dec:2").digit_bound == 1
    assert make_beta("dec:3").digit_bound == 2


def test_polynomial_with_rational_root_reduces_to_degree_one():
    b = make_beta("poly:-4,0,1@[1,3]")
    assert b.rational == 2


def test_two_roots_in_interval_is_rejected():
    with pytest.raises(RootNotIsolated):
        make_beta("poly:-2,0,1@[-2,2]")


def test_root_below_one_is_rejected():
    with pytest.raises(NotGreaterThanOne):
        make_beta("poly:-1,2@[0,1]")
    with pytest.raises(NotGreaterThanOne):
        make_beta("dec:0.5")


def test_bad_spec_is_a_parse_error():
    with pytest.raises(ParseError):
        make_beta("banana")


def test_beta_minus_one_equals_inverse_for_golden(golden):
    assert compare_exact(golden.gen - 1, golden.inv_gen) == Ordering.EQ


def test_rational_versus_close_decimal():
    assert compare_exact(Fraction(1, 3), parse_rational("0." + "3" * 40)) == Ordering.GT


def test_safe_floor_of_golden_square(golden):
    assert safe_floor(golden.gen ** 2) == 2
    assert safe_floor(golden.gen) == 1


def test_ordering_renders_as_symbols():
    assert [str(o) for o in Ordering] == ["<", "=", ">"]


def test_parse_scalar_beta_shorthand(golden):
    assert parse_scalar("1/beta^2", golden) == golden.power(-2)
    assert parse_scalar("beta", golden) == golden.gen
    assert parse_scalar("3/7") == Fraction(3, 7)


def test_precision_budget_from_environment(monkeypatch):
    monkeypatch.setenv("BETADYN_PRECISION_BITS", "512")
    assert precision_budget() == 512
    assert list(bit_schedule())[-1] == 512


def test_exhausted_budget_on_undecidable_comparison(monkeypatch):
    monkeypatch.setenv("BETADYN_PRECISION_BITS", "256")
    third = Fraction(1, 3)
    # enclosures of 1/3 never exclude 1/3 itself, so equality cannot be certified
    x = Refinable(lambda bits: (third - Fraction(1, 2 ** bits), third + Fraction(1, 2 ** bits)), tag="1/3")
    with pytest.raises(PrecisionExhausted):
        compare_exact(x, third)


def test_decimal_rendering(golden):
    assert to_decimal_string(golden.gen, 20).startswith("1.618033988749894848")
    assert to_decimal_string(Fraction(1, 4), 10).startswith("0.25")


@given(small_fracs, small_fracs, small_fracs)
@settings(max_examples=60, deadline=None)
def test_field_arithmetic_matches_floats(a, b, c):
    beta = make_beta("tribonacci")
    x = beta.gen * a + b
    y = beta.gen ** 2 * c + 1
    z = (x + y) * x - y
    bf = float(beta.gen)
    xf, yf = bf * float(a) + float(b), bf ** 2 * float(c) + 1
    assert float(z) == pytest.approx((xf + yf) * xf - yf, rel=1e-9, abs=1e-9)


@given(small_fracs.filter(lambda v: v != 0), small_fracs)
@settings(max_examples=60, deadline=None)
def test_inverse_is_exact(a, b):
    beta = make_beta("golden")
    x = beta.gen * a + b
    if x.is_zero():
        return
    assert x * x.inverse() == 1


@given(small_fracs, small_fracs)
@settings(max_examples=100, deadline=None)
def test_compare_exact_agrees_with_fraction_order(a, b):
    expected = Ordering.LT if a < b else Ordering.EQ if a == b else Ordering.GT
    assert compare_exact(a, b) == expected
