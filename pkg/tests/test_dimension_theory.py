from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betadyn.dimension_theory import (
    EXAMPLES,
    DimensionVerdict,
    bl_dimension,
    classify_bounds,
    classify_uniform,
    covering_critical_exponent,
    examples_table,
    inclusion_verdict,
    run_examples,
    sw_dimension,
)
from betadyn.errors import DomainError, UnmatchedCase
from betadyn.orbit_exponents import INF, ExponentQuadruple

F = Fraction
unit = st.fractions(min_value=0, max_value=1, max_denominator=60).filter(lambda v: 0 < v < 1)
exps = st.one_of(st.fractions(min_value=0, max_value=6, max_denominator=30), st.just(INF))


def ordered(a, b):
    if a is INF:
        return b, a
    if b is INF:
        return a, b
    return (a, b) if a <= b else (b, a)


quads = st.tuples(exps, exps, exps, exps).map(
    lambda t: ExponentQuadruple(*ordered(t[0], t[1]), *ordered(t[2], t[3])))


def test_sw_dimension():
    assert sw_dimension(0) == 1
    assert sw_dimension(1) == F(1, 2)
    assert sw_dimension(INF) == 0


def test_bl_dimension_values():
    assert bl_dimension(1, F(1, 3)) == F(1, 4)
    assert bl_dimension(2, F(1, 2)) == F(1, 9)
    assert bl_dimension(F(1, 3), F(1, 2)) == "empty"


@pytest.mark.parametrize("v, v_hat", [(0, F(1, 2)), (1, 0), (1, 1), (-1, F(1, 2))])
def test_bl_dimension_domain(v, v_hat):
    with pytest.raises(DomainError):
        bl_dimension(v, v_hat)


def test_covering_critical_exponent():
    assert covering_critical_exponent(2, F(1, 2)) == F(1, 9)
    assert covering_critical_exponent(F(1, 2), F(1, 6)) == F(1, 2)
    assert covering_critical_exponent(3, 0) == sw_dimension(3)
    with pytest.raises(DomainError):
        covering_critical_exponent(F(1, 2), F(1, 2))


@pytest.mark.parametrize("q, kind, lower, upper, case", [
    ("0,0,0,0", "full_dimension", 1, 1, "A1"),
    ("0,0,inf,inf", "countable", 0, 0, "A2"),
    ("inf,inf,1/2,1/2", "interval", 0, 0, "A3"),
    ("0,0,1/2,inf", "interval", 0, 0, "P-inf"),
    ("0,0,2,3", "countable", 0, 0, "B0"),
    ("0,0,0,3", "interval", 0, F(1, 4), "B1"),
    ("0,0,1,3", "interval", 0, 0, "B1"),
    ("3,10/3,21/32,2/3", "interval", F(1, 25), F(11, 53) ** 2, "B2"),
    ("1/3,2/3,2/11,2/11", "interval", F(9, 20), F(81, 169), "B4"),
])
def test_classifier_cases(q, kind, lower, upper, case):
    v = classify_bounds(ExponentQuadruple.parse(q))
    assert (v.kind, v.lower, v.upper, v.active_case) == (kind, lower, upper, case)


def test_upper_bound_covers_beyond_stated_hypothesis():
    # v1_hi = 2 gives r(v1_hi) = 1/2 > v2_lo, outside the plain B1 hypothesis
    v = classify_bounds(ExponentQuadruple.parse("0,2,1/4,3/2"))
    assert v.active_case == "B1-ext"
    assert v.upper <= classify_bounds(ExponentQuadruple.parse("0,2,1/4,1")).upper


def test_uniform_classifier():
    assert classify_uniform(2, 3).kind == "countable"
    v = classify_uniform(F(1, 2), 2)
    assert (v.lower, v.upper) == (0, F(1, 9))
    v = classify_uniform(0, 0)
    assert (v.lower, v.upper) == (1, 1)
    assert classify_uniform(0, INF).upper == 0


def test_inclusion():
    assert inclusion_verdict(ExponentQuadruple.parse("0,0,1/2,1/2"))
    assert not inclusion_verdict(ExponentQuadruple.parse("0,1,1/2,1/2"))
    assert not inclusion_verdict(ExponentQuadruple.parse("0,0,0,3"))


def test_verdict_rejects_inconsistent_bounds():
    with pytest.raises(UnmatchedCase):
        DimensionVerdict("interval", F(1, 2), F(1, 3), "X")
    with pytest.raises(UnmatchedCase):
        DimensionVerdict("countable", 0, F(1, 3), "X")


def test_verdict_json_round_trip():
    v = classify_bounds(ExponentQuadruple.parse("0,0,1,3"))
    data = v.to_json()
    assert data == {"kind": "interval", "lower": "0/1", "upper": "0/1", "active_case": "B1"}
    assert DimensionVerdict.from_json(data) == v


def test_registry_reproduces_sharp_values():
    rows = run_examples()
    assert [r.dimension for r in rows] == [F(1, 4), F(1, 9), F(1, 2), 0, F(1, 25), F(1, 3), F(9, 20)]
    assert all(r.consistent for r in rows)
    assert [r.verdict.active_case for r in rows] == ["B1", "B1", "B3", "B1", "B2", "B5", "B4"]


def test_registry_flags_generic_upper_bound_of_fifth_example():
    row = next(r for r in run_examples() if r.name == "5.5")
    assert row.verdict.upper == F(121, 2809)
    assert row.audit


def test_examples_table_has_seven_rows():
    text = examples_table(run_examples())
    lines = text.splitlines()
    assert len(lines) == 1 + len(EXAMPLES)
    assert lines[0].split()[-1] == "dimension"
    assert [ln.split()[-1] for ln in lines[1:]] == ["1/4", "1/9", "1/2", "0/1", "1/25", "1/3", "9/20"]


@given(unit)
@settings(max_examples=200)
def test_bl_identity_at_maximizer(v_hat):
    assert bl_dimension(2 * v_hat / (1 - v_hat), v_hat) == ((1 - v_hat) / (1 + v_hat)) ** 2


@given(st.fractions(min_value=0, max_value=20, max_denominator=50).filter(lambda v: v > 0))
def test_bl_collapses_to_sw_as_v_hat_vanishes(v):
    tiny = F(1, 10 ** 12)
    assert abs(bl_dimension(v, tiny) - sw_dimension(v)) < F(1, 10 ** 9)
    assert covering_critical_exponent(v, 0) == sw_dimension(v)


@given(quads)
@settings(max_examples=500)
def test_bounds_are_ordered_in_unit_interval(q):
    v = classify_bounds(q)
    assert 0 <= v.lower <= v.upper <= 1


@given(quads, st.fractions(min_value=0, max_value=4, max_denominator=20))
@settings(max_examples=1000)
def test_upper_bound_monotone_in_v2_hi(q, bump):
    a_lo, a_hi, b_lo, b_hi = q.as_tuple()
    raised = INF if b_hi is INF else b_hi + bump
    q2 = ExponentQuadruple(a_lo, a_hi, b_lo, raised)
    assert classify_bounds(q2).upper <= classify_bounds(q).upper
