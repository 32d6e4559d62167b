from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betadyn.beta_symbolic import DigitStream
from betadyn.errors import DomainError, InsufficientRuns, InvalidParams, ParseError
from betadyn.orbit_exponents import (
    INF,
    ExponentQuadruple,
    check_bracketing,
    estimate_exponents,
    format_exponent,
    hitting_times,
    is_inf,
    normalize_psi,
    orbit,
    parse_exponent,
    parse_speed,
    psi_a_block_lengths,
    psi_exponents,
    run_decomposition,
    uniform_check,
    witness_stream,
)
from betadyn.precision_core import Ordering, compare_exact, make_beta

RATE = "rule(index=all, rate={})"


def rate(r):
    return parse_speed(RATE.format(r))


def truncated_point(stream, horizon):
    """Rational in base 2 whose binary digits are the stream prefix."""
    return sum(Fraction(1, 2 ** p) for p, _ in stream.nonzero(horizon))


def test_orbit_of_zero_and_dyadics(two):
    o = orbit(0, two, 4)
    assert o.points == [0, 0, 0, 0] and o.zero_hit == 0
    o = orbit(Fraction(1, 2), two, 3)
    assert o.points[0] == Fraction(1, 2) and o.zero_hit == 1


def test_golden_orbit_reaches_zero_at_step_two(golden):
    o = orbit(golden.power(-2), golden, 3)
    assert o.points[1] == golden.inv_gen
    assert o.zero_hit == 2


def test_hitting_times_of_five_eighths(two):
    assert hitting_times(Fraction(5, 8), two, rate(1), 6) == [1, 3, 4, 5, 6]


def test_constant_one_target_is_hit_always(golden):
    psi = parse_speed("rule(index=all, const=1)")
    assert hitting_times(Fraction(2, 7), golden, psi, 10) == list(range(1, 11))


def test_uniform_check_fails_for_bounded_orbit(two):
    verdicts = dict(uniform_check(Fraction(2, 3), two, rate(2), range(0, 12)))
    assert verdicts[0] is True
    assert not any(verdicts[N] for N in range(1, 12))


def test_uniform_check_trivial_cases(two):
    assert all(v for _, v in uniform_check(0, two, rate(3), range(10)))
    one = parse_speed("rule(index=all, rate=0)")
    assert all(v for _, v in uniform_check(Fraction(2, 3), two, one, range(10)))


def test_periodic_stream_keeps_only_first_run():
    dec = run_decomposition(witness_stream("periodic", word="10"), 40)
    assert all(m - n == 2 for n, m in dec.runs)
    assert dec.selected == [dec.runs[0]]


def test_increasing_gaps_are_all_selected():
    positions = [2 ** k for k in range(1, 9)]
    stream = DigitStream.from_digits([1 if i in positions else 0 for i in range(1, 257)])
    dec = run_decomposition(stream, 256)
    assert dec.selected == dec.runs


def test_all_zero_stream_is_terminating():
    assert run_decomposition(DigitStream.from_digits([0] * 10), 10).terminating
    est = estimate_exponents(DigitStream.from_digits([1, 0, 1]), 100)
    assert is_inf(est.nu) and is_inf(est.nu_hat)


def test_periodic_witness_digits():
    assert witness_stream("periodic", word="100").prefix(7) == (1, 0, 0, 1, 0, 0, 1)


def test_scheduled_witness_runs():
    s = witness_stream("scheduled", R=4, c=2, repeats=False)
    dec = run_decomposition(s, 4 ** 6)
    assert dec.selected[:4] == [(4, 12), (16, 48), (64, 192), (256, 768)]


def test_scheduled_witness_rejects_overlapping_runs():
    with pytest.raises(InvalidParams):
        witness_stream("scheduled", R=2, c=3)


def test_psi_a_first_block():
    assert psi_a_block_lengths(Fraction(11, 10), 3)[0] == 2
    assert witness_stream("psi_a", a=Fraction(11, 10), blocks=2).prefix(4) == (1, 0, 0, 1)


@pytest.mark.parametrize("R, c", [(2, 1), (4, 2), (3, Fraction(1, 2))])
def test_estimator_recovers_schedule(R, c):
    est = estimate_exponents(witness_stream("scheduled", R=R, c=c), 10 ** 5)
    assert float(est.nu) == pytest.approx(float(c), abs=0.05)
    assert float(est.nu_hat) == pytest.approx(float(c) / R, abs=0.05)


def test_estimator_needs_three_records():
    with pytest.raises(InsufficientRuns):
        estimate_exponents(witness_stream("scheduled", R=4, c=2), 40)


def test_bounded_gaps_give_zero_exponents():
    est = estimate_exponents(witness_stream("periodic", word="1001"), 10 ** 4)
    assert (est.nu, est.nu_hat) == (0, 0)


def test_terminating_witness_is_infinite():
    est = estimate_exponents(witness_stream("psi_a", a=Fraction(11, 10), blocks=3), 1000)
    assert is_inf(est.nu) and is_inf(est.nu_hat)


@pytest.mark.parametrize("R, c", [(4, 2), (3, 1), (5, Fraction(3, 2))])
def test_selected_runs_bracket_the_orbit(two, R, c):
    s = witness_stream("scheduled", R=R, c=c, repeats=False)
    horizon = 3000
    x = truncated_point(s, horizon)
    last = max(p for p, _ in s.nonzero(horizon))
    runs = [r for r in run_decomposition(s, horizon).selected if r[1] < last]
    assert runs
    assert all(ok for _, ok in check_bracketing(x, two, runs))


def test_record_starts_hit_targets_below_nu(two):
    s = witness_stream("scheduled", R=4, c=2, repeats=False)
    x = truncated_point(s, 1100)
    hits = set(hitting_times(x, two, rate(Fraction(3, 2)), 300))
    assert {4, 16, 64, 256} <= hits


@pytest.mark.parametrize("R, c", [(2, 1), (4, 2), (3, Fraction(1, 2)), (5, 3)])
def test_exponents_satisfy_the_relation(R, c):
    est = estimate_exponents(witness_stream("scheduled", R=R, c=c), 10 ** 5)
    if est.nu_hat < 1:
        assert est.nu >= est.nu_hat / (1 - est.nu_hat) - Fraction(1, 20)


@pytest.mark.parametrize("stream", [
    witness_stream("scheduled", R=2, c=1),
    witness_stream("scheduled", R=6, c=5),
    witness_stream("geometric", R=3),
    witness_stream("periodic", word="10100"),
])
def test_nu_hat_never_settles_above_one(stream):
    est = estimate_exponents(stream, 10 ** 5)
    assert not (Fraction(11, 10) < est.nu_hat < 10)


def test_psi_exponents_of_worked_targets():
    p = psi_exponents(parse_speed("rule(index=tower, rate=3);rule(index=all, rate=0)"))
    assert (p.lo, p.hi) == (0, 3)
    p = psi_exponents(parse_speed("rule(index=geom:4, rate=2);rule(index=all, rate=1/2)"))
    assert (p.lo, p.hi) == (Fraction(1, 2), 2)
    p = psi_exponents(parse_speed("rule(index=all, rate=2/11)"))
    assert (p.lo, p.hi) == (Fraction(2, 11), Fraction(2, 11))


def test_finite_list_rule_does_not_count():
    p = psi_exponents(parse_speed("rule(index=list:1,2,3, rate=7);rule(index=all, rate=1)"))
    assert (p.lo, p.hi) == (1, 1)


def test_shadowed_residue_class_does_not_count():
    p = psi_exponents(parse_speed("rule(index=all, rate=1);rule(index=arith:2,0, rate=5)"))
    assert (p.lo, p.hi) == (1, 1)


def test_normalize_caps_growing_targets():
    psi = parse_speed("rule(index=arith:2,0, rate=-1);rule(index=all, rate=1)")
    capped = normalize_psi(psi)
    assert capped.rules[0].rate == 0 and capped.rules[1].rate == 1
    assert str(parse_speed("rule(index=all, const=2) cap1")) == "rule(index=all, const=1);cap1"
    p = psi_exponents(parse_speed("rule(index=all, const=2);cap1"))
    assert (p.lo, p.hi) == (0, 0)


def test_normalize_is_identity_on_small_targets():
    psi = parse_speed("rule(index=tower, rate=3);rule(index=all, rate=1/2)")
    assert normalize_psi(psi).rules == psi.rules


def test_speed_parse_errors():
    for bad in ["", "rule(index=geom:1, rate=1)", "rule(index=foo, rate=1)", "rule(index=all, const=0)"]:
        with pytest.raises(ParseError):
            parse_speed(bad)


def test_speed_text_round_trips():
    text = "rule(index=arith:2,1, rate=21/32);rule(index=geom:3/2, rate=1);rule(index=all, rate=2/3)"
    assert str(parse_speed(text)) == text


def test_quadruple_parsing():
    q = ExponentQuadruple.parse("0,1/2,inf,inf")
    assert q.as_tuple() == (0, Fraction(1, 2), INF, INF)
    assert str(q) == "0/1,1/2,inf,inf"
    with pytest.raises(DomainError):
        ExponentQuadruple.parse("1,0,0,0")


@given(st.fractions(min_value=0, max_value=50, max_denominator=100))
def test_exponent_text_round_trip(v):
    assert parse_exponent(format_exponent(v)) == v


@given(st.integers(1, 60), st.integers(2, 40))
@settings(max_examples=50, deadline=None)
def test_hits_agree_with_direct_comparison(p, n):
    two = make_beta("dec:2")
    x = Fraction(p, 61)
    pts = orbit(x, two, n + 1).points
    hits = set(hitting_times(x, two, rate(Fraction(1, 2)), n))
    for k in range(1, n + 1):
        assert (k in hits) == (compare_exact(pts[k] * pts[k], Fraction(1, 2 ** k)) == Ordering.LT)
