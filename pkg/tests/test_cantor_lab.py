import random
from fractions import Fraction

import pytest

from betadyn.beta_symbolic import count_admissible, is_admissible, iter_admissible, solve_beta_n
from betadyn.cantor_lab import (
    CantorSchedule,
    FillerCounts,
    Template,
    bernoulli_measure,
    boxcount_estimate,
    build_schedule,
    check_mass_conservation,
    cover_csv,
    generate_level_words,
    local_dimension_series,
    local_dimension_target,
    middle_thirds_cover,
    milestone_cover,
    verify_membership,
)
from betadyn.cylinders import cylinder_interval, is_full
from betadyn.errors import (
    CapExceeded,
    DegenerateSchedule,
    InfeasibleTargets,
    InsufficientScales,
    NotTemplateWord,
)
from betadyn.orbit_exponents import parse_speed
from betadyn.precision_core import Ordering, compare_exact, make_beta

F = Fraction


@pytest.fixture(scope="module")
def small():
    return build_schedule(2, F(1, 2), 0, 2, 3)


@pytest.fixture(scope="module")
def padded(small, tribonacci):
    return Template(small, tribonacci, "padded")


def test_schedule_for_ratio_four(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    assert s.n == (4, 16, 64, 256)
    assert s.m == (12, 48, 192, 768)
    assert s.t == (0, 0, 0, 0)
    assert s.l == (4, 48, 128, 352)
    assert s.h == (44, 112, 288, 896)
    assert s.repairs == 0


def test_schedule_with_zero_uniform_target():
    s = build_schedule(1, 0, 0, 2, 3)
    assert s.n == (1, 4, 27)
    assert s.m == (2, 8, 54)


def test_schedule_invariants_and_ratios():
    s = build_schedule(3, F(1, 3), F(1, 50), 4, 6)
    assert all(n < m < s.following(k) for k, (n, m) in enumerate(zip(s.n, s.m)))
    assert all(a <= b for a, b in zip(s.gaps, s.gaps[1:]))
    for k, g in enumerate(s.gaps):
        assert s.m[k] + s.t[k] * g < s.following(k) <= s.m[k] + (s.t[k] + 1) * g
    nu, hat = s.ratios()
    assert abs(nu[-1] / (s.v + s.delta) - 1) < F(2, 100)
    assert abs(hat[-1] / (s.v_hat + s.delta) - 1) < F(2, 100)


def test_schedule_rejects_empty_target_set():
    with pytest.raises(InfeasibleTargets):
        build_schedule(F(1, 3), F(1, 2), 0, 2, 4)
    with pytest.raises(InfeasibleTargets):
        build_schedule(5, 1, 0, 2, 4)
    with pytest.raises(DegenerateSchedule):
        build_schedule(2, F(1, 2), 0, 2, 1)


def test_schedule_json_round_trip():
    s = build_schedule(3, F(1, 3), F(1, 50), 4, 5)
    data = s.to_json()
    assert data["v"] == "3/1" and data["delta"] == "1/50"
    assert CantorSchedule.from_json(data) == s


def test_filler_counts_match_admissible_counts(tribonacci):
    bn = solve_beta_n(tribonacci, 3)
    fill = FillerCounts(bn)
    assert fill.count(0) == 1
    for L in range(1, 9):
        assert fill.count(L) == count_admissible(bn, L)
        assert list(fill.words(L)) == list(iter_admissible(bn, L))


def test_filler_sampling_is_uniform(two):
    fill = FillerCounts(solve_beta_n(two, 2))
    rng = random.Random(3)
    seen = {}
    for _ in range(4000):
        w = fill.sample(4, rng)
        seen[w] = seen.get(w, 0) + 1
    assert len(seen) == fill.count(4) == 8
    assert max(seen.values()) < 1.3 * min(seen.values())


def test_first_marker_is_padded(padded, small):
    start = padded.marks["n1"].start
    assert start == small.l[0]
    word = padded.sample(padded.milestone(1), random.Random(0))
    assert word[start - 1: start + 4] == (0, 0, 1, 0, 0)


def test_milestones_follow_the_schedule(padded, small):
    assert [padded.milestone(k) for k in (1, 2, 3)] == list(small.h)


def test_generated_words_are_admissible(small, tribonacci):
    for depth in (8, 20, 26):
        for w in generate_level_words(small, tribonacci, depth):
            assert is_admissible(w.digits, tribonacci)


def test_milestone_cylinders_are_full(padded, tribonacci):
    rng = random.Random(5)
    for k in (1, 2):
        h = padded.milestone(k)
        for _ in range(10):
            assert is_full(padded.sample(h, rng), tribonacci)


def test_template_cylinders_obey_length_sandwich(padded, tribonacci):
    N = padded.s.N
    for w in padded.words(26):
        for n in (5, 13, 26):
            length = cylinder_interval(w[:n], tribonacci).length
            assert compare_exact(tribonacci.power(-(n + N)), length) != Ordering.GT
            assert compare_exact(length, tribonacci.power(-n)) != Ordering.GT


@pytest.mark.parametrize("layout", ["padded", "claim"])
def test_mass_is_conserved(small, tribonacci, layout):
    t = Template(small, tribonacci, layout)
    assert all(ok for _, ok in check_mass_conservation(t, 40))


def test_perturbed_words_carry_no_mass(padded):
    w = padded.sample(30, random.Random(2))
    assert padded.measure(w) > 0
    pos = padded.marks["n1"].one_at
    flipped = list(w)
    flipped[pos - 1] = 0
    assert padded.measure(flipped, strict=False) == 0
    with pytest.raises(NotTemplateWord):
        padded.measure(flipped)


def test_level_masses_sum_to_one(small, tribonacci):
    words = generate_level_words(small, tribonacci, 22)
    assert sum(bernoulli_measure(small, w, tribonacci) for w in words) == 1


def test_word_cap_is_enforced(padded):
    with pytest.raises(CapExceeded):
        list(padded.words(60, cap=10))


def test_local_dimension_approaches_target(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    series = local_dimension_series(s, two)
    target = local_dimension_target(s, two)
    errors = [abs(r - target) for _, r in series]
    assert errors[-1] < 0.05
    assert errors[-1] < errors[0]


def test_box_count_of_middle_thirds():
    slope, rms = boxcount_estimate(*middle_thirds_cover(8))
    assert slope == pytest.approx(0.6309297535714574, abs=1e-9)
    assert rms < 1e-9


def test_box_count_needs_four_scales(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    with pytest.raises(InsufficientScales):
        boxcount_estimate(*milestone_cover(s, two, [2, 3, 4]))


def test_membership_on_deep_endpoints(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    psi1 = parse_speed("rule(index=all, rate=19/10)")
    psi2 = parse_speed("rule(index=all, rate=9/20)")
    report = verify_membership(s, two, psi1, psi2, count=20)
    assert report.passed, report.violations[:3]
    assert report.samples == 21


def test_membership_fails_for_too_fast_uniform_target(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    psi1 = parse_speed("rule(index=all, rate=19/10)")
    psi2 = parse_speed("rule(index=all, rate=3/5)")
    report = verify_membership(s, two, psi1, psi2, count=5, include_zero=False)
    assert any(v["kind"] == "uniform" for v in report.violations)


def test_zero_sample_passes_trivially(two):
    s = build_schedule(2, F(1, 2), 0, 8, 4)
    psi = parse_speed("rule(index=all, rate=5)")
    report = verify_membership(s, two, psi, psi, sample_words=[], include_zero=True)
    assert report.samples == 1 and report.passed


def test_cover_csv(padded):
    lines = cover_csv(padded, 10, digits=8).strip().splitlines()
    assert lines[0] == "level,word,left,length,mass"
    assert len(lines) == 1 + padded.level_count(10)
    masses = [F(ln.rsplit(",", 1)[1]) for ln in lines[1:]]
    assert sum(masses) == 1
