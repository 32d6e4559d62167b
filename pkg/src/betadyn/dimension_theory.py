"""Closed-form dimension formulas, the piecewise classifier for
L(psi1) ∩ U(psi2) and U(psi2), and the registry of worked examples."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, UnmatchedCase
from .orbit_exponents import (
    INF,
    Exponent,
    ExponentQuadruple,
    format_exponent,
    is_inf,
    parse_speed,
    psi_exponents,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def _q(v) -> Exponent:
    return v if is_inf(v) else Fraction(v)


def sw_dimension(v) -> Fraction:
    """1/(1+v), with 0 at v = inf."""
    v = _q(v)
    if is_inf(v):
        return ZERO
    if v < 0:
        raise DomainError("v must be >= 0")
    return 1 / (1 + v)


def _f(a: Exponent, b: Fraction) -> Fraction:
    """(a - b - ab)/((1+a)(a-b)); the value at a = inf is its limit 0."""
    if is_inf(a):
        return ZERO
    if a == b == 0:
        return ONE
    if a <= b:
        raise DomainError("formula needs v > v_hat")
    return (a - b - a * b) / ((1 + a) * (a - b))


def bl_dimension(v, v_hat):
    """Dimension of {nu = v} ∩ {nu_hat = v_hat}, or the string "empty"."""
    v, v_hat = Fraction(v), Fraction(v_hat)
    if not (v > 0 and 0 < v_hat < 1):
        raise DomainError("need v > 0 and 0 < v_hat < 1")
    if v < v_hat / (1 - v_hat):
        return "empty"
    return _f(v, v_hat)


def covering_critical_exponent(v, v2_lo) -> Fraction:
    v, v2_lo = Fraction(v), Fraction(v2_lo)
    if not (v > v2_lo and v2_lo < 1) or v2_lo < 0:
        raise DomainError("need v > v2_lo and 0 <= v2_lo < 1")
    return _f(v, v2_lo)


def _g(u: Exponent) -> Fraction:
    """((1-u)/(1+u))^2."""
    if is_inf(u):
        return ONE
    return ((1 - u) / (1 + u)) ** 2


def _r(a: Exponent) -> Fraction:
    """a/(2+a): the threshold separating the two upper-bound regimes."""
    return ONE if is_inf(a) else a / (2 + a)


def _upper_min(v2_lo: Fraction, v2_hi: Exponent) -> Fraction:
    return min(sw_dimension(v2_hi), _g(v2_lo))


@dataclass(frozen=True)
class DimensionVerdict:
    kind: str  # countable | empty | full_dimension | interval
    lower: Fraction
    upper: Fraction
    active_case: str

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper <= 1):
            raise UnmatchedCase(f"inconsistent bounds [{self.lower}, {self.upper}] in {self.active_case}")
        if self.kind in ("countable", "empty") and (self.lower, self.upper) != (0, 0):
            raise UnmatchedCase("countable/empty verdicts carry zero bounds")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "lower": format_exponent(self.lower),
            "upper": format_exponent(self.upper),
            "active_case": self.active_case,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DimensionVerdict":
        return cls(data["kind"], Fraction(data["lower"]), Fraction(data["upper"]), data["active_case"])


def classify_bounds(q: ExponentQuadruple) -> DimensionVerdict:
    """Bounds on dim_H L(psi1) ∩ U(psi2); the first matching case wins."""
    a_lo, a_hi, b_lo, b_hi = q.as_tuple()
    if all(not is_inf(x) and x == 0 for x in (a_lo, a_hi, b_lo, b_hi)):
        return DimensionVerdict("full_dimension", ONE, ONE, "A1")
    if is_inf(b_lo):
        return DimensionVerdict("countable", ZERO, ZERO, "A2")
    if is_inf(a_lo):
        return DimensionVerdict("interval", ZERO, ZERO, "A3")
    if is_inf(b_hi):
        return DimensionVerdict("interval", ZERO, ZERO, "P-inf")
    if b_lo > 1:
        return DimensionVerdict("countable", ZERO, ZERO, "B0")
    lo_regime = _r(a_lo) < b_lo
    if b_hi > 1:
        if _r(a_hi) <= b_lo:
            return DimensionVerdict("interval", ZERO, _upper_min(b_lo, b_hi), "B1")
        # outside the stated hypothesis: the covering bound sup_{v >= v1_lo} f(v, v2_lo)
        cover = _g(b_lo) if lo_regime else _f(a_lo, b_lo)
        return DimensionVerdict("interval", ZERO, min(sw_dimension(b_hi), cover), "B1-ext")
    hi_regime = _r(a_hi) < b_hi
    if lo_regime and hi_regime:
        return DimensionVerdict("interval", _g(b_hi), _upper_min(b_lo, b_hi), "B2")
    if not lo_regime and hi_regime:
        return DimensionVerdict("interval", _g(b_hi), _f(a_lo, b_lo), "B3")
    if lo_regime and not hi_regime:
        return DimensionVerdict("interval", _f(a_hi, b_hi), _upper_min(b_lo, b_hi), "B4")
    if not lo_regime and not hi_regime:
        return DimensionVerdict("interval", _f(a_hi, b_hi), _f(a_lo, b_lo), "B5")
    raise UnmatchedCase(f"no case matched {q}")  # pragma: no cover


def classify_uniform(v2_lo, v2_hi) -> DimensionVerdict:
    """Bounds on dim_H U(psi2)."""
    lo, hi = _q(v2_lo), _q(v2_hi)
    if is_inf(lo) or lo > 1:
        return DimensionVerdict("countable", ZERO, ZERO, "C1")
    if is_inf(hi) or hi > 1:
        return DimensionVerdict("interval", ZERO, _upper_min(lo, hi), "C2")
    return DimensionVerdict("interval", _g(hi), _upper_min(lo, hi), "C3")


def inclusion_verdict(q: ExponentQuadruple) -> bool:
    """U(psi2) ⊆ L(psi1) is guaranteed when psi1 decays subexponentially and v2_lo > 0."""
    a_lo, a_hi, b_lo, _ = q.as_tuple()
    zero = lambda x: not is_inf(x) and x == 0  # noqa: E731
    return zero(a_lo) and zero(a_hi) and (is_inf(b_lo) or b_lo > 0)


# ---------------------------------------------------------------- examples

@dataclass(frozen=True)
class Example:
    name: str
    psi1: str
    psi2: str
    pinned: Fraction
    pinned_bound: str  # which classifier bound the sharp value equals
    audit: str = ""


EXAMPLES: tuple[Example, ...] = (
    Example("5.1", "rule(index=all, rate=0)",
            "rule(index=tower, rate=3);rule(index=all, rate=0)", Fraction(1, 4), "upper"),
    Example("5.2", "rule(index=all, rate=0)",
            "rule(index=geom:4, rate=2);rule(index=all, rate=1/2)", Fraction(1, 9), "upper"),
    Example("5.3", "rule(index=geom:3, rate=1/2);rule(index=all, rate=1)",
            "rule(index=geom:3, rate=1/2);rule(index=all, rate=1/6)", Fraction(1, 2), "upper"),
    Example("5.4", "rule(index=all, rate=0)",
            "rule(index=geom:4, rate=3);rule(index=all, rate=1)", Fraction(0), "upper"),
    Example("5.5", "rule(index=arith:2,1, rate=3);rule(index=all, rate=10/3)",
            "rule(index=arith:2,1, rate=21/32);rule(index=all, rate=2/3)", Fraction(1, 25), "lower",
            audit="generic upper bound is (11/53)^2; the sharp value equals the lower bound"),
    Example("5.6", "rule(index=all, rate=1)",
            "rule(index=arith:2,1, rate=0);rule(index=all, rate=1/4)", Fraction(1, 3), "lower"),
    Example("5.7", "rule(index=arith:2,1, rate=1/3);rule(index=all, rate=2/3)",
            "rule(index=all, rate=2/11)", Fraction(9, 20), "lower"),
)


@dataclass
class ExampleRow:
    name: str
    quadruple: ExponentQuadruple
    verdict: DimensionVerdict
    dimension: Fraction
    audit: str = ""
    consistent: bool = True

    def to_json(self) -> dict:
        return {
            "example": self.name,
            "quadruple": str(self.quadruple),
            "case": self.verdict.active_case,
            "lower": format_exponent(self.verdict.lower),
            "upper": format_exponent(self.verdict.upper),
            "dimension": format_exponent(self.dimension),
            "audit": self.audit,
        }


def example_quadruple(ex: Example) -> ExponentQuadruple:
    p1 = psi_exponents(parse_speed(ex.psi1))
    p2 = psi_exponents(parse_speed(ex.psi2))
    return ExponentQuadruple(p1.lo, p1.hi, p2.lo, p2.hi)


def run_examples() -> list[ExampleRow]:
    """Descriptor -> exponents -> classifier, with the sharp value pinned.

    The pinned value must coincide with the classifier bound it is recorded
    against; otherwise the row is marked inconsistent.
    """
    rows = []
    for ex in EXAMPLES:
        q = example_quadruple(ex)
        verdict = classify_bounds(q)
        bound = verdict.upper if ex.pinned_bound == "upper" else verdict.lower
        rows.append(ExampleRow(ex.name, q, verdict, ex.pinned, ex.audit, bound == ex.pinned))
    return rows


def examples_table(rows: list[ExampleRow]) -> str:
    header = ("example", "v1_lo", "v1_hi", "v2_lo", "v2_hi", "case", "lower", "upper", "dimension")
    lines = []
    for r in rows:
        q = [format_exponent(v) for v in r.quadruple.as_tuple()]
        lines.append((r.name, *q, r.verdict.active_case,
                      format_exponent(r.verdict.lower), format_exponent(r.verdict.upper),
                      format_exponent(r.dimension)))
    widths = [max(len(str(x)) for x in col) for col in zip(header, *lines)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join([fmt.format(*header)] + [fmt.format(*ln) for ln in lines])
