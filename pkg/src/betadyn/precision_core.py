"""Certified real arithmetic for beta-dynamics.

A base ``BetaValue`` is either an exact rational or a real algebraic number
given by an integer polynomial and an isolating rational interval.  Elements
of Q(beta) are stored as coefficient vectors reduced modulo the minimal
polynomial, so equality (and integrality) is decided exactly; everything else
is decided by refining rational enclosures of beta until the answer is
separated, up to a bit budget.
"""

from __future__ import annotations

import math
import os
import re
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

import mpmath

from .errors import (
    NotGreaterThanOne,
    ParseError,
    PrecisionExhausted,
    RootNotIsolated,
)

START_BITS = 128
DEFAULT_MAX_BITS = 4096
PRECISION_ENV = "BETADYN_PRECISION_BITS"
FACTOR_DEGREE_LIMIT = 24

ALIASES = {
    "golden": "poly:-1,-1,1@[1,2]",
    "tribonacci": "poly:-1,-1,-1,1@[1,2]",
}


def precision_budget() -> int:
    """Maximum working precision in bits (env override honoured)."""
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_MAX_BITS
    try:
        bits = int(raw)
    except ValueError as exc:
        raise ParseError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from exc
    return max(bits, 8)


def bit_schedule() -> Iterator[int]:
    """128, 256, ... doubling up to the budget (the budget itself included)."""
    budget = precision_budget()
    bits = min(START_BITS, budget)
    while True:
        yield bits
        if bits >= budget:
            return
        bits = min(bits * 2, budget)


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1

    def __str__(self) -> str:
        return {-1: "<", 0: "=", 1: ">"}[int(self)]


# ---------------------------------------------------------------- polynomials

def _int_poly(coeffs: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale rational coefficients to a primitive integer polynomial."""
    den = 1
    for c in coeffs:
        den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return tuple(c // g for c in ints) if g else tuple(ints)


def _sign_at(ipoly: Sequence[int], x: Fraction) -> int:
    num, den = x.numerator, x.denominator
    d = len(ipoly) - 1
    acc = ipoly[d]
    scale = 1
    for i in range(d - 1, -1, -1):
        scale *= den
        acc = acc * num + ipoly[i] * scale
    return (acc > 0) - (acc < 0)


def _mp_polyval(ipoly: Sequence[int], x):
    acc = mpmath.mpf(ipoly[-1])
    for c in reversed(ipoly[:-1]):
        acc = acc * x + c
    return acc


def _mp_dpolyval(ipoly: Sequence[int], x):
    d = len(ipoly) - 1
    acc = mpmath.mpf(d * ipoly[d])
    for i in range(d - 1, 0, -1):
        acc = acc * x + i * ipoly[i]
    return acc


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


# ---------------------------------------------------------------- beta values

class BetaValue:
    """A base beta > 1 with certified digit decisions.

    ``minpoly`` is monic, ascending-degree; for rational beta it is
    ``(-beta, 1)``.  ``parry_expansion`` optionally records a known finite
    greedy expansion of 1 (used for the beta_N approximants, whose defining
    equation already is that expansion).
    """

    def __init__(
        self,
        text: str,
        minpoly: Sequence[Fraction],
        lo: Fraction,
        hi: Fraction,
        parry_expansion: tuple[int, ...] | None = None,
    ):
        self.text = text
        lead = Fraction(minpoly[-1])
        self.minpoly = tuple(Fraction(c) / lead for c in minpoly)
        self.degree = len(self.minpoly) - 1
        self._ipoly = _int_poly(self.minpoly)
        self.parry_expansion = parry_expansion
        self.rational: Fraction | None = -self.minpoly[0] if self.degree == 1 else None
        if self.rational is not None:
            lo = hi = self.rational
        self._enclosures: dict[int, tuple[Fraction, Fraction]] = {}
        self._base = (Fraction(lo), Fraction(hi))
        self._tightest = self._base
        self._reduce_table = self._build_reduce_table()
        self._check_greater_than_one()
        self.is_integer = self.rational is not None and self.rational.denominator == 1
        self.digit_bound = self._digit_bound()
        self._zero = FieldElement(self, (Fraction(0),) * self.degree)
        self._one = self.embed(1)
        self._gen = self._one.mul_beta()
        self._inv = self._inverse_of_generator()

    # -- construction helpers
    def _build_reduce_table(self) -> list[tuple[Fraction, ...]]:
        d = self.degree
        table: list[tuple[Fraction, ...]] = []
        cur = tuple(-c for c in self.minpoly[:-1])  # beta^d
        for _ in range(max(d - 1, 1)):
            table.append(cur)
            top = cur[-1]
            shifted = (Fraction(0),) + cur[:-1]
            cur = tuple(s + top * r for s, r in zip(shifted, table[0]))
        return table

    def _inverse_of_generator(self) -> "FieldElement":
        m0 = self.minpoly[0]
        if m0 == 0:
            raise RootNotIsolated("minimal polynomial has root 0")
        coeffs = tuple(-c / m0 for c in self.minpoly[1:])
        return FieldElement(self, coeffs)

    def _check_greater_than_one(self) -> None:
        if self.rational is not None:
            if self.rational <= 1:
                raise NotGreaterThanOne(f"beta = {self.rational} is not > 1")
            return
        if _sign_at(self._ipoly, Fraction(1)) == 0:
            raise NotGreaterThanOne("beta = 1")
        for bits in bit_schedule():
            lo, hi = self.enclosure(bits)
            if lo > 1:
                return
            if hi < 1:
                raise NotGreaterThanOne(f"beta < 1 (enclosure {float(lo)}..{float(hi)})")
        raise PrecisionExhausted("could not separate beta from 1")

    def _digit_bound(self) -> int:
        if self.is_integer:
            return int(self.rational) - 1
        if self.rational is not None:
            return math.floor(self.rational)
        # irrational: floor is certified once the enclosure avoids integers
        for bits in bit_schedule():
            lo, hi = self.enclosure(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
        raise PrecisionExhausted("digit bound undecided")

    @property
    def cached_approx(self) -> tuple[Fraction, Fraction]:
        return self._tightest

    # -- enclosures
    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational [lo, hi] containing beta with width <= 2**-bits."""
        if self.rational is not None:
            return self.rational, self.rational
        cached = self._enclosures.get(bits)
        if cached is not None:
            return cached
        lo, hi = self._tightest
        target = Fraction(1, 2 ** bits)
        if hi - lo > target:
            lo, hi = self._refine(lo, hi, bits)
        elif hi - lo < target / 4:
            # round a much tighter enclosure outward to keep denominators small
            scale = 2 ** (bits + 2)
            lo = max(self._base[0], Fraction(math.floor(lo * scale), scale))
            hi = min(self._base[1], Fraction(math.ceil(hi * scale), scale))
        self._enclosures[bits] = (lo, hi)
        if hi - lo < self._tightest[1] - self._tightest[0]:
            self._tightest = (lo, hi)
        return lo, hi

    def _bisect(self, lo: Fraction, hi: Fraction, width: Fraction):
        s_lo = _sign_at(self._ipoly, lo)
        while hi - lo > width:
            mid = (lo + hi) / 2
            s = _sign_at(self._ipoly, mid)
            if s == 0:
                return mid, mid
            if s == s_lo:
                lo = mid
            else:
                hi = mid
        return lo, hi

    def _refine(self, lo: Fraction, hi: Fraction, bits: int):
        lo, hi = self._bisect(lo, hi, Fraction(1, 2 ** 40))
        if lo == hi:
            return lo, hi
        with mpmath.workprec(bits + 64):
            x = mpmath.mpf(lo.numerator) / lo.denominator
            for _ in range(4 + int(math.log2(bits + 64))):
                x = x - _mp_polyval(self._ipoly, x) / _mp_dpolyval(self._ipoly, x)
            r = _mpf_to_fraction(x)
        scale = 2 ** (bits + 2)
        cand_lo = max(lo, Fraction(math.floor(r * scale) - 1, scale))
        cand_hi = min(hi, Fraction(math.ceil(r * scale) + 1, scale))
        s_lo, s_hi = _sign_at(self._ipoly, cand_lo), _sign_at(self._ipoly, cand_hi)
        if cand_lo < cand_hi and s_lo * s_hi < 0 and cand_hi - cand_lo <= Fraction(1, 2 ** bits):
            return cand_lo, cand_hi
        return self._bisect(lo, hi, Fraction(1, 2 ** bits))

    def approx(self, dps: int = 30):
        """mpmath approximation of beta (display only)."""
        with mpmath.workdps(dps + 10):
            lo, hi = self.enclosure(int(dps * 3.33) + 16)
            return mpmath.mpf(lo.numerator) / lo.denominator

    # -- field element factories
    def embed(self, value) -> "FieldElement":
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = Fraction(value)
        return FieldElement(self, tuple(coeffs))

    @property
    def zero(self) -> "FieldElement":
        return self._zero

    @property
    def one(self) -> "FieldElement":
        return self._one

    @property
    def gen(self) -> "FieldElement":
        return self._gen

    @property
    def inv_gen(self) -> "FieldElement":
        return self._inv

    def power(self, n: int) -> "FieldElement":
        """beta**n for any integer n, exactly."""
        base = self._gen if n >= 0 else self._inv
        return base ** abs(n)

    def same_field(self, other: "BetaValue") -> bool:
        return self is other or self.minpoly == other.minpoly and self._base_overlaps(other)

    def _base_overlaps(self, other: "BetaValue") -> bool:
        if self.rational is not None:
            return True
        a_lo, a_hi = self._tightest
        b_lo, b_hi = other._tightest
        return a_lo <= b_hi and b_lo <= a_hi

    def __repr__(self) -> str:
        return f"BetaValue({self.text!r})"

    def __str__(self) -> str:
        return self.text


# ---------------------------------------------------------------- Q(beta)

Number = Union[int, Fraction]


class FieldElement:
    """Exact element of Q(beta) in the power basis 1, beta, ..., beta^(d-1)."""

    __slots__ = ("beta", "c")

    def __init__(self, beta: BetaValue, coeffs: tuple[Fraction, ...]):
        self.beta = beta
        self.c = coeffs

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.beta is not self.beta and not self.beta.same_field(other.beta):
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.beta.embed(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.beta, (self.c[0] + other,) + self.c[1:])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.beta, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.beta, tuple(-a for a in self.c))

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.beta, (self.c[0] - other,) + self.c[1:])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.beta, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.beta, tuple(a * other for a in self.c))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self.beta.degree
        if d == 1:
            return FieldElement(self.beta, (self.c[0] * o.c[0],))
        prod = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        prod[i + j] += a * b
        out = prod[:d]
        for k in range(d, 2 * d - 1):
            t = prod[k]
            if t:
                row = self.beta._reduce_table[k - d]
                for i in range(d):
                    out[i] += t * row[i]
        return FieldElement(self.beta, tuple(out))

    __rmul__ = __mul__

    def mul_beta(self) -> "FieldElement":
        d = self.beta.degree
        if d == 1:
            return FieldElement(self.beta, (self.c[0] * self.beta.rational,))
        top = self.c[-1]
        shifted = (Fraction(0),) + self.c[:-1]
        if not top:
            return FieldElement(self.beta, shifted)
        row = self.beta._reduce_table[0]
        return FieldElement(self.beta, tuple(s + top * r for s, r in zip(shifted, row)))

    def div_beta(self) -> "FieldElement":
        if self.beta.degree == 1:
            return FieldElement(self.beta, (self.c[0] / self.beta.rational,))
        return self * self.beta.inv_gen

    def __pow__(self, n: int) -> "FieldElement":
        if n < 0:
            return self.inverse() ** (-n)
        result = self.beta.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        d = self.beta.degree
        if d == 1:
            return FieldElement(self.beta, (1 / self.c[0],))
        # columns of the multiplication-by-self matrix, solved against e_0
        cols = []
        basis = self.beta.one
        for _ in range(d):
            cols.append((self * basis).c)
            basis = basis.mul_beta()
        mat = [[cols[j][i] for j in range(d)] + [Fraction(int(i == 0))] for i in range(d)]
        for col in range(d):
            piv = next(r for r in range(col, d) if mat[r][col] != 0)
            mat[col], mat[piv] = mat[piv], mat[col]
            pv = mat[col][col]
            mat[col] = [v / pv for v in mat[col]]
            for r in range(d):
                if r != col and mat[r][col]:
                    f = mat[r][col]
                    mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]
        return FieldElement(self.beta, tuple(mat[i][d] for i in range(d)))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.beta, tuple(a / other for a in self.c))
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def is_zero(self) -> bool:
        return not any(self.c)

    def rational_value(self) -> Fraction | None:
        """The value if it is certified rational, else None."""
        if any(self.c[1:]):
            return None
        return self.c[0]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.rational_value() == other
        if isinstance(other, FieldElement):
            return self.c == other.c and self.beta.same_field(other.beta)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.c)

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        r = self.rational_value()
        if r is not None:
            return r, r
        lo, hi = self.beta.enclosure(bits)
        low = high = Fraction(0)
        p_lo = p_hi = Fraction(1)
        for a in self.c:
            if a > 0:
                low += a * p_lo
                high += a * p_hi
            elif a < 0:
                low += a * p_hi
                high += a * p_lo
            p_lo *= lo
            p_hi *= hi
        return low, high

    def __float__(self) -> float:
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        if self.beta.degree == 1:
            return f"FieldElement({self.c[0]})"
        return f"FieldElement({', '.join(str(a) for a in self.c)} | {self.beta.text})"


class Refinable:
    """A real known only through rational enclosures of shrinking width."""

    def __init__(self, enclose: Callable[[int], tuple[Fraction, Fraction]], tag: str = "refinable"):
        self._enclose = enclose
        self.tag = tag

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        return self._enclose(bits)


RealScalar = Union[int, Fraction, FieldElement, Refinable]


def enclosure_of(x: RealScalar, bits: int) -> tuple[Fraction, Fraction]:
    if isinstance(x, (int, Fraction)):
        return Fraction(x), Fraction(x)
    return x.enclosure(bits)


def exact_value(x: RealScalar):
    """Exact rational or field value, or None for refinable scalars."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, FieldElement):
        r = x.rational_value()
        return r if r is not None else x
    return None


def sign(x: RealScalar) -> int:
    """Certified sign of a scalar."""
    v = exact_value(x)
    if isinstance(v, Fraction):
        return (v > 0) - (v < 0)
    if isinstance(v, FieldElement) and v.is_zero():
        return 0
    for bits in bit_schedule():
        lo, hi = enclosure_of(x, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
    raise PrecisionExhausted(f"sign undecided within {precision_budget()} bits")


def compare_exact(a: RealScalar, b: RealScalar) -> Ordering:
    """Certified three-way comparison of two scalars."""
    va, vb = exact_value(a), exact_value(b)
    if isinstance(va, Fraction) and isinstance(vb, Fraction):
        return Ordering((va > vb) - (va < vb))
    if va is not None and vb is not None:
        fa = va if isinstance(va, FieldElement) else None
        fb = vb if isinstance(vb, FieldElement) else None
        field = (fa or fb).beta
        if fa is None or fb is None or fa.beta.same_field(fb.beta):
            diff = (va if fa else field.embed(va)) - (vb if fb else field.embed(vb))
            return Ordering(sign(diff))
    for bits in bit_schedule():
        a_lo, a_hi = enclosure_of(a, bits)
        b_lo, b_hi = enclosure_of(b, bits)
        if a_hi < b_lo:
            return Ordering.LT
        if a_lo > b_hi:
            return Ordering.GT
        if a_lo == a_hi == b_lo == b_hi:
            return Ordering.EQ
    raise PrecisionExhausted(f"comparison undecided within {precision_budget()} bits")


def safe_floor(x: RealScalar) -> int:
    """Certified floor of a non-negative scalar."""
    v = exact_value(x)
    if isinstance(v, Fraction):
        return math.floor(v)
    for bits in bit_schedule():
        lo, hi = enclosure_of(x, bits)
        f = math.floor(lo)
        if hi < f + 1:
            return f
    raise PrecisionExhausted(f"floor undecided within {precision_budget()} bits")


def to_decimal_string(x: RealScalar, digits: int = 30) -> str:
    """Decimal rendering with ``digits`` significant digits."""
    bits = int(digits * 3.33) + 24
    lo, hi = enclosure_of(x, bits)
    with mpmath.workdps(digits + 10):
        mid = mpmath.mpf(((lo + hi) / 2).numerator) / ((lo + hi) / 2).denominator
        if mid == 0:
            return "0." + "0" * digits
        return mpmath.nstr(mid, digits, strip_zeros=False, min_fixed=-30, max_fixed=30)


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational: {text!r}") from exc


def parse_scalar(text: str, beta: BetaValue | None = None) -> RealScalar:
    """Rational literal, or ``beta^k`` / ``k/beta^j`` shorthand when beta is known."""
    text = text.strip()
    m = re.fullmatch(r"(?:(-?\d+)\s*\*?\s*)?beta\^?(-?\d+)?", text)
    if m and beta is not None:
        coef = int(m.group(1) or 1)
        power = int(m.group(2) or 1)
        return beta.power(power) * coef
    m = re.fullmatch(r"(\d+)\s*/\s*beta(?:\^(\d+))?", text)
    if m and beta is not None:
        return beta.power(-int(m.group(2) or 1)) * int(m.group(1))
    return parse_rational(text)


# ---------------------------------------------------------------- make_beta

_POLY_RE = re.compile(r"poly:\s*([-+\d,\s]+)@\[\s*([^,\]]+)\s*,\s*([^\]]+)\]")


def _choose_factor(coeffs: list[int], lo: Fraction, hi: Fraction):
    import sympy  # slow to import; only root isolation needs it

    z = sympy.Symbol("z")
    poly = sympy.Poly(list(reversed(coeffs)), z, domain="ZZ")
    if poly.degree() < 1:
        raise RootNotIsolated("constant polynomial")
    if poly.degree() <= FACTOR_DEGREE_LIMIT:
        factors = [f for f, _ in poly.factor_list()[1]]
    else:
        factors = [poly.sqf_part()]
    lo_s, hi_s = sympy.Rational(lo.numerator, lo.denominator), sympy.Rational(hi.numerator, hi.denominator)
    hits = []
    for f in factors:
        count = f.count_roots(lo_s, hi_s)
        if count:
            hits.append((f, count))
    total = sum(c for _, c in hits)
    if total != 1:
        raise RootNotIsolated(f"interval [{lo}, {hi}] contains {total} roots")
    f = hits[0][0]
    return [Fraction(int(c)) for c in reversed(f.all_coeffs())]


def make_beta(spec: str) -> BetaValue:
    """Build a base from ``dec:<digits>`` or ``poly:c0,...,cn@[lo,hi]``."""
    text = spec.strip()
    text = ALIASES.get(text, text)
    if text.startswith("dec:"):
        value = parse_rational(text[4:])
        return BetaValue(text, (-value, Fraction(1)), value, value)
    m = _POLY_RE.fullmatch(text)
    if not m:
        raise ParseError(f"unrecognised beta spec {spec!r}")
    try:
        coeffs = [int(c) for c in m.group(1).split(",") if c.strip()]
    except ValueError as exc:
        raise ParseError(f"polynomial coefficients must be integers in {spec!r}") from exc
    lo, hi = parse_rational(m.group(2)), parse_rational(m.group(3))
    if lo > hi:
        raise RootNotIsolated(f"empty interval [{lo}, {hi}]")
    minpoly = _choose_factor(coeffs, lo, hi)
    if len(minpoly) == 2:
        root = -minpoly[0] / minpoly[1]
        return BetaValue(text, (-root, Fraction(1)), root, root)
    return BetaValue(text, minpoly, lo, hi)


def beta_from_polynomial(
    text: str, coeffs: Sequence[int], lo: Fraction, hi: Fraction, parry_expansion=None
) -> BetaValue:
    """Trusted constructor: caller guarantees a unique simple root in [lo, hi]."""
    return BetaValue(text, [Fraction(c) for c in coeffs], lo, hi, parry_expansion=parry_expansion)
