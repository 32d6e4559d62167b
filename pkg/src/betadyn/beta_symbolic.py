"""Greedy beta-expansions, the completion of the expansion of 1, Parry
admissibility, counting admissible words and the beta_N approximants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

from .errors import CapExceeded, DegenerateEquation, DomainError, ParseError
from .precision_core import (
    BetaValue,
    FieldElement,
    Ordering,
    RealScalar,
    _choose_factor,
    FACTOR_DEGREE_LIMIT,
    beta_from_polynomial,
    compare_exact,
    safe_floor,
)

ENUMERATION_CAP = 24
COUNT_CAP = 100_000
PARRY_LOOKAHEAD = 64


# ---------------------------------------------------------------- words

@dataclass(frozen=True)
class DigitWord:
    digits: tuple[int, ...]
    beta: BetaValue | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if self.beta is not None:
            bound = self.beta.digit_bound
            bad = [d for d in self.digits if not 0 <= d <= bound]
            if bad:
                raise DomainError(f"digit {bad[0]} outside [0, {bound}]")

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def __str__(self) -> str:
        bound = self.beta.digit_bound if self.beta is not None else max(self.digits, default=0)
        return format_word(self.digits, bound)


def as_digits(w) -> tuple[int, ...]:
    if isinstance(w, DigitWord):
        return w.digits
    if isinstance(w, str):
        return parse_word(w)
    return tuple(int(d) for d in w)


def format_word(digits: Sequence[int], digit_bound: int = 9) -> str:
    if digit_bound <= 9 and all(0 <= d <= 9 for d in digits):
        return "".join(str(d) for d in digits)
    return ",".join(str(d) for d in digits)


def parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        if "," in text:
            return tuple(int(t) for t in text.split(","))
        return tuple(int(ch) for ch in text)
    except ValueError as exc:
        raise ParseError(f"not a digit word: {text!r}") from exc


class DigitStream:
    """Lazily generated digit sequence described by its nonzero positions.

    ``support(horizon)`` yields ascending ``(position, digit)`` pairs with
    ``position <= horizon`` (positions are 1-based).  ``terminating`` marks a
    stream known to be eventually zero.
    """

    def __init__(
        self,
        support: Callable[[int], Iterator[tuple[int, int]]],
        terminating: bool = False,
        label: str = "",
    ):
        self._support = support
        self.terminating = terminating
        self.label = label

    def nonzero(self, horizon: int) -> Iterator[tuple[int, int]]:
        return self._support(horizon)

    def prefix(self, n: int) -> tuple[int, ...]:
        out = [0] * n
        for pos, d in self._support(n):
            out[pos - 1] = d
        return tuple(out)

    def digit(self, n: int) -> int:
        return self.prefix(n)[n - 1]

    def terminates_within(self, horizon: int) -> bool:
        return self.terminating

    @classmethod
    def from_digits(cls, digits: Sequence[int], label: str = "finite") -> "DigitStream":
        """A finite word followed by zeros (hence terminating)."""
        digits = tuple(digits)

        def support(horizon: int):
            for i, d in enumerate(digits[:horizon], start=1):
                if d:
                    yield i, d

        return cls(support, terminating=True, label=label)


# ---------------------------------------------------------------- expansions

def _to_field(x: RealScalar, beta: BetaValue) -> FieldElement:
    if isinstance(x, FieldElement):
        return x
    if isinstance(x, (int, Fraction)):
        return beta.embed(x)
    raise DomainError("an exact scalar (rational or element of Q(beta)) is required")


def check_unit_interval(x: RealScalar) -> None:
    if compare_exact(x, 0) == Ordering.LT or compare_exact(x, 1) != Ordering.LT:
        raise DomainError("x must satisfy 0 <= x < 1")


def t_step(y: FieldElement) -> tuple[int, FieldElement]:
    """One step of T: returns (digit, T y)."""
    by = y.mul_beta()
    d = safe_floor(by)
    return d, by - d


def greedy_expand(x: RealScalar, beta: BetaValue, n: int) -> DigitWord:
    """First n greedy digits of x."""
    if n < 0:
        raise DomainError("n must be >= 0")
    y = _to_field(x, beta)
    check_unit_interval(y)
    digits = []
    for _ in range(n):
        if y.is_zero():
            digits.extend([0] * (n - len(digits)))
            break
        d, y = t_step(y)
        digits.append(d)
    return DigitWord(tuple(digits), beta)


def expansion_stream(x: RealScalar, beta: BetaValue) -> DigitStream:
    """Greedy expansion of x as a lazy stream; termination found by exact orbit."""
    start = _to_field(x, beta)
    check_unit_interval(start)
    cache: list[int] = []
    state = {"y": start, "zero_at": 0 if start.is_zero() else None}

    def extend(horizon: int):
        while len(cache) < horizon and state["zero_at"] is None:
            d, y = t_step(state["y"])
            cache.append(d)
            state["y"] = y
            if y.is_zero():
                state["zero_at"] = len(cache)

    def support(horizon: int):
        extend(horizon)
        for i, d in enumerate(cache[:horizon], start=1):
            if d:
                yield i, d

    stream = DigitStream(support, terminating=False, label="expansion")

    def terminates_within(horizon: int) -> bool:
        extend(horizon)
        return state["zero_at"] is not None

    stream.terminates_within = terminates_within
    return stream


@lru_cache(maxsize=64)
def _neg_power_table(beta: BetaValue, n: int) -> tuple[int, tuple[tuple[int, ...], ...]]:
    """beta^-i = vecs[i-1] / den for i = 1..n, as integer coordinate vectors."""
    powers = []
    p = beta.one
    for _ in range(n):
        p = p.div_beta()
        powers.append(p.c)
    den = 1
    for vec in powers:
        for c in vec:
            den = den * c.denominator // gcd(den, c.denominator)
    return den, tuple(tuple(int(c * den) for c in vec) for vec in powers)


def _table_for(beta: BetaValue, n: int):
    return _neg_power_table(beta, max(16, 1 << max(n - 1, 1).bit_length()))


def word_value(w, beta: BetaValue) -> FieldElement:
    """Sum of w_i beta^-i, exactly."""
    digits = as_digits(w)
    den, vecs = _table_for(beta, len(digits))
    acc = [0] * beta.degree
    for d, vec in zip(digits, vecs):
        if d:
            for k, c in enumerate(vec):
                acc[k] += d * c
    return FieldElement(beta, tuple(Fraction(a, den) for a in acc))


class OneExpansion(NamedTuple):
    word: DigitWord
    simple_parry: bool
    certified: bool
    length: int | None


def expansion_of_one(beta: BetaValue, n: int) -> OneExpansion:
    """First n digits of the greedy expansion of 1.

    ``simple_parry`` is True when the orbit of 1 hits 0 within n digits;
    ``certified`` is False when no termination was seen (so non-simplicity is
    not proven, only unobserved).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if beta.parry_expansion is not None:
        full = beta.parry_expansion
        m = len(full)
        digits = (full + (0,) * max(0, n - m))[:n]
        simple = m <= n
        return OneExpansion(DigitWord(digits), simple, simple, m if simple else None)
    y = beta.one
    digits: list[int] = []
    for i in range(n):
        d, y = t_step(y)
        digits.append(d)
        if y.is_zero():
            digits.extend([0] * (n - len(digits)))
            return OneExpansion(DigitWord(tuple(digits)), True, True, i + 1)
    return OneExpansion(DigitWord(tuple(digits)), False, False, None)


@dataclass(frozen=True)
class EpsStar:
    prefix: tuple[int, ...]
    simple_parry: bool
    period: tuple[int, int] | None = None
    certified: bool = True

    def __str__(self) -> str:
        return format_word(self.prefix)


@lru_cache(maxsize=256)
def _eps_star_cached(beta: BetaValue, n: int) -> EpsStar:
    look = max(n, PARRY_LOOKAHEAD)
    one = expansion_of_one(beta, look)
    if one.simple_parry:
        m = one.length
        block = one.word.digits[:m - 1] + (one.word.digits[m - 1] - 1,)
        reps = n // m + 1
        return EpsStar((block * reps)[:n], True, (1, m), True)
    return EpsStar(one.word.digits[:n], False, None, False)


def eps_star_prefix(beta: BetaValue, n: int) -> EpsStar:
    """eps*_1..eps*_n, with the periodic completion for simple Parry numbers."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return _eps_star_cached(beta, n)


def _eps(beta: BetaValue, n: int) -> tuple[int, ...]:
    # grow in blocks so repeated calls share one cache entry
    size = max(PARRY_LOOKAHEAD, 1 << max(n - 1, 1).bit_length())
    return eps_star_prefix(beta, size).prefix[:n]


def is_admissible(w, beta: BetaValue) -> bool:
    """Every suffix of w is lexicographically <= the eps* prefix of its length."""
    digits = as_digits(w)
    if any(not 0 <= d <= beta.digit_bound for d in digits):
        return False
    n = len(digits)
    if n == 0:
        return True
    eps = _eps(beta, n)
    return all(digits[k:] <= eps[: n - k] for k in range(n))


# ---------------------------------------------------------------- automaton

def automaton_step(eps: Sequence[int], state: int, digit: int) -> int | None:
    """Next tight-match length after appending ``digit``, or None if forbidden."""
    bound = eps[state]
    if digit < bound:
        return 0
    if digit == bound:
        return state + 1
    return None


def automaton_state(eps: Sequence[int], digits: Sequence[int]) -> int | None:
    state = 0
    for d in digits:
        state = automaton_step(eps, state, d)
        if state is None:
            return None
    return state


def completion_counts(eps: Sequence[int], length: int) -> list[list[int]]:
    """table[r][j] = number of admissible continuations of r digits from state j."""
    top = len(eps)
    table = [[1] * (top + 1)]
    for r in range(1, length + 1):
        prev = table[-1]
        row = [0] * (top + 1)
        for j in range(top + 1 - r):
            row[j] = eps[j] * prev[0] + prev[j + 1]
        table.append(row)
    return table


def count_admissible(beta: BetaValue, n: int) -> int:
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 1
    if n > COUNT_CAP:
        raise CapExceeded(f"n={n} exceeds count cap {COUNT_CAP}")
    eps = _eps(beta, n)
    return count_from_eps(eps, n)


def count_from_eps(eps: Sequence[int], n: int) -> int:
    """Number of admissible words of length n for the given eps* prefix."""
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for j, c in counts.items():
            if eps[j]:
                nxt[0] = nxt.get(0, 0) + eps[j] * c
            nxt[j + 1] = nxt.get(j + 1, 0) + c
        counts = nxt
    return sum(counts.values())


def iter_admissible(beta: BetaValue, n: int) -> Iterator[tuple[int, ...]]:
    """Admissible words of length n in lexicographic order."""
    if n == 0:
        yield ()
        return
    eps = _eps(beta, n)
    word = [0] * n
    states = [0] * (n + 1)

    def rec(i: int):
        if i == n:
            yield tuple(word)
            return
        j = states[i]
        for d in range(eps[j] + 1):
            word[i] = d
            states[i + 1] = 0 if d < eps[j] else j + 1
            yield from rec(i + 1)

    yield from rec(0)


def enumerate_admissible(beta: BetaValue, n: int, count_only: bool = False, cap: int = ENUMERATION_CAP):
    """Sigma^n_beta in lexicographic order, or its cardinality."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if count_only:
        return count_admissible(beta, n)
    if n > cap:
        raise CapExceeded(f"n={n} exceeds enumeration cap {cap}")
    return [DigitWord(w, beta) for w in iter_admissible(beta, n)]


def successor(w, beta: BetaValue) -> tuple[int, ...] | None:
    """Next admissible word of the same length in lexicographic order."""
    digits = list(as_digits(w))
    n = len(digits)
    eps = _eps(beta, max(n, 1))
    states = [0]
    for d in digits:
        nxt = automaton_step(eps, states[-1], d)
        if nxt is None:
            raise DomainError(f"{format_word(digits)} is not admissible")
        states.append(nxt)
    for i in range(n - 1, -1, -1):
        if digits[i] < eps[states[i]]:
            return tuple(digits[:i]) + (digits[i] + 1,) + (0,) * (n - i - 1)
    return None


# ---------------------------------------------------------------- beta_N

def beta_n_polynomial(beta: BetaValue, N: int) -> tuple[list[int], tuple[int, ...]]:
    """Ascending coefficients of z^M - sum eps*_i z^(M-i) and the digits used."""
    if N < 1:
        raise DomainError("N must be >= 1")
    eps = eps_star_prefix(beta, N).prefix
    last = max((i for i, e in enumerate(eps) if e), default=-1)
    digits = eps[: last + 1]
    if sum(digits) <= 1:
        raise DegenerateEquation(
            f"eps* prefix {format_word(eps)} gives a root <= 1; increase N"
        )
    m = len(digits)
    coeffs = [0] * (m + 1)
    coeffs[m] = 1
    for i, e in enumerate(digits, start=1):
        coeffs[m - i] = -e
    return coeffs, digits


@lru_cache(maxsize=256)
def solve_beta_n(beta: BetaValue, N: int) -> BetaValue:
    """The root > 1 of 1 = sum_{i<=N} eps*_i z^-i."""
    coeffs, digits = beta_n_polynomial(beta, N)
    lo, hi = Fraction(1), Fraction(beta.digit_bound + 1)
    text = f"poly:{','.join(str(c) for c in coeffs)}@[{lo},{hi}]"
    if len(coeffs) - 1 <= FACTOR_DEGREE_LIMIT:
        minpoly = _choose_factor(coeffs, lo, hi)
        if len(minpoly) == 2:
            root = -minpoly[0] / minpoly[1]
            return BetaValue(text, (-root, Fraction(1)), root, root, parry_expansion=digits)
        return BetaValue(text, minpoly, lo, hi, parry_expansion=digits)
    # one sign change: Descartes gives a unique positive root
    return beta_from_polynomial(text, coeffs, lo, hi, parry_expansion=digits)
