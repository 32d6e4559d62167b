"""Orbits of T_beta, shrinking-target hits, run decompositions of digit
streams and the approximation exponents nu, nu-hat and those of a speed
function psi."""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

import mpmath

from .beta_symbolic import DigitStream, _to_field, check_unit_interval, t_step
from .errors import DomainError, InsufficientRuns, InvalidParams, ParseError
from .precision_core import (
    BetaValue,
    FieldElement,
    Ordering,
    RealScalar,
    Refinable,
    compare_exact,
    parse_rational,
)

TAIL_FRACTION = Fraction(1, 2)
MIN_SELECTED_RUNS = 3
STREAM_LENGTH_CAP = 10_000_000


# ---------------------------------------------------------------- infinity flag

class Infinite:
    """Marker for an exponent equal to +infinity (never a number)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (Infinite, ())


INF = Infinite()
Exponent = Union[Fraction, Infinite]


def is_inf(v) -> bool:
    return v is INF


def parse_exponent(text: str) -> Exponent:
    t = text.strip().lower()
    if t in {"inf", "infinity", "+inf", "oo"}:
        return INF
    v = parse_rational(t)
    if v < 0:
        raise DomainError(f"exponent {text!r} must be >= 0")
    return v


def format_exponent(v) -> str:
    if is_inf(v):
        return "inf"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return repr(v)


def exp_le(a: Exponent, b: Exponent) -> bool:
    if is_inf(b):
        return True
    if is_inf(a):
        return False
    return a <= b


@dataclass(frozen=True)
class ExponentQuadruple:
    v1_lo: Exponent
    v1_hi: Exponent
    v2_lo: Exponent
    v2_hi: Exponent

    def __post_init__(self):
        for name in ("v1_lo", "v1_hi", "v2_lo", "v2_hi"):
            v = getattr(self, name)
            if not is_inf(v):
                v = Fraction(v)
                object.__setattr__(self, name, v)
                if v < 0:
                    raise DomainError(f"{name} must be >= 0")
        if not exp_le(self.v1_lo, self.v1_hi) or not exp_le(self.v2_lo, self.v2_hi):
            raise DomainError("each lower exponent must not exceed its upper exponent")

    @classmethod
    def parse(cls, text: str) -> "ExponentQuadruple":
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        if len(parts) != 4:
            raise ParseError("a quadruple needs four comma-separated exponents")
        return cls(*(parse_exponent(p) for p in parts))

    def as_tuple(self) -> tuple:
        return (self.v1_lo, self.v1_hi, self.v2_lo, self.v2_hi)

    def __str__(self) -> str:
        return ",".join(format_exponent(v) for v in self.as_tuple())


# ---------------------------------------------------------------- speed functions

@dataclass(frozen=True)
class IndexSet:
    kind: str  # all | arith | geom | tower | list
    a: int = 1
    b: int = 0
    r: Fraction | None = None
    items: tuple[int, ...] = ()

    @property
    def finite(self) -> bool:
        return self.kind == "list"

    @property
    def dense(self) -> bool:
        return self.kind in ("all", "arith")

    def modulus(self) -> tuple[int, int]:
        return (1, 0) if self.kind == "all" else (self.a, self.b % self.a)

    def contains(self, n: int) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "arith":
            return n >= self.b and (n - self.b) % self.a == 0
        if self.kind == "list":
            return n in self.items
        if self.kind == "tower":
            k = 1
            while k ** k < n:
                k += 1
            return k ** k == n
        # geometric: n = floor(r^k), k >= 1
        if n < 1:
            return False
        guess = max(1, int(math.log(n) / math.log(float(self.r))) if n > 1 else 1)
        for k in range(max(1, guess - 2), guess + 3):
            if math.floor(self.r ** k) == n:
                return True
        return False

    def element(self, k: int) -> int:
        """k-th element (k >= 1) of a sparse set."""
        if self.kind == "tower":
            return k ** k
        if self.kind == "geom":
            return math.floor(self.r ** k)
        raise ValueError("element() is for sparse sets")

    def __str__(self) -> str:
        if self.kind == "arith":
            return f"arith:{self.a},{self.b}"
        if self.kind == "geom":
            return f"geom:{_frac_text(self.r)}"
        if self.kind == "list":
            return "list:" + ",".join(str(i) for i in self.items)
        return self.kind


def _frac_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class Rule:
    index: IndexSet
    rate: Fraction | None = None   # psi(n) = beta^(-rate * n)
    const: Fraction | None = None  # psi(n) = const

    def exponent(self, n: int):
        """-log_beta psi(n) / n; exact for rate rules."""
        if self.rate is not None:
            return self.rate
        return None

    def __str__(self) -> str:
        if self.rate is not None:
            return f"rule(index={self.index}, rate={_frac_text(self.rate)})"
        return f"rule(index={self.index}, const={_frac_text(self.const)})"


@dataclass(frozen=True)
class SpeedFn:
    rules: tuple[Rule, ...]
    capped: bool = False

    def rule_for(self, n: int) -> Rule:
        for rule in self.rules:
            if rule.index.contains(n):
                return rule
        raise DomainError(f"no rule covers n={n}")

    def value(self, n: int, beta: BetaValue) -> RealScalar:
        rule = self.rule_for(n)
        if rule.const is not None:
            return rule.const
        return beta_power(beta, -rule.rate * n)

    def __str__(self) -> str:
        text = ";".join(str(r) for r in self.rules)
        return text + (";cap1" if self.capped else "")


_RULE_RE = re.compile(
    r"rule\(\s*index\s*=\s*(?P<index>.*?)\s*,\s*(?P<key>rate|const)\s*=\s*(?P<val>[^)]*?)\s*\)"
)


def _parse_index(text: str) -> IndexSet:
    text = text.strip()
    if text == "all":
        return IndexSet("all")
    if text == "tower":
        return IndexSet("tower")
    kind, _, args = text.partition(":")
    try:
        if kind == "arith":
            a, b = (int(t) for t in args.split(","))
            if a < 1:
                raise ParseError("arith modulus must be >= 1")
            return IndexSet("arith", a=a, b=b)
        if kind == "geom":
            r = parse_rational(args)
            if r <= 1:
                raise ParseError("geom ratio must be > 1")
            return IndexSet("geom", r=r)
        if kind == "list":
            return IndexSet("list", items=tuple(sorted(int(t) for t in args.split(",") if t.strip())))
    except ValueError as exc:
        raise ParseError(f"bad index set {text!r}") from exc
    raise ParseError(f"unknown index set {text!r}")


def parse_speed(text: str) -> SpeedFn:
    """Parse ``rule(index=..., rate=...);...`` with optional ``cap1`` suffix."""
    body = text.strip()
    capped = False
    m = re.search(r"[;\s]*cap1\s*$", body)
    if m:
        capped = True
        body = body[: m.start()]
    rules = []
    pos = 0
    for part in [p for p in body.split(";") if p.strip()]:
        rm = _RULE_RE.fullmatch(part.strip())
        if not rm:
            raise ParseError(f"bad rule {part.strip()!r}")
        index = _parse_index(rm.group("index"))
        val = parse_rational(rm.group("val"))
        if rm.group("key") == "rate":
            rules.append(Rule(index, rate=val))
        else:
            if val <= 0:
                raise ParseError("const must be positive")
            rules.append(Rule(index, const=val))
        pos += 1
    if not rules:
        raise ParseError("empty speed function")
    psi = SpeedFn(tuple(rules))
    return normalize_psi(psi) if capped else psi


def normalize_psi(psi: SpeedFn) -> SpeedFn:
    """Pointwise min(psi, 1) within the descriptor algebra."""
    rules = []
    for r in psi.rules:
        if r.rate is not None:
            rules.append(Rule(r.index, rate=max(r.rate, Fraction(0))))
        else:
            rules.append(Rule(r.index, const=min(r.const, Fraction(1))))
    return SpeedFn(tuple(rules), capped=True)


def beta_power(beta: BetaValue, e: Fraction) -> RealScalar:
    """beta**e: exact for integer e, refinable otherwise."""
    e = Fraction(e)
    if e.denominator == 1:
        return beta.power(int(e))

    def enclose(bits: int):
        lo, hi = beta.enclosure(bits)
        with mpmath.workprec(bits + 32):
            a = mpmath.mpf(lo.numerator) / lo.denominator
            b = mpmath.mpf(hi.numerator) / hi.denominator
            ea = mpmath.mpf(e.numerator) / e.denominator
            vals = sorted([a ** ea, b ** ea])
            slack = mpmath.mpf(2) ** (-bits)
            return _mpf_fraction(vals[0] * (1 - slack)), _mpf_fraction(vals[1] * (1 + slack))

    return Refinable(enclose, tag=f"beta^{e}")


def _mpf_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


def below_beta_power(y: FieldElement, e: Fraction) -> bool:
    """Certified y < beta**e for rational e, by raising to the denominator."""
    e = Fraction(e)
    if y.is_zero():
        return True
    beta = y.beta
    r = y.rational_value()
    if beta.rational is not None and r is not None and r > 0:
        # logs of exact integers are accurate to a few ulps; decide unless close
        lhs = math.log(r.numerator) - math.log(r.denominator)
        rhs = float(e) * (math.log(beta.rational.numerator) - math.log(beta.rational.denominator))
        tol = 1e-9 * (1 + abs(lhs) + abs(rhs))
        if lhs < rhs - tol:
            return True
        if lhs > rhs + tol:
            return False
    q, p = e.denominator, e.numerator
    return compare_exact(y ** q, beta.power(p)) == Ordering.LT


def below_psi(y: FieldElement, psi: SpeedFn, n: int) -> bool:
    """Certified T^k x < psi(n) for an orbit point y."""
    rule = psi.rule_for(n)
    if rule.const is not None:
        return compare_exact(y, rule.const) == Ordering.LT
    return below_beta_power(y, -rule.rate * n)


# ---------------------------------------------------------------- psi exponents

class PsiExponents(NamedTuple):
    lo: object
    hi: object
    mode: str
    active: tuple[int, ...]


SPARSE_WINDOW = (12, 48)


def _dense_covered(rule_set: IndexSet, earlier: Sequence[IndexSet]) -> bool:
    dense = [s for s in earlier if s.dense]
    if not dense:
        return False
    mods = [s.modulus() for s in dense] + [rule_set.modulus()]
    L = 1
    for a, _ in mods:
        L = L * a // math.gcd(L, a)
    a0, b0 = rule_set.modulus()
    for r in range(b0, L, a0) if a0 > 0 else []:
        if not any(r % a == b for a, b in (s.modulus() for s in dense)):
            return False
    return True


def _active_infinitely_often(j: int, rules: Sequence[Rule]) -> bool:
    s = rules[j].index
    earlier = [r.index for r in rules[:j]]
    if s.finite:
        return False
    if s.dense:
        return not _dense_covered(s, earlier)
    lo_k, hi_k = SPARSE_WINDOW
    mid = (lo_k + hi_k) // 2
    for k in range(mid, hi_k + 1):
        n = s.element(k)
        if not any(e.contains(n) for e in earlier):
            return True
    return False


def psi_exponents(psi: SpeedFn, horizon: int = 10_000, mode: str = "exact") -> PsiExponents:
    """liminf / limsup of -log_beta psi(n) / n.

    Exact mode reads the rates of the rules that fire infinitely often;
    constant rules contribute 0.  Numeric mode samples n in the upper half of
    the horizon and returns floats.
    """
    if mode == "exact":
        active = tuple(j for j in range(len(psi.rules)) if _active_infinitely_often(j, psi.rules))
        if not active:
            raise DomainError("no rule fires infinitely often")
        values = [psi.rules[j].rate if psi.rules[j].rate is not None else Fraction(0) for j in active]
        return PsiExponents(min(values), max(values), "exact", active)
    if mode != "numeric":
        raise InvalidParams(f"unknown mode {mode!r}")
    lo = hi = None
    for n in range(max(1, horizon // 2), horizon + 1):
        rule = psi.rule_for(n)
        if rule.rate is not None:
            v = float(rule.rate)
        else:
            v = -math.log(float(rule.const)) / (n * math.log(2.0))  # base-free sign only
        lo = v if lo is None else min(lo, v)
        hi = v if hi is None else max(hi, v)
    warnings.warn("numeric psi exponents are sampled, not certified", stacklevel=2)
    return PsiExponents(lo, hi, "numeric", ())


def psi_exponents_for_beta(psi: SpeedFn, beta: BetaValue, horizon: int) -> PsiExponents:
    """Numeric-mode exponents with the correct base for constant rules."""
    lo = hi = None
    lb = math.log(float(beta.gen))
    for n in range(max(1, horizon // 2), horizon + 1):
        rule = psi.rule_for(n)
        v = float(rule.rate) if rule.rate is not None else -math.log(float(rule.const)) / (n * lb)
        lo = v if lo is None else min(lo, v)
        hi = v if hi is None else max(hi, v)
    return PsiExponents(lo, hi, "numeric", ())


# ---------------------------------------------------------------- orbits

class Orbit(NamedTuple):
    points: list[FieldElement]
    zero_hit: int | None


def orbit(x: RealScalar, beta: BetaValue, n: int) -> Orbit:
    """(x, Tx, ..., T^(n-1) x) exactly, with the first index where it hits 0."""
    y = _to_field(x, beta)
    check_unit_interval(y)
    points = []
    zero_hit = None
    for i in range(n):
        points.append(y)
        if y.is_zero():
            zero_hit = i if zero_hit is None else zero_hit
            points.extend([y] * (n - i - 1))
            break
        _, y = t_step(y)
    return Orbit(points, zero_hit)


def hitting_times(x: RealScalar, beta: BetaValue, psi: SpeedFn, horizon: int) -> list[int]:
    """All 1 <= n <= horizon with T^n x < psi(n)."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    pts = orbit(x, beta, horizon + 1).points
    return [n for n in range(1, horizon + 1) if below_psi(pts[n], psi, n)]


def uniform_check(x: RealScalar, beta: BetaValue, psi: SpeedFn, n_range: Iterable[int]) -> list[tuple[int, bool]]:
    """For each N: does some n in [0, N] have T^n x < psi(N)?"""
    ns = sorted(set(n_range))
    if not ns:
        return []
    pts = orbit(x, beta, ns[-1] + 1).points
    out = {}
    running = None
    idx = 0
    for N in ns:
        while idx <= N:
            p = pts[idx]
            if running is None or compare_exact(p, running) == Ordering.LT:
                running = p
            idx += 1
        out[N] = below_psi(running, psi, N)
    return [(N, out[N]) for N in sorted(set(n_range))]


def check_bracketing(x: RealScalar, beta: BetaValue, runs: Sequence[tuple[int, int]]) -> list[tuple[int, bool]]:
    """beta^(n-m) < T^n x < beta^(n-m+1) for each run (n, m); run positions are 1-based."""
    horizon = max(m for _, m in runs) + 1
    pts = orbit(x, beta, horizon + 1).points
    out = []
    for n, m in runs:
        y = pts[n]
        lower = compare_exact(beta.power(n - m), y) == Ordering.LT
        upper = compare_exact(y, beta.power(n - m + 1)) == Ordering.LT
        out.append((n, lower and upper))
    return out


# ---------------------------------------------------------------- runs

@dataclass
class RunDecomposition:
    runs: list[tuple[int, int]]
    selected: list[tuple[int, int]]
    terminating: bool
    runs_after_last_record: int = 0

    @property
    def gaps(self) -> list[int]:
        return [m - n for n, m in self.selected]


def run_decomposition(d: DigitStream, horizon: int) -> RunDecomposition:
    """Runs between consecutive nonzero digits and the strictly-increasing-gap records."""
    positions = [p for p, _ in d.nonzero(horizon)]
    terminating = d.terminates_within(horizon) or not positions
    runs = list(zip(positions, positions[1:]))
    selected: list[tuple[int, int]] = []
    since = 0
    for run in runs:
        if not selected or run[1] - run[0] > selected[-1][1] - selected[-1][0]:
            selected.append(run)
            since = 0
        else:
            since += 1
    return RunDecomposition(runs, selected, terminating, since)


@dataclass
class ExponentEstimate:
    nu: object
    nu_hat: object
    horizon: int
    nu_ratios: list[tuple[int, Fraction]] = field(default_factory=list)
    nu_hat_ratios: list[tuple[int, Fraction]] = field(default_factory=list)
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "nu": format_exponent(self.nu),
            "nu_hat": format_exponent(self.nu_hat),
            "horizon": self.horizon,
            "nu_ratios": [[k, format_exponent(r)] for k, r in self.nu_ratios],
            "nu_hat_ratios": [[k, format_exponent(r)] for k, r in self.nu_hat_ratios],
            "note": self.note,
        }


def _bounded_gaps(dec: RunDecomposition) -> bool:
    """Records stopped long ago relative to how often they used to arrive."""
    if not dec.selected:
        return False
    runs_per_record = (len(dec.runs) - dec.runs_after_last_record) / len(dec.selected)
    return dec.runs_after_last_record > 10 * runs_per_record + 10


def estimate_exponents(d: DigitStream, horizon: int, tail_fraction: Fraction = TAIL_FRACTION) -> ExponentEstimate:
    """Finite-horizon nu and nu-hat from the record runs.

    nu is the largest (m_k - n_k)/n_k and nu-hat the smallest
    (m_k - n_k)/n_(k+1) over the last ``tail_fraction`` of the records.
    """
    dec = run_decomposition(d, horizon)
    if dec.terminating:
        return ExponentEstimate(INF, INF, horizon, note="terminating expansion")
    if _bounded_gaps(dec):
        return ExponentEstimate(Fraction(0), Fraction(0), horizon, note="bounded gaps")
    sel = dec.selected
    if len(sel) < MIN_SELECTED_RUNS:
        raise InsufficientRuns(f"only {len(sel)} record runs within horizon {horizon}")
    nu_series = [(n, Fraction(m - n, n)) for n, m in sel]
    hat_series = [(n, Fraction(m - n, sel[k + 1][0])) for k, (n, m) in enumerate(sel[:-1])]
    start = len(sel) - max(1, math.ceil(len(sel) * tail_fraction))
    nu = max(r for _, r in nu_series[start:])
    hat_tail = hat_series[min(start, len(hat_series) - 1):]
    nu_hat = min(r for _, r in hat_tail)
    return ExponentEstimate(nu, nu_hat, horizon, nu_series, hat_series)


# ---------------------------------------------------------------- witnesses

def _geometric_positions(R: Fraction, horizon: int) -> Iterator[int]:
    k = 1
    last = 0
    while True:
        n = math.floor(R ** k)
        if n > horizon:
            return
        if n > last:
            yield n
            last = n
        k += 1


def witness_stream(kind: str, **params) -> DigitStream:
    """Lazily generated 0/1 streams with prescribed run structure.

    kinds: ``periodic`` (word), ``scheduled`` (R, c, repeats), ``geometric``
    (R: ones at floor(R^k)), ``psi_a`` (a, blocks).
    """
    if kind == "periodic":
        word = tuple(int(ch) for ch in str(params.get("word", "")))
        if not word or not any(word):
            raise InvalidParams("periodic word needs a nonzero digit")
        L = len(word)

        def support(horizon: int):
            for start in range(0, horizon, L):
                for i, dgt in enumerate(word):
                    p = start + i + 1
                    if p > horizon:
                        return
                    if dgt:
                        yield p, dgt

        return DigitStream(support, label=f"periodic({''.join(map(str, word))})")

    if kind == "scheduled":
        R = Fraction(params.get("R", 2))
        c = Fraction(params.get("c", 1))
        repeats = bool(params.get("repeats", True))
        if R <= 1 or c <= 0:
            raise InvalidParams("scheduled streams need R > 1 and c > 0")
        if c + 1 > R:
            raise InvalidParams("need c + 1 <= R so that m_k <= n_(k+1)")

        def support(horizon: int):
            emitted = set()
            k = 1
            while True:
                n = math.floor(R ** k)
                if n > horizon:
                    return
                nxt = math.floor(R ** (k + 1))
                gap = math.floor(c * n)
                k += 1
                if gap < 1:
                    continue
                pts = [n, n + gap]
                if repeats:
                    p = n + 2 * gap
                    while p < nxt:
                        pts.append(p)
                        p += gap
                for p in pts:
                    if p <= horizon and p not in emitted:
                        emitted.add(p)
                        yield p, 1
                emitted = {p for p in emitted if p >= n}

        return DigitStream(support, label=f"scheduled(R={R}, c={c})")

    if kind == "geometric":
        R = Fraction(params.get("R", 2))
        if R <= 1:
            raise InvalidParams("geometric streams need R > 1")

        def support(horizon: int):
            for p in _geometric_positions(R, horizon):
                yield p, 1

        return DigitStream(support, label=f"geometric(R={R})")

    if kind == "psi_a":
        a = Fraction(params.get("a", Fraction(11, 10)))
        blocks = int(params.get("blocks", 3))
        if a <= 1 or blocks < 1:
            raise InvalidParams("psi_a needs a > 1 and blocks >= 1")
        zeros = psi_a_block_lengths(a, blocks)
        positions = [1]
        for z in zeros:
            positions.append(positions[-1] + z + 1)
        if positions[-1] > STREAM_LENGTH_CAP:
            raise InvalidParams("psi_a prefix too long; reduce blocks")

        def support(horizon: int):
            for p in positions:
                if p > horizon:
                    return
                yield p, 1

        return DigitStream(support, terminating=True, label=f"psi_a(a={a}, blocks={blocks})")

    raise InvalidParams(f"unknown witness kind {kind!r}")


def psi_a_block_lengths(a: Fraction, blocks: int) -> list[int]:
    """floor(2^(a^(k^2))) for k = 1..blocks."""
    out = []
    with mpmath.workdps(60):
        af = mpmath.mpf(a.numerator) / a.denominator
        for k in range(1, blocks + 1):
            e = af ** (k * k)
            if e > 64:
                raise InvalidParams(f"block {k} has 2^{float(e):.3g} zeros; reduce blocks")
            out.append(int(mpmath.floor(mpmath.mpf(2) ** e)))
    return out
