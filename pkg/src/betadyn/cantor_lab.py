"""Cantor subsets built from run schedules: schedules, digit templates,
the uniform-filler measure, local dimensions and box counting.

A template word interleaves forced segments (the scheduled ones and the
zeros after each n_k) with free blocks filled by words admissible for
beta_N.  Two layouts are supported:

* ``padded``: every scheduled 1 becomes 0^N 1 0^N, which keeps every
  concatenation admissible for beta and makes milestone cylinders full;
* ``claim``: scheduled ones sit exactly at n_k, m_k and the repeat
  positions, with no padding.  This is the layout the membership
  argument is phrased in.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .beta_symbolic import DigitWord, solve_beta_n, word_value
from .errors import (
    CapExceeded,
    DegenerateSchedule,
    DomainError,
    InfeasibleTargets,
    InsufficientScales,
    InvalidParams,
    NotTemplateWord,
)
from .orbit_exponents import SpeedFn, below_psi, orbit
from .precision_core import BetaValue, Ordering, compare_exact, to_decimal_string

WORD_CAP = 1 << 18
LAYOUTS = ("padded", "claim")


# ---------------------------------------------------------------- schedules

@dataclass(frozen=True)
class CantorSchedule:
    v: Fraction
    v_hat: Fraction
    delta: Fraction
    N: int
    n: tuple[int, ...]
    m: tuple[int, ...]
    t: tuple[int, ...]
    n_next: int
    repairs: int = 0

    @property
    def K(self) -> int:
        return len(self.n)

    @property
    def gaps(self) -> tuple[int, ...]:
        return tuple(m - n for n, m in zip(self.n, self.m))

    def following(self, k: int) -> int:
        """n_(k+1) for 0-based index k."""
        return self.n[k + 1] if k + 1 < self.K else self.n_next

    @property
    def p(self) -> tuple[int, ...]:
        """Free block length between consecutive repeats."""
        return tuple(g - 1 for g in self.gaps)

    @property
    def q(self) -> tuple[int, ...]:
        """Free block length after the last repeat of level k."""
        return tuple(self.following(k) - self.m[k] - self.t[k] * self.gaps[k] - 1 for k in range(self.K))

    @property
    def l(self) -> tuple[int, ...]:
        """Start of the padded block replacing n_k."""
        out, extra = [], 0
        for k in range(self.K):
            out.append(self.n[k] + 4 * k * self.N + extra)
            extra += 2 * self.N * self.t[k]
        return tuple(out)

    @property
    def h(self) -> tuple[int, ...]:
        """Last position of the padded block replacing m_k."""
        out, extra = [], 0
        for k in range(self.K):
            out.append(self.m[k] + 4 * (k + 1) * self.N + extra)
            extra += 2 * self.N * self.t[k]
        return tuple(out)

    def ratios(self) -> tuple[list[Fraction], list[Fraction]]:
        nu = [Fraction(g, n) for g, n in zip(self.gaps, self.n)]
        hat = [Fraction(g, self.following(k)) for k, g in enumerate(self.gaps)]
        return nu, hat

    def residuals(self) -> tuple[float, float]:
        nu, hat = self.ratios()
        return (float(nu[-1] - (self.v + self.delta)), float(hat[-1] - (self.v_hat + self.delta)))

    def to_json(self) -> dict:
        nu, hat = self.ratios()
        fr = lambda x: f"{x.numerator}/{x.denominator}"  # noqa: E731
        return {
            "v": fr(self.v), "v_hat": fr(self.v_hat), "delta": fr(self.delta),
            "N": self.N, "K": self.K,
            "n": list(self.n), "m": list(self.m), "t": list(self.t), "n_next": self.n_next,
            "gaps": list(self.gaps), "l": list(self.l), "h": list(self.h),
            "p": list(self.p), "q": list(self.q),
            "repairs": self.repairs,
            "nu_ratios": [fr(r) for r in nu], "nu_hat_ratios": [fr(r) for r in hat],
            "residuals": list(self.residuals()),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CantorSchedule":
        return cls(Fraction(data["v"]), Fraction(data["v_hat"]), Fraction(data["delta"]), int(data["N"]),
                   tuple(data["n"]), tuple(data["m"]), tuple(data["t"]), int(data["n_next"]),
                   int(data.get("repairs", 0)))


def build_schedule(v, v_hat, delta, N: int, K: int) -> CantorSchedule:
    """Run schedule with gap ratios (v+delta, v_hat+delta).

    Base sequences are n'_k = floor(((v+delta)/(v_hat+delta))^k) (or k^k when
    v_hat = 0) and m'_k = floor((1+v+delta) n'_k); any k breaking
    n_k < m_k < n_(k+1) or gap monotonicity is repaired greedily by
    advancing the offending index.
    """
    v, v_hat, delta = Fraction(v), Fraction(v_hat), Fraction(delta)
    if K < 2:
        raise DegenerateSchedule("need at least two levels")
    if N < 1:
        raise InvalidParams("N must be >= 1")
    if v < 0 or v_hat < 0 or delta < 0:
        raise InvalidParams("targets must be nonnegative")
    if v_hat + delta >= 1:
        raise InfeasibleTargets("need v_hat + delta < 1")
    if v < v_hat / (1 - v_hat):
        raise InfeasibleTargets(f"v={v} < v_hat/(1-v_hat)={v_hat / (1 - v_hat)}: the target set is empty")
    if v_hat > 0 and v + delta <= v_hat + delta:
        raise InfeasibleTargets("need v > v_hat so that the schedule grows")
    if v + delta <= 0:
        raise InfeasibleTargets("need v + delta > 0")

    def base(k: int) -> int:
        if v_hat == 0:
            return k ** k
        return math.floor(((v + delta) / (v_hat + delta)) ** k)

    ns, ms = [], []
    repairs = 0
    for k in range(1, K + 2):
        n_raw = max(base(k), 1)
        n_k = n_raw
        if ms and n_k <= ms[-1]:
            n_k = ms[-1] + 1
            repairs += 1
        m_k = math.floor((1 + v + delta) * n_raw) + (n_k - n_raw)
        floor_m = max(n_k + 1, n_k + (ms[-1] - ns[-1] if ms else 1))
        if m_k < floor_m:
            m_k = floor_m
            repairs += 1
        ns.append(n_k)
        ms.append(m_k)
    ts = []
    for k in range(K):
        g = ms[k] - ns[k]
        ts.append((ns[k + 1] - ms[k] - 1) // g)
    if any(x == y for x, y in zip(ns, ns[1:])):
        raise DegenerateSchedule("schedule does not grow")
    return CantorSchedule(v, v_hat, delta, N, tuple(ns[:K]), tuple(ms[:K]), tuple(ts), ns[K], repairs)


# ---------------------------------------------------------------- fillers

class FillerCounts:
    """Counting and sampling words admissible for beta_N.

    beta_N expands 1 as the finite word d_1..d_M, so its eps* sequence is
    the period (d_1, ..., d_(M-1), d_M - 1) repeated; automaton states are
    taken modulo M.
    """

    def __init__(self, beta_n: BetaValue):
        d = beta_n.parry_expansion
        if not d:
            raise DomainError("beta_N must carry its finite expansion of 1")
        self.beta_n = beta_n
        self.cycle = tuple(d[:-1]) + (d[-1] - 1,)
        self.M = len(self.cycle)
        self._rows: list[list[int]] = [[1] * self.M]

    def step(self, state: int, digit: int) -> int | None:
        bound = self.cycle[state]
        if digit < bound:
            return 0
        if digit == bound:
            return (state + 1) % self.M
        return None

    def state_of(self, digits: Sequence[int], state: int = 0) -> int | None:
        for a in digits:
            state = self.step(state, a)
            if state is None:
                return None
        return state

    def completions(self, r: int, state: int = 0) -> int:
        """Admissible continuations of length r from a state."""
        while len(self._rows) <= r:
            prev = self._rows[-1]
            self._rows.append([
                self.cycle[j] * prev[0] + prev[(j + 1) % self.M] for j in range(self.M)
            ])
        return self._rows[r][state]

    def count(self, L: int) -> int:
        return self.completions(L, 0)

    def words(self, L: int) -> Iterator[tuple[int, ...]]:
        word = [0] * L

        def rec(i: int, state: int):
            if i == L:
                yield tuple(word)
                return
            for a in range(self.cycle[state] + 1):
                word[i] = a
                yield from rec(i + 1, self.step(state, a))

        yield from rec(0, 0)

    def sample(self, L: int, rng: random.Random) -> tuple[int, ...]:
        """Uniform over admissible words of length L."""
        out = []
        state = 0
        for i in range(L):
            left = L - i - 1
            pick = rng.randrange(self.completions(left + 1, state))
            for a in range(self.cycle[state] + 1):
                nxt = self.step(state, a)
                c = self.completions(left, nxt)
                if pick < c:
                    out.append(a)
                    state = nxt
                    break
                pick -= c
        return tuple(out)


# ---------------------------------------------------------------- layout

@dataclass(frozen=True)
class Segment:
    kind: str           # free | zeros | mark
    start: int          # first position (1-based)
    length: int
    label: str = ""     # n_k / m_k / r_k for marks
    one_at: int = 0     # position of the 1 inside a mark

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    def forced(self, N: int, layout: str) -> tuple[int, ...]:
        if self.kind == "zeros":
            return (0,) * self.length
        if layout == "padded":
            return (0,) * N + (1,) + (0,) * N
        return (1,)


class Template:
    """Position bookkeeping for one schedule and layout."""

    def __init__(self, s: CantorSchedule, beta: BetaValue, layout: str = "padded"):
        if layout not in LAYOUTS:
            raise InvalidParams(f"layout must be one of {LAYOUTS}")
        self.s = s
        self.beta = beta
        self.layout = layout
        self.beta_n = solve_beta_n(beta, s.N)
        self.fill = FillerCounts(self.beta_n)
        self.segments = self._build()

    def _build(self) -> list[Segment]:
        s, pad = self.s, (self.s.N if self.layout == "padded" else 0)
        segs: list[Segment] = []
        pos = 1

        def add(kind: str, length: int, label: str = ""):
            nonlocal pos
            if length <= 0:
                return
            one = pos + pad if kind == "mark" else 0
            segs.append(Segment(kind, pos, length, label, one))
            pos += length

        mark = 2 * pad + 1
        add("free", s.n[0] - 1)
        for k in range(s.K):
            g = s.gaps[k]
            add("mark", mark, f"n{k + 1}")
            add("zeros", g - 1)
            add("mark", mark, f"m{k + 1}")
            for i in range(s.t[k]):
                add("free", g - 1)
                add("mark", mark, f"r{k + 1}.{i + 1}")
            add("free", s.q[k])
        return segs

    @property
    def length(self) -> int:
        return self.segments[-1].end

    @cached_property
    def marks(self) -> dict[str, Segment]:
        return {sg.label: sg for sg in self.segments if sg.kind == "mark"}

    def one_position(self, label: str) -> int:
        return self.marks[label].one_at

    def milestone(self, k: int) -> int:
        """h_k: last position of the block for m_k (1-based k)."""
        return self.marks[f"m{k}"].end

    def free_blocks_through(self, depth: int) -> list[tuple[Segment, int]]:
        return [(sg, min(sg.length, depth - sg.start + 1))
                for sg in self.segments if sg.kind == "free" and sg.start <= depth]

    def _check_depth(self, depth: int) -> None:
        if depth < 0 or depth > self.length:
            raise DomainError(f"depth {depth} outside the template (length {self.length})")

    def level_count(self, depth: int) -> int:
        self._check_depth(depth)
        total = 1
        for sg, used in self.free_blocks_through(depth):
            total *= self.fill.count(used) if used < sg.length else self.fill.count(sg.length)
        return total

    def pieces(self, depth: int) -> Iterator[tuple[Segment, int]]:
        for sg in self.segments:
            if sg.start > depth:
                return
            yield sg, min(sg.length, depth - sg.start + 1)

    def measure(self, word: Sequence[int], strict: bool = True) -> Fraction:
        """Mass of the cylinder of a template prefix."""
        word = tuple(word)
        self._check_depth(len(word))
        mass = Fraction(1)
        for sg, used in self.pieces(len(word)):
            part = word[sg.start - 1: sg.start - 1 + used]
            if sg.kind == "free":
                state = self.fill.state_of(part)
                if state is None:
                    return self._reject(strict, f"filler at {sg.start} is not admissible for beta_N")
                mass *= Fraction(self.fill.completions(sg.length - used, state), self.fill.count(sg.length))
            elif part != sg.forced(self.s.N, self.layout)[:used]:
                return self._reject(strict, f"forced segment at {sg.start} differs")
        return mass

    @staticmethod
    def _reject(strict: bool, msg: str) -> Fraction:
        if strict:
            raise NotTemplateWord(msg)
        return Fraction(0)

    def words(self, depth: int, cap: int = WORD_CAP) -> Iterator[tuple[int, ...]]:
        count = self.level_count(depth)
        if count > cap:
            raise CapExceeded(f"{count} template words at depth {depth} exceed cap {cap}")
        choices = []
        for sg, used in self.pieces(depth):
            if sg.kind == "free":
                choices.append(list(self.fill.words(used)))
            else:
                choices.append([sg.forced(self.s.N, self.layout)[:used]])
        for combo in itertools.product(*choices):
            yield tuple(itertools.chain.from_iterable(combo))

    def sample(self, depth: int, rng: random.Random) -> tuple[int, ...]:
        """A prefix drawn from the measure: each free block uniform."""
        out: list[int] = []
        for sg, used in self.pieces(depth):
            if sg.kind == "free":
                out.extend(self.fill.sample(sg.length, rng)[:used])
            else:
                out.extend(sg.forced(self.s.N, self.layout)[:used])
        return tuple(out)


def generate_level_words(s: CantorSchedule, beta: BetaValue, depth: int,
                         layout: str = "padded", cap: int = WORD_CAP) -> list[DigitWord]:
    t = Template(s, beta, layout)
    return [DigitWord(w, beta) for w in t.words(depth, cap)]


def bernoulli_measure(s: CantorSchedule, w, beta: BetaValue, layout: str = "padded",
                      strict: bool = True) -> Fraction:
    digits = w.digits if isinstance(w, DigitWord) else tuple(w)
    return Template(s, beta, layout).measure(digits, strict)


def check_mass_conservation(t: Template, depth: int, cap: int = WORD_CAP) -> list[tuple[int, bool]]:
    """Per level n <= depth: children of every word sum to its mass, and the level sums to 1."""
    report = []
    level = {(): Fraction(1)}
    digits = range(t.beta.digit_bound + 1)
    for n in range(1, depth + 1):
        nxt = {}
        ok = True
        for w, mass in level.items():
            total = Fraction(0)
            for a in digits:
                child = w + (a,)
                cm = t.measure(child, strict=False)
                if cm:
                    nxt[child] = cm
                    total += cm
            ok &= total == mass
        if len(nxt) > cap:
            raise CapExceeded(f"level {n} has {len(nxt)} words")
        ok &= sum(nxt.values()) == 1
        report.append((n, ok))
        level = nxt
    return report


# ---------------------------------------------------------------- diagnostics

def local_dimension_target(s: CantorSchedule, beta: BetaValue) -> float:
    v, vh, d = s.v, s.v_hat, s.delta
    core = (v - vh - (v + d) * (vh + d)) / ((1 + v + d) * (v - vh))
    beta_n = solve_beta_n(beta, s.N)
    return float(core) * math.log(beta_n.approx(30)) / math.log(beta.approx(30))


def _log_count(t: Template, depth: int) -> float:
    """log of 1/mu(I) for a milestone cylinder (all free blocks complete)."""
    return sum(math.log(t.fill.count(sg.length)) for sg, _ in t.free_blocks_through(depth))


def local_dimension_series(s: CantorSchedule, beta: BetaValue, K: int | None = None,
                           layout: str = "padded") -> list[tuple[int, float]]:
    """log mu(I_(h_k)) / log |I_(h_k)| with |I_(h_k)| = beta^(-h_k)."""
    t = Template(s, beta, layout)
    K = s.K if K is None else K
    if K > s.K:
        raise DomainError("K beyond the schedule")
    lb = math.log(beta.approx(30))
    return [(k, _log_count(t, t.milestone(k)) / (t.milestone(k) * lb)) for k in range(1, K + 1)]


def milestone_cover(s: CantorSchedule, beta: BetaValue, ks: Sequence[int],
                    layout: str = "padded") -> tuple[list[int], list[float]]:
    """Cylinder counts at the milestones h_k and log(1/scale) with scale beta^(-h_k)."""
    t = Template(s, beta, layout)
    lb = math.log(beta.approx(30))
    counts, scales = [], []
    for k in ks:
        h = t.milestone(k)
        counts.append(t.level_count(h))
        scales.append(h * lb)
    return counts, scales


def middle_thirds_cover(levels: int) -> tuple[list[int], list[float]]:
    return [2 ** k for k in range(1, levels + 1)], [k * math.log(3) for k in range(1, levels + 1)]


def boxcount_estimate(counts: Sequence[int], log_inv_scales: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log N(eps) against log(1/eps), with RMS residual."""
    if len(counts) != len(log_inv_scales):
        raise InvalidParams("counts and scales differ in length")
    if len(counts) < 4:
        raise InsufficientScales("need at least four scales")
    xs = list(log_inv_scales)
    ys = [math.log(c) for c in counts]
    fit = statistics.linear_regression(xs, ys)
    res = [y - (fit.slope * x + fit.intercept) for x, y in zip(xs, ys)]
    return fit.slope, math.sqrt(sum(r * r for r in res) / len(res))


# ---------------------------------------------------------------- membership

@dataclass
class MembershipReport:
    layout: str
    samples: int
    asymptotic_checks: list[int]
    uniform_range: tuple[int, int]
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "layout": self.layout,
            "samples": self.samples,
            "asymptotic_checks": self.asymptotic_checks,
            "uniform_range": list(self.uniform_range),
            "violations": self.violations,
            "passed": self.passed,
        }


def verify_membership(s: CantorSchedule, beta: BetaValue, psi1: SpeedFn, psi2: SpeedFn,
                      sample_words: Sequence[Sequence[int]] | None = None, count: int = 100,
                      seed: int = 0, layout: str = "claim", start: int = 10,
                      include_zero: bool = True) -> MembershipReport:
    """Check T^n x < psi1(n) at the scheduled ones n >= start, and the
    uniform condition for psi2 at every N in [start, last scheduled m].

    Sample points are left endpoints of template cylinders drawn from the
    measure (or the given words).
    """
    t = Template(s, beta, layout)
    ones = [t.one_position(f"n{k}") for k in range(1, s.K + 1)]
    checks = [p for p in ones if p >= start]
    top = t.one_position(f"m{s.K}")
    if sample_words is None:
        rng = random.Random(seed)
        sample_words = [t.sample(t.length, rng) for _ in range(count)]
    points = [word_value(tuple(w), beta) for w in sample_words]
    if include_zero:
        points.append(beta.zero)
    report = MembershipReport(layout, len(points), checks, (start, top))
    for idx, x in enumerate(points):
        pts = orbit(x, beta, top + 1).points
        for p in checks:
            if not below_psi(pts[p], psi1, p):
                report.violations.append({"sample": idx, "kind": "asymptotic", "n": p})
        running = None
        for n in range(top + 1):
            if running is None or (not running.is_zero() and compare_exact(pts[n], running) == Ordering.LT):
                running = pts[n]
            if n >= start and not below_psi(running, psi2, n):
                report.violations.append({"sample": idx, "kind": "uniform", "N": n})
    return report


def cover_csv(t: Template, depth: int, digits: int = 30, cap: int = WORD_CAP) -> str:
    """CSV with columns level,word,left,length,mass for the template words at one depth."""
    from .cylinders import cylinder_interval

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["level", "word", "left", "length", "mass"])
    for w in t.words(depth, cap):
        cyl = cylinder_interval(w, t.beta)
        mass = t.measure(w)
        writer.writerow([depth, str(cyl.word), to_decimal_string(cyl.left, digits),
                         to_decimal_string(cyl.length, digits), f"{mass.numerator}/{mass.denominator}"])
    return out.getvalue()
