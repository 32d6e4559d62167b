"""Basic intervals I_n(w): exact endpoints, fullness and level partitions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Iterator

from .beta_symbolic import (
    ENUMERATION_CAP,
    DigitWord,
    _to_field,
    as_digits,
    check_unit_interval,
    format_word,
    greedy_expand,
    is_admissible,
    iter_admissible,
    successor,
    word_value,
)
from .errors import CapExceeded, NotAdmissible, NotFoundWithinBudget
from .precision_core import BetaValue, FieldElement, RealScalar, to_decimal_string


@dataclass(frozen=True)
class Cylinder:
    word: DigitWord
    left: FieldElement
    right: FieldElement

    @property
    def order(self) -> int:
        return len(self.word)

    @property
    def length(self) -> FieldElement:
        return self.right - self.left

    def is_full(self) -> bool:
        return self.length == self.left.beta.power(-self.order)


def _require_admissible(digits, beta: BetaValue) -> None:
    if not is_admissible(digits, beta):
        raise NotAdmissible(f"{format_word(digits, beta.digit_bound)} is not admissible")


def _cylinder(digits: tuple[int, ...], beta: BetaValue) -> Cylinder:
    left = word_value(digits, beta)
    nxt = successor(digits, beta)
    right = beta.one if nxt is None else word_value(nxt, beta)
    return Cylinder(DigitWord(digits, beta), left, right)


def cylinder_interval(w, beta: BetaValue) -> Cylinder:
    """I_n(w) = [value of w, value of its lexicographic successor)."""
    digits = as_digits(w)
    _require_admissible(digits, beta)
    return _cylinder(digits, beta)


def is_full(w, beta: BetaValue) -> bool:
    """|I_n(w)| == beta^-n, decided exactly."""
    return cylinder_interval(w, beta).is_full()


def iter_partition(beta: BetaValue, n: int, cap: int = ENUMERATION_CAP) -> Iterator[Cylinder]:
    """Stream the level-n cylinders left to right; consecutive ones abut."""
    if n > cap:
        raise CapExceeded(f"n={n} exceeds enumeration cap {cap}")
    words = iter_admissible(beta, n)
    prev = next(words, None)
    prev_left = word_value(prev, beta)
    for w in words:
        left = word_value(w, beta)
        yield Cylinder(DigitWord(prev, beta), prev_left, left)
        prev, prev_left = w, left
    yield Cylinder(DigitWord(prev, beta), prev_left, beta.one)


def partition_level(beta: BetaValue, n: int, cap: int = ENUMERATION_CAP) -> list[Cylinder]:
    return list(iter_partition(beta, n, cap))


def locate_cylinder(x: RealScalar, beta: BetaValue, n: int) -> Cylinder:
    """The level-n cylinder containing x."""
    y = _to_field(x, beta)
    check_unit_interval(y)
    return _cylinder(greedy_expand(y, beta, n).digits, beta)


def smallest_full_extension(w, beta: BetaValue, max_extra: int) -> Cylinder:
    """Lowest-order full cylinder inside I_n(w) (lexicographically first at that order)."""
    digits = as_digits(w)
    _require_admissible(digits, beta)
    for m in range(max_extra + 1):
        for ext in iter_admissible(beta, m):
            cand = digits + ext
            if is_admissible(cand, beta):
                cyl = _cylinder(cand, beta)
                if cyl.is_full():
                    return cyl
    raise NotFoundWithinBudget(f"no full extension within {max_extra} extra digits")


def cylinders_to_csv(cylinders: Iterable[Cylinder], digits: int = 30) -> str:
    """CSV with columns word,left,right,length,is_full."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["word", "left", "right", "length", "is_full"])
    for c in cylinders:
        writer.writerow([
            str(c.word),
            to_decimal_string(c.left, digits),
            to_decimal_string(c.right, digits),
            to_decimal_string(c.length, digits),
            str(c.is_full()).lower(),
        ])
    return out.getvalue()
