"""Interval domains over a floating-point format.

A domain is a closed ordinal interval ``[lo..hi]`` plus a NaN flag.  NaN
never sits inside the interval; ``lo > hi`` encodes an empty numeric part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .fp import RNE, FpFormat, FpValue, fp_add, fp_div, fraction_to_bits


@dataclass(frozen=True)
class FpDomain:
    fmt: FpFormat
    lo: int
    hi: int
    may_nan: bool = False

    # -- construction --------------------------------------------------------

    @classmethod
    def full(cls, fmt: FpFormat) -> "FpDomain":
        return cls(fmt, fmt.min_ordinal, fmt.max_ordinal, True)

    @classmethod
    def interval(cls, lb: FpValue, ub: FpValue, may_nan: bool = False) -> "FpDomain":
        return cls(lb.fmt, lb.ordinal(), ub.ordinal(), may_nan)

    @classmethod
    def singleton(cls, v: FpValue) -> "FpDomain":
        if v.is_nan:
            return cls.nan_only(v.fmt)
        o = v.ordinal()
        return cls(v.fmt, o, o, False)

    @classmethod
    def nan_only(cls, fmt: FpFormat) -> "FpDomain":
        return cls(fmt, 1, 0, True)

    @classmethod
    def empty(cls, fmt: FpFormat) -> "FpDomain":
        return cls(fmt, 1, 0, False)

    # -- views ---------------------------------------------------------------

    @property
    def lb(self) -> FpValue:
        return FpValue.from_ordinal(self.fmt, self.lo)

    @property
    def ub(self) -> FpValue:
        return FpValue.from_ordinal(self.fmt, self.hi)

    @property
    def numeric_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi and not self.may_nan

    @property
    def is_instantiated(self) -> bool:
        if self.may_nan:
            return self.lo > self.hi
        return self.lo == self.hi

    def __contains__(self, v: FpValue) -> bool:
        if v.is_nan:
            return self.may_nan
        return self.lo <= v.ordinal() <= self.hi

    def values(self):
        """Iterate members (NaN last).  Only sensible on small domains."""
        for o in range(self.lo, self.hi + 1):
            yield FpValue.from_ordinal(self.fmt, o)
        if self.may_nan:
            yield FpValue.nan(self.fmt)

    def intersect(self, other: "FpDomain") -> "FpDomain":
        return FpDomain(self.fmt, max(self.lo, other.lo), min(self.hi, other.hi),
                        self.may_nan and other.may_nan)

    def __str__(self):
        if self.numeric_empty:
            body = "{}"
        else:
            body = f"[{_short(self.lb)} .. {_short(self.ub)}]"
        return body + (" + NaN" if self.may_nan else "")

    # -- measures ------------------------------------------------------------

    def cardinality(self) -> int:
        n = 0 if self.numeric_empty else self.hi - self.lo + 1
        return n + (1 if self.may_nan else 0)

    def exact_width(self) -> Fraction | None:
        """``ub - lb`` as an exact rational, None when a bound is infinite."""
        if self.numeric_empty:
            return Fraction(0)
        a = self.fmt.value_fraction(self.lo)
        b = self.fmt.value_fraction(self.hi)
        if a is None or b is None:
            return None
        return b - a

    def width(self) -> float:
        w = self.exact_width()
        if w is None:
            return math.inf
        return _float_up(w)

    def density(self) -> float:
        w = self.exact_width()
        if w is None:
            w = 2 * self.fmt.value_fraction(self.fmt.max_ordinal - 1)
        if w == 0:
            return math.inf
        try:
            return float(Fraction(self.cardinality()) / w)
        except OverflowError:
            return 1.7976931348623157e308


def _short(v: FpValue) -> str:
    x = float(v)
    return repr(x)


def _float_up(q: Fraction) -> float:
    try:
        f = float(q)
    except OverflowError:
        return math.inf
    if Fraction(f) < q:
        f = math.nextafter(f, math.inf)
    return f


def cardinality(d: FpDomain) -> int:
    return d.cardinality()


def width(d: FpDomain) -> float:
    return d.width()


def density(d: FpDomain) -> float:
    return d.density()


def middle_ordinal(fmt: FpFormat, lo: int, hi: int) -> int:
    """Split point of ``[lo..hi]``: 0, then 1, then -1 when strictly inside
    the interval, otherwise ``L/2 + U/2`` rounded to nearest-even and clamped
    strictly inside.  Intervals without interior points return ``lo``."""
    if hi - lo < 2:
        return lo
    one = fmt.ordinal(fraction_to_bits(fmt, Fraction(1)))
    for m in (0, -1, one, -one - 1):
        if lo < m < hi:
            return m
    two = fraction_to_bits(fmt, Fraction(2))
    half_l = fp_div(fmt, RNE, fmt.from_ordinal(lo), two)
    half_u = fp_div(fmt, RNE, fmt.from_ordinal(hi), two)
    m = fmt.ordinal(fp_add(fmt, RNE, half_l, half_u))
    return min(max(m, lo + 1), hi - 1)


def middle(L: FpValue, U: FpValue) -> FpValue:
    return FpValue.from_ordinal(L.fmt, middle_ordinal(L.fmt, L.ordinal(), U.ordinal()))
