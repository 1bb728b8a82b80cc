import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpcp.domain import FpDomain, middle, middle_ordinal
from fpcp.fp import BINARY32, FpFormat, FpValue
from fpcp.search import density_of
from oracle import MINI_FORMATS

F44 = FpFormat(4, 4)


def v32(q):
    return FpValue.from_fraction(BINARY32, Fraction(q))


def dom(lo, hi, nan=False, fmt=BINARY32):
    return FpDomain.interval(FpValue.from_fraction(fmt, Fraction(lo)), FpValue.from_fraction(fmt, Fraction(hi)), nan)


def test_cardinality_examples():
    assert dom(1, 1).cardinality() == 1
    assert dom(100000, 100001).cardinality() == 129
    assert dom(1, 1, nan=True).cardinality() == 2


def test_cardinality_matches_enumeration_on_44():
    # count non-NaN bit patterns whose value lies between the bounds
    fmt = F44
    patterns = [b for b in range(1 << fmt.width) if not fmt.is_nan_bits(b)]
    ords = sorted(fmt.ordinal(b) for b in patterns)
    for i, lo in enumerate(ords):
        for j in range(i, len(ords)):
            d = FpDomain(fmt, lo, ords[j])
            assert d.cardinality() == j - i + 1
    assert FpDomain(fmt, fmt.min_ordinal, fmt.max_ordinal).cardinality() == len(patterns)


def test_width_examples():
    assert dom(2, 8).width() == 6.0
    ninf = FpValue.inf(BINARY32, negative=True)
    assert FpDomain.interval(ninf, v32(0)).width() == math.inf
    one = v32(1)
    assert FpDomain.interval(one, one.succ()).width() == 2.0 ** -23


def test_density_examples():
    assert dom(0, 1).density() > dom(100000, 100001).density()
    assert dom(3, 3).density() == math.inf
    for fmt in MINI_FORMATS + [F44]:
        zero, one = FpValue.zero(fmt), FpValue.from_fraction(fmt, 1)
        count = sum(1 for b in range(1 << fmt.width)
                    if not fmt.is_nan_bits(b) and 0 <= fmt.ordinal(b) <= one.ordinal())
        assert FpDomain.interval(zero, one).density() == count


def test_search_density_agrees_with_domain():
    for lo, hi in [(0, 1), (100000, 100001), (-3, 7)]:
        d = dom(lo, hi)
        assert density_of(BINARY32, d.lo, d.hi, False) == pytest.approx(d.density())


def test_middle_table():
    assert middle(v32(-5), v32(10)) == v32(0)
    assert middle(v32(0.5), v32(3)) == v32(1)
    assert middle(v32(2), v32(8)) == v32(5)


def test_middle_negative_one_case():
    assert middle(v32(-3), v32(-0.5)) == v32(-1)


@given(st.integers(F44.min_ordinal, F44.max_ordinal), st.integers(F44.min_ordinal, F44.max_ordinal))
def test_middle_strictly_inside(a, b):
    lo, hi = min(a, b), max(a, b)
    m = middle_ordinal(F44, lo, hi)
    assert lo <= m <= hi
    if hi - lo >= 2:
        assert lo < m < hi


@pytest.mark.parametrize("fmt", MINI_FORMATS + [F44, BINARY32], ids=str)
def test_split_at_one_is_balanced(fmt):
    one = FpValue.from_fraction(fmt, 1).ordinal()
    below = one - 1  # ordinals 1 .. one-1
    above = fmt.max_ordinal - 1 - one  # ordinals one+1 .. max-1
    assert middle_ordinal(fmt, 1, fmt.max_ordinal) == one
    assert abs(below - above) <= 1 << (fmt.sbits - 1)


def test_domain_membership_and_intersection():
    d = dom(1, 4, nan=True)
    assert v32(2) in d and FpValue.nan(BINARY32) in d and v32(5) not in d
    e = d.intersect(dom(3, 9))
    assert (e.lb, e.ub, e.may_nan) == (v32(3), v32(4), False)
    assert FpDomain.nan_only(BINARY32).is_instantiated
    assert FpDomain.empty(BINARY32).is_empty
