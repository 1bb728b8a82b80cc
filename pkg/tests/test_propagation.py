import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import newton
import soundness as S
from fpcp import constraints as K
from fpcp.domain import FpDomain
from fpcp.fp import BINARY16, BINARY32, FpFormat, fraction_to_bits
from fpcp.frontend import parse_file, parse_script
from fpcp.propagation import DomainStore, Inconsistent, Propagator, fixpoint, project
from fpcp.rewrite import decompose, inline_closure, reconstruct
from oracle import random_script

F32 = BINARY32


def o(q, fmt=F32):
    return fmt.ordinal(fraction_to_bits(fmt, Fraction(q)))


def store(fmt, *boxes):
    """Store over FP variables given as (lo, hi) values or (lo, hi, nan)."""
    doms = []
    for b in boxes:
        if b is None:
            doms.append(FpDomain.full(fmt))
        else:
            lo, hi, *nan = b
            doms.append(FpDomain(fmt, o(lo, fmt), o(hi, fmt), bool(nan and nan[0])))
    return DomainStore([fmt] * len(doms), doms)


def bounds(st, v, fmt=F32):
    return st.lo[v], st.hi[v], st.nan[v]


# -- worked examples ------------------------------------------------------------

def test_forward_add_is_exact():
    st = store(F32, None, (1, 2), (3, 4))
    project(K.TernArith("add", "RNE", 0, 1, 2), st)
    assert bounds(st, 0) == (o(4), o(6), False)


def test_forward_mul_uses_corners():
    st = store(F32, None, (-2, 3), (-1, 4))
    project(K.TernArith("mul", "RNE", 0, 1, 2), st)
    assert bounds(st, 0) == (o(-8), o(12), False)


def test_division_by_signed_zeros():
    st2 = DomainStore([F32] * 3, [FpDomain.full(F32), FpDomain(F32, o(1), o(1), False),
                                  FpDomain(F32, -1, 0, False)])
    project(K.TernArith("div", "RNE", 0, 1, 2), st2)
    assert bounds(st2, 0) == (F32.min_ordinal, F32.max_ordinal, False)
    # 0/0 is the only way to a NaN
    st3 = DomainStore([F32] * 3, [FpDomain.full(F32), FpDomain(F32, -1, 0, False),
                                  FpDomain(F32, -1, 0, False)])
    project(K.TernArith("div", "RNE", 0, 1, 2), st3)
    assert st3.lo[0] > st3.hi[0] and st3.nan[0]


def test_division_by_zero_agrees_with_oracle():
    fmt = S.FMT
    c = K.TernArith("div", "RNE", 0, 1, 2)
    one = o(1, fmt)
    boxes = [(fmt.min_ordinal, fmt.max_ordinal, True), (one, one, False), (-1, 0, False)]
    assert S.check(c, [fmt] * 3, boxes) is None
    sup = S.supports(c, [fmt] * 3, boxes)[0]
    assert len(sup) == 2


def test_inverse_add_keeps_witness():
    st = store(F32, (4, 4), None, (3, 3))
    project(K.TernArith("add", "RNE", 0, 1, 2), st)
    assert st.lo[1] <= o(1) <= st.hi[1]
    assert o(Fraction(1, 2)) < st.lo[1] and st.hi[1] < o(Fraction(3, 2)) and not st.nan[1]


def test_inverse_mul_excludes_negative_zero():
    fmt = S.FMT
    c = K.TernArith("mul", "RNE", 0, 1, 2)
    st = DomainStore([fmt] * 3, [FpDomain(fmt, 0, fmt.max_ordinal - 1, False), FpDomain.full(fmt),
                                 FpDomain(fmt, 0, fmt.max_ordinal - 1, False)])
    project(c, st)
    assert st.lo[1] >= 0 and not st.nan[1]
    boxes = [(0, fmt.max_ordinal - 1, False), (fmt.min_ordinal, fmt.max_ordinal, True),
             (0, fmt.max_ordinal - 1, False)]
    assert S.check(c, [fmt] * 3, boxes) is None


def test_square_is_tighter_than_mul():
    st = store(F32, None, (-3, 2))
    project(K.Square("RNE", 0, 1), st)
    assert bounds(st, 0) == (0, o(9), False)
    st = store(F32, None, (-3, 2), (-3, 2))
    project(K.TernArith("mul", "RNE", 0, 1, 2), st)
    assert bounds(st, 0) == (o(-6), o(9), False)


def test_square_root_preimage():
    st = store(F32, (4, 4), None)
    project(K.Square("RNE", 0, 1), st)
    assert o(-2) <= st.lo[1] and st.hi[1] <= o(2) and not st.nan[1]
    for half, root in (((-F32.max_ordinal - 1, -1), -2), ((0, F32.max_ordinal), 2)):
        st2 = store(F32, (4, 4), None)
        st2.narrow(1, *half, False)
        assert fixpoint(st2, [K.Square("RNE", 0, 1)])
        assert st2.lo[1] == st2.hi[1] == o(root)


def test_square_of_negative_is_empty():
    st = store(F32, (-4, -1), None)
    with pytest.raises(Inconsistent):
        project(K.Square("RNE", 0, 1), st)


def test_lt_clips_bounds():
    st = store(F32, (3, 10), (0, 5))
    project(K.Cmp("lt", 0, 1), st)
    assert bounds(st, 0) == (o(3), o(5) - 1, False)
    assert bounds(st, 1) == (o(3) + 1, o(5), False)


def test_eq_identifies_zeros():
    st = DomainStore([F32] * 2, [FpDomain(F32, -1, -1, False), FpDomain(F32, 0, 0, False)])
    before = st.snapshot()
    assert fixpoint(st, [K.Cmp("eq", 0, 1)])
    assert st.snapshot() == before


def test_irreflexive_lt_fixes_bool():
    st = DomainStore([F32, None], [FpDomain.full(F32), frozenset((False, True))])
    project(K.ReifCmp(1, "lt", 0, 0), st)
    assert st.is_bound(1) and st.value(1) is False


def test_unit_clause():
    st = DomainStore([None] * 2, [frozenset((False, True)), frozenset((True,))])
    project(K.BoolClause(((0, True), (1, False))), st)
    assert st.value(0) is True


def test_ite_takes_hull_when_open():
    fmt = F32
    st = DomainStore([None, fmt, fmt, fmt], [frozenset((False, True)), FpDomain.full(fmt),
                                             FpDomain(fmt, o(1), o(2), False), FpDomain(fmt, o(5), o(7), False)])
    project(K.IteFp(0, 1, 2, 3), st)
    assert bounds(st, 1) == (o(1), o(7), False)


def test_isnan_true_leaves_only_nan():
    st = DomainStore([F32, None], [FpDomain.full(F32), frozenset((True,))])
    project(K.Pred("isNaN", 1, 0), st)
    assert st.lo[0] > st.hi[0] and st.nan[0]


def test_fixpoint_on_exact_sum():
    st = store(F32, None, (1, 1), (2, 2))
    p = Propagator([K.TernArith("add", "RNE", 0, 1, 2)], st)
    assert p.fixpoint()
    assert bounds(st, 0) == (o(3), o(3), False)
    assert p.stats.revisions <= 2


@pytest.mark.parametrize("fmt", [S.FMT, BINARY16])
def test_near_cycle_empties_without_budget(fmt):
    st = DomainStore([fmt] * 3, [FpDomain.full(fmt)] * 3)
    cs = [K.Cmp("lt", 0, 1), K.Cmp("lt", 1, 2), K.Cmp("lt", 2, 0)]
    assert not fixpoint(st, cs, budget_factor=None)


def test_budget_stops_early_and_stays_sound():
    st = DomainStore([BINARY16] * 3, [FpDomain.full(BINARY16)] * 3)
    cs = [K.Cmp("lt", 0, 1), K.Cmp("lt", 1, 2), K.Cmp("lt", 2, 0)]
    p = Propagator(cs, st, budget_factor=100)
    assert p.fixpoint()
    assert p.stats.budget_exhausted == 1 and p.stats.revisions == 300


@pytest.mark.parametrize("x", [0.5, 1.3, -2.7, 3.0, 0.1])
def test_newton_with_fixed_x_collapses_r(x):
    _, _, m2 = reconstruct(parse_file(newton.PATH))
    st = DomainStore.from_model(m2)
    xv = np.float32(x)
    xi = m2.index["x"]
    ox = F32.ordinal(int(xv.view(np.uint32)))
    st.narrow(xi, ox, ox, False)
    assert Propagator(m2.constraints, st, budget_factor=None).fixpoint()
    ri = m2.index["r"]
    assert st.is_bound(ri)
    # the encoded script: r = x - (1 - x*x/2) / (x - x*x*x/6), all in float32
    with np.errstate(all="ignore"):
        num = np.float32(1) - (xv * xv) / np.float32(2)
        den = xv - (xv * xv * xv) / np.float32(6)
        r = xv - num / den
    assert st.value(ri) == int(np.float32(r).view(np.uint32))


# -- soundness ----------------------------------------------------------------

def test_checker_catches_a_broken_projection(monkeypatch):
    from fpcp import propagation as P

    real = P._PROJECTORS[K.TernArith]

    def shaved(c, st):
        real(c, st)
        if st.lo[c.z] < st.hi[c.z]:
            st.narrow(c.z, st.lo[c.z] + 1, st.hi[c.z], st.nan[c.z])

    monkeypatch.setitem(P._PROJECTORS, K.TernArith, shaved)
    fmt = S.FMT
    bad = S.check(K.TernArith("add", "RNE", 0, 1, 2), [fmt] * 3,
                  [(fmt.min_ordinal, fmt.max_ordinal, True), (o(1, fmt), o(2, fmt), False),
                   (o(1, fmt), o(2, fmt), False)])
    assert bad is not None and "lost" in bad


FAMILIES = S.families(FpFormat(3, 3))


@pytest.mark.parametrize("label,c,fmts", FAMILIES, ids=[f[0] for f in FAMILIES])
def test_projection_soundness_sample(label, c, fmts):
    rng = random.Random(label)
    fmt = FpFormat(3, 3)
    pool = S.anchor_boxes(fmt)
    for _ in range(300):
        boxes = [rng.choice(S.BOOL_BOXES) if f is None else
                 (rng.choice(pool) if rng.random() < 0.5 else S.random_box(rng, fmt)) for f in fmts]
        assert S.check(c, fmts, boxes) is None


def _box(fmt):
    return st.tuples(st.integers(fmt.min_ordinal, fmt.max_ordinal),
                     st.integers(fmt.min_ordinal, fmt.max_ordinal), st.booleans()).map(
        lambda t: (min(t[0], t[1]), max(t[0], t[1]), t[2]))


def _sub(box, a, b, drop_nan):
    lo, hi, nan = box
    if lo > hi:
        return box
    w = hi - lo
    return (lo + a * w // 4, hi - b * w // 4, nan and not drop_nan)


def _after(c, fmts, boxes):
    st = S._store(fmts, boxes)
    try:
        project(c, st)
    except Inconsistent:
        return None
    return [(st.lo[v], st.hi[v], st.nan[v]) for v in range(len(fmts))]


def _subset(a, b):
    alo, ahi, an = a
    blo, bhi, bn = b
    num = alo > ahi or (blo <= alo and ahi <= bhi)
    return num and (bn or not an)


ARITH = [f for f in S.families(FpFormat(3, 3)) if f[0].startswith(("arith", "square", "minmax", "cmp", "unary"))]


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(ARITH), st.data())
def test_projections_are_monotone(fam, data):
    _, c, fmts = fam
    fmt = FpFormat(3, 3)
    big = [data.draw(_box(fmt)) for _ in fmts]
    small = [_sub(b, data.draw(st.integers(0, 2)), data.draw(st.integers(0, 2)), data.draw(st.booleans()))
             for b in big]
    out_big, out_small = _after(c, fmts, big), _after(c, fmts, small)
    if out_big is None:
        assert out_small is None
        return
    assert all(_subset(b, a) for b, a in zip(out_big, big))
    if out_small is not None:
        assert all(_subset(s, b) for s, b in zip(out_small, out_big))


def _mini_models(n, seed=0):
    rng = random.Random(seed)
    for _ in range(n):
        m1 = inline_closure(parse_script(random_script(rng)))
        yield decompose(m1)


def _measure(st):
    return sum(max(0, h - l + 1) for l, h in zip(st.lo, st.hi)) + sum(st.nan)


def test_revisions_shrink_the_measure():
    for m2 in _mini_models(60, seed=1):
        st = DomainStore.from_model(m2)
        try:
            for _ in range(50):
                moved = False
                for c in m2.constraints:
                    before, snap = _measure(st), st.snapshot()
                    project(c, st)
                    if st.snapshot() != snap:
                        assert _measure(st) < before
                        moved = True
                if not moved:
                    break
        except Inconsistent:
            pass


def test_fixpoint_is_idempotent():
    for m2 in _mini_models(80, seed=2):
        st = DomainStore.from_model(m2)
        if not fixpoint(st, m2.constraints, budget_factor=None):
            continue
        snap = st.snapshot()
        assert fixpoint(st, m2.constraints, budget_factor=None)
        assert st.snapshot() == snap


def test_singleton_fixpoint_means_solution():
    rng = random.Random(3)
    seen = 0
    for m2 in _mini_models(150, seed=3):
        for _ in range(20):
            st = DomainStore.from_model(m2)
            val = {}
            try:
                for v in range(len(m2.names)):
                    if st.is_bool(v):
                        b = rng.random() < 0.5 if st.size(v) == 2 else st.value(v)
                        st.fix_bool(v, b)
                    else:
                        d = st.domain(v)
                        vals = list(d.values())
                        bits = rng.choice(vals).bits
                        if st.fmts[v].is_nan_bits(bits):
                            st.narrow(v, 1, 0, True)
                        else:
                            oo = st.fmts[v].ordinal(bits)
                            st.narrow(v, oo, oo, False)
                    val[v] = st.value(v)
            except Inconsistent:
                continue
            if fixpoint(st, m2.constraints, budget_factor=None):
                seen += 1
                assert all(K.holds(c, val, m2.fmt_of) for c in m2.constraints)
    assert seen > 0
