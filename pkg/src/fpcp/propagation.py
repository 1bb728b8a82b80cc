"""Domain store, projection functions and the propagation fixpoint.

FP domains live in the store as ordinal intervals ``[lo..hi]`` plus a NaN
flag; Bool domains use the same arrays over ``{0, 1}``.  An interval with
``lo > hi`` has an empty numeric part.

Arithmetic projections are built from two facts that hold for every
supported operation once each operand is restricted to one *piece*
(-inf, negative finite, the two zeros, positive finite, +inf):

* the result is monotone in each operand, so the image of a box is
  bracketed by its corner values;
* NaN results only come from singleton pieces, so corners see them.

Forward projections take the hull of the corner values.  Inverse projections
keep the operand values ``t`` whose corner bracket over the other operand
meets ``D(z)``; along a piece that predicate defines a prefix or suffix, so
its ends are found by bisection over ordinals.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import List, Optional

from . import constraints as K
from .domain import FpDomain
from .fp import ARITH, FpFormat, fp_mul

log = logging.getLogger(__name__)


class Inconsistent(Exception):
    """A domain became empty."""


# -- store ----------------------------------------------------------------------


class DomainStore:
    """Mutable domains with a trail for backtracking."""

    def __init__(self, fmts: List[Optional[FpFormat]], domains):
        self.fmts = fmts
        n = len(fmts)
        self.lo = [0] * n
        self.hi = [0] * n
        self.nan = [False] * n
        for v, d in enumerate(domains):
            if fmts[v] is None:
                self.lo[v] = 0 if False in d else 1
                self.hi[v] = 1 if True in d else 0
            else:
                self.lo[v], self.hi[v], self.nan[v] = d.lo, d.hi, d.may_nan
        self.trail: list = []
        self.frames: List[int] = []
        self.changed: List[int] = []
        self.prunes = 0

    @classmethod
    def from_model(cls, m2) -> "DomainStore":
        return cls([s.fmt if s.is_fp else None for s in m2.sorts], m2.domains)

    def __len__(self):
        return len(self.fmts)

    def is_bool(self, v: int) -> bool:
        return self.fmts[v] is None

    def domain(self, v: int):
        if self.fmts[v] is None:
            return frozenset(b for b in (False, True) if self.lo[v] <= int(b) <= self.hi[v])
        return FpDomain(self.fmts[v], self.lo[v], self.hi[v], self.nan[v])

    def is_bound(self, v: int) -> bool:
        if self.nan[v]:
            return self.lo[v] > self.hi[v]
        return self.lo[v] == self.hi[v]

    def value(self, v: int):
        """Value of an instantiated variable: bits for FP, bool for Bool."""
        if self.fmts[v] is None:
            return bool(self.lo[v])
        if self.lo[v] > self.hi[v]:
            return self.fmts[v].nan_bits
        return self.fmts[v].from_ordinal(self.lo[v])

    def size(self, v: int) -> int:
        return max(0, self.hi[v] - self.lo[v] + 1) + self.nan[v]

    # -- updates ---------------------------------------------------------------

    def narrow(self, v: int, lo: int, hi: int, nan: bool = True) -> bool:
        """Intersect ``v``'s domain with ``[lo..hi]`` (+NaN when ``nan``)."""
        olo, ohi, onan = self.lo[v], self.hi[v], self.nan[v]
        nlo = lo if lo > olo else olo
        nhi = hi if hi < ohi else ohi
        nnan = onan and nan
        if nlo > nhi:
            if not nnan:
                raise Inconsistent(v)
            if olo > ohi and onan:
                return False
            nlo, nhi = 1, 0
        if nlo == olo and nhi == ohi and nnan == onan:
            return False
        self.trail.append((v, olo, ohi, onan))
        self.lo[v], self.hi[v], self.nan[v] = nlo, nhi, nnan
        self.changed.append(v)
        self.prunes += 1
        return True

    def set_domain(self, v: int, lo: int, hi: int, nan: bool):
        """Replace a domain (used by branching; the new one must be a subset)."""
        self.trail.append((v, self.lo[v], self.hi[v], self.nan[v]))
        self.lo[v], self.hi[v], self.nan[v] = lo, hi, nan
        self.changed.append(v)

    def fix_bool(self, v: int, b: bool) -> bool:
        b = int(b)
        return self.narrow(v, b, b, False)

    def push(self):
        self.frames.append(len(self.trail))

    def pop(self):
        mark = self.frames.pop()
        trail = self.trail
        while len(trail) > mark:
            v, lo, hi, nan = trail.pop()
            self.lo[v], self.hi[v], self.nan[v] = lo, hi, nan
        self.changed.clear()

    def snapshot(self):
        return (tuple(self.lo), tuple(self.hi), tuple(self.nan))


# -- ordinal helpers ------------------------------------------------------------


def pieces(fmt: FpFormat, lo: int, hi: int):
    """Split ``[lo..hi]`` along -inf | negative | zeros | positive | +inf."""
    m = fmt.max_ordinal
    out = []
    for a, b in ((-m - 1, -m - 1), (-m, -2), (-1, 0), (1, m - 1), (m, m)):
        a, b = max(a, lo), min(b, hi)
        if a <= b:
            out.append((a, b))
    return out


def below(o: int) -> int:
    """Largest ordinal whose value is strictly less than that of ``o``."""
    if o in (-1, 0):
        return -2
    if o == 1:
        return 0
    return o - 1


def above(o: int) -> int:
    """Smallest ordinal whose value is strictly greater than that of ``o``."""
    if o in (-1, 0):
        return 1
    if o == -2:
        return -1
    return o + 1


def le_upper(o: int) -> int:
    """Largest ordinal whose value is <= that of ``o``."""
    return 0 if o == -1 else o


def ge_lower(o: int) -> int:
    """Smallest ordinal whose value is >= that of ``o``."""
    return -1 if o == 0 else o


def real_lo(o: int) -> int:
    return 0 if o == -1 else o


def _monotone_range(pred, a: int, b: int):
    """Sub-interval of ``[a..b]`` where a monotone predicate holds."""
    pa, pb = pred(a), pred(b)
    if pa and pb:
        return a, b
    if not pa and not pb:
        return None
    lo, hi = (a, b) if pa else (b, a)
    # pred(lo) holds, pred(hi) fails
    while abs(hi - lo) > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return (a, lo) if pa else (lo, b)


# -- arithmetic -----------------------------------------------------------------


def _ordinal_op(fmt: FpFormat, fn):
    """Wrap a bit-level binary op into one on ordinals; NaN results map to None."""
    fo = fmt.from_ordinal
    sm = fmt.sign_mask
    isnan = fmt.is_nan_bits

    def op(a: int, b: int):
        r = fn(fo(a), fo(b))
        if isnan(r):
            return None
        mag = r & ~sm
        return -mag - 1 if r & sm else mag

    return op


def _binary(c, fmt):
    f = ARITH[c.op]
    mode = c.mode
    return _ordinal_op(fmt, lambda a, b: f(fmt, mode, a, b))


def image(op, xs, ys):
    """Hull of ``op`` over the boxes ``xs`` x ``ys`` (lists of pieces).
    Returns ``(lo, hi, nan)``; ``lo > hi`` when only NaN is produced."""
    lo, hi, nan = None, None, False
    for xa, xb in xs:
        for ya, yb in ys:
            for a in (xa, xb) if xa != xb else (xa,):
                for b in (ya, yb) if ya != yb else (ya,):
                    r = op(a, b)
                    if r is None:
                        nan = True
                    elif lo is None:
                        lo = hi = r
                    elif r < lo:
                        lo = r
                    elif r > hi:
                        hi = r
    if lo is None:
        return 1, 0, nan
    return lo, hi, nan


def preimage(op2, ts, ss, zlo: int, zhi: int, znan: bool):
    """Values ``t`` in pieces ``ts`` such that ``op2(t, s)`` can land in
    ``[zlo..zhi]`` (or be NaN when ``znan``) for some ``s`` in ``ss``.
    Returns the ordinal hull ``(lo, hi)`` or None."""
    lo, hi = None, None

    def keep(a, b):
        nonlocal lo, hi
        if lo is None or a < lo:
            lo = a
        if hi is None or b > hi:
            hi = b

    for sa, sb in ss:
        for ta, tb in ts:
            if lo is not None and ta >= lo and tb <= hi:
                continue

            def bracket(t):
                r1 = op2(t, sa)
                r2 = r1 if sa == sb else op2(t, sb)
                return r1, r2

            if tb - ta <= 1:
                for t in (ta, tb) if ta != tb else (ta,):
                    r1, r2 = bracket(t)
                    if _meets(r1, r2, zlo, zhi, znan):
                        keep(t, t)
                continue
            r1, r2 = bracket(ta)
            if r1 is None or r2 is None:
                # NaN along a wide piece: give up on precision for this pair
                keep(ta, tb)
                continue

            def low_ok(t):
                r1, r2 = bracket(t)
                return min(r1, r2) <= zhi

            def high_ok(t):
                r1, r2 = bracket(t)
                return max(r1, r2) >= zlo

            ra = _monotone_range(low_ok, ta, tb)
            if ra is None:
                continue
            rb = _monotone_range(high_ok, ra[0], ra[1])
            if rb is not None:
                keep(*rb)
    if lo is None:
        return None
    return lo, hi


def _meets(r1, r2, zlo, zhi, znan):
    if r1 is None or r2 is None:
        if znan:
            return True
        if r1 is None and r2 is None:
            return False
        r = r2 if r1 is None else r1
        return zlo <= r <= zhi
    a, b = (r1, r2) if r1 <= r2 else (r2, r1)
    return a <= zhi and b >= zlo


def _fp_pieces(st: DomainStore, v: int):
    return pieces(st.fmts[v], st.lo[v], st.hi[v])


def project_forward_arith(c: K.TernArith, st: DomainStore):
    fmt = st.fmts[c.z]
    op = _binary(c, fmt)
    xs, ys = _fp_pieces(st, c.x), _fp_pieces(st, c.y)
    lo, hi, nan = image(op, xs, ys)
    x_any = bool(xs) or st.nan[c.x]
    y_any = bool(ys) or st.nan[c.y]
    nan = nan or ((st.nan[c.x] or st.nan[c.y]) and x_any and y_any)
    st.narrow(c.z, lo, hi, nan)


def project_inverse_arith(c: K.TernArith, st: DomainStore):
    fmt = st.fmts[c.z]
    op = _binary(c, fmt)
    zlo, zhi, znan = st.lo[c.z], st.hi[c.z], st.nan[c.z]
    m = fmt.max_ordinal
    if znan and zlo <= -m - 1 and zhi >= m:
        return
    for t, s, op2 in ((c.x, c.y, op), (c.y, c.x, lambda a, b: op(b, a))):
        if st.nan[s] and znan:
            continue
        r = preimage(op2, _fp_pieces(st, t), _fp_pieces(st, s), zlo, zhi, znan)
        # a NaN operand produces NaN whatever the other one is
        tnan = znan
        if r is None:
            st.narrow(t, 1, 0, tnan)
        else:
            st.narrow(t, r[0], r[1], tnan)


def project_arith(c: K.TernArith, st: DomainStore):
    project_forward_arith(c, st)
    project_inverse_arith(c, st)


def project_square(c: K.Square, st: DomainStore):
    fmt = st.fmts[c.z]
    mode = c.mode
    sq = _ordinal_op(fmt, lambda a, b: fp_mul(fmt, mode, a, a))
    xs = _fp_pieces(st, c.x)
    lo, hi, nan = None, None, st.nan[c.x]
    for a, b in xs:
        for t in (a, b):
            r = sq(t, t)
            if r is None:
                nan = True
            else:
                lo = r if lo is None or r < lo else lo
                hi = r if hi is None or r > hi else hi
    if lo is None:
        st.narrow(c.z, 1, 0, nan)
    else:
        st.narrow(c.z, lo, hi, nan)
    zlo, zhi, znan = st.lo[c.z], st.hi[c.z], st.nan[c.z]
    r = preimage(sq, _fp_pieces(st, c.x), [(0, 0)], zlo, zhi, znan)
    if r is None:
        st.narrow(c.x, 1, 0, znan)
    else:
        st.narrow(c.x, r[0], r[1], znan)


# -- unary and min/max ------------------------------------------------------------


def _neg_interval(lo: int, hi: int):
    return -hi - 1, -lo - 1


def project_unary(c: K.Unary, st: DomainStore):
    x, z = c.x, c.z
    if c.op == "neg":
        lo, hi = _neg_interval(st.lo[x], st.hi[x])
        st.narrow(z, lo, hi, st.nan[x])
        lo, hi = _neg_interval(st.lo[z], st.hi[z])
        st.narrow(x, lo, hi, st.nan[z])
        return
    # abs: fold the negative half onto the positive one
    lo, hi = st.lo[x], st.hi[x]
    if lo > hi:
        st.narrow(z, 1, 0, st.nan[x])
    elif lo >= 0:
        st.narrow(z, lo, hi, st.nan[x])
    elif hi < 0:
        st.narrow(z, -hi - 1, -lo - 1, st.nan[x])
    else:
        st.narrow(z, 0, max(hi, -lo - 1), st.nan[x])
    zlo, zhi = max(st.lo[z], 0), st.hi[z]
    if zlo > zhi:
        st.narrow(x, 1, 0, st.nan[z])
    else:
        st.narrow(x, -zhi - 1, zhi, st.nan[z])
        # x outside (-zlo, zlo) only when zlo > 0
        if zlo > 0:
            if st.lo[x] > -zlo - 1:
                st.narrow(x, zlo, zhi, st.nan[z])
            elif st.hi[x] < zlo:
                st.narrow(x, -zhi - 1, -zlo - 1, st.nan[z])


def _min_forward(xl, xh, xn, yl, yh, yn):
    lo = hi = None
    parts = []
    if xl <= xh and yl <= yh:
        parts.append((min(xl, yl), min(xh, yh)))
    if xn and yl <= yh:
        parts.append((yl, yh))
    if yn and xl <= xh:
        parts.append((xl, xh))
    for a, b in parts:
        lo = a if lo is None or a < lo else lo
        hi = b if hi is None or b > hi else hi
    if lo is None:
        return 1, 0, xn and yn
    return lo, hi, xn and yn


def _min_inverse(xl, xh, xn, yl, yh, yn, zl, zh, zn):
    """New bounds for x under z = min(x, y)."""
    z_num = zl <= zh
    y_num = yl <= yh
    if not z_num:
        # z is NaN only: both operands NaN
        return 1, 0, True
    lo = zl
    # x above zh is fine only if y can supply the minimum
    hi = xh if (y_num and yl <= zh) else zh
    # x NaN: z = y, so y must meet D(z) (or both NaN with z NaN)
    nan = (y_num and yl <= zh and yh >= zl) or (yn and zn)
    return lo, hi, nan


def project_minmax(c: K.MinMax, st: DomainStore):
    x, y, z = c.x, c.y, c.z
    if c.op == "min":
        get = lambda v: (st.lo[v], st.hi[v], st.nan[v])
        put = lambda v, lo, hi, nan: st.narrow(v, lo, hi, nan)
    else:
        # max(x, y) = -min(-x, -y) in ordinal terms
        def get(v):
            lo, hi = _neg_interval(st.lo[v], st.hi[v])
            return lo, hi, st.nan[v]

        def put(v, lo, hi, nan):
            if lo > hi:
                return st.narrow(v, 1, 0, nan)
            lo, hi = _neg_interval(lo, hi)
            return st.narrow(v, lo, hi, nan)

    put(z, *_min_forward(*get(x), *get(y)))
    put(x, *_min_inverse(*get(x), *get(y), *get(z)))
    put(y, *_min_inverse(*get(y), *get(x), *get(z)))


# -- comparisons ----------------------------------------------------------------


def _rel_status(st: DomainStore, rel: str, x: int, y: int):
    """True / False when ``x rel y`` is entailed / refuted, else None."""
    xl, xh, xn = st.lo[x], st.hi[x], st.nan[x]
    yl, yh, yn = st.lo[y], st.hi[y], st.nan[y]
    xnum, ynum = xl <= xh, yl <= yh
    if x == y:
        if rel in ("lt", "ne"):
            return False
        if rel == "id":
            return True
        if not xn:
            return True
        return False if not xnum else None
    if rel in ("id", "ne"):
        r = _id_status(xl, xh, xn, yl, yh, yn)
        return r if rel == "id" or r is None else not r
    # IEEE relations are false on NaN
    if not xnum or not ynum:
        return False
    kxl, kxh, kyl, kyh = real_lo(xl), real_lo(xh), real_lo(yl), real_lo(yh)
    if rel == "lt":
        if kxl >= kyh:
            return False
        if kxh < kyl and not (xn or yn):
            return True
    elif rel == "le":
        if kxl > kyh:
            return False
        if kxh <= kyl and not (xn or yn):
            return True
    else:  # eq
        if kxl > kyh or kyl > kxh:
            return False
        if kxl == kxh == kyl == kyh and not (xn or yn):
            return True
    return None


def _id_status(xl, xh, xn, yl, yh, yn):
    xnum, ynum = xl <= xh, yl <= yh
    if not xnum and not ynum:
        return True if (xn and yn) else None
    if xnum and ynum and xl == xh == yl == yh and not xn and not yn:
        return True
    overlap = xnum and ynum and xl <= yh and yl <= xh
    if not overlap and not (xn and yn):
        return False
    return None


def _enforce(st: DomainStore, rel: str, x: int, y: int):
    if x == y:
        if rel in ("lt", "ne"):
            raise Inconsistent(x)
        if rel in ("le", "eq"):
            st.narrow(x, st.lo[x], st.hi[x], False)
        return
    if rel == "lt":
        st.narrow(x, st.lo[x], below(st.hi[y]), False)
        st.narrow(y, above(st.lo[x]), st.hi[y], False)
    elif rel == "le":
        st.narrow(x, st.lo[x], le_upper(st.hi[y]), False)
        st.narrow(y, ge_lower(st.lo[x]), st.hi[y], False)
    elif rel == "eq":
        st.narrow(x, ge_lower(st.lo[y]), le_upper(st.hi[y]), False)
        st.narrow(y, ge_lower(st.lo[x]), le_upper(st.hi[x]), False)
    elif rel == "id":
        st.narrow(x, st.lo[y], st.hi[y], st.nan[y])
        st.narrow(y, st.lo[x], st.hi[x], st.nan[x])
    elif rel == "ne":
        _enforce_ne(st, x, y)
        _enforce_ne(st, y, x)
    else:
        raise ValueError(rel)


def _enforce_ne(st: DomainStore, x: int, y: int):
    """Remove y's value from x's bounds when y is instantiated."""
    yl, yh, yn = st.lo[y], st.hi[y], st.nan[y]
    if yl > yh:
        if yn:
            st.narrow(x, st.lo[x], st.hi[x], False)
        return
    if yn or yl != yh:
        return
    if st.lo[x] == yl:
        st.narrow(x, yl + 1, st.hi[x])
    if st.hi[x] == yl:
        st.narrow(x, st.lo[x], yl - 1)


def _enforce_not(st: DomainStore, rel: str, x: int, y: int):
    """Enforce the negation of ``x rel y``."""
    if rel == "id":
        return _enforce(st, "ne", x, y)
    if rel == "ne":
        return _enforce(st, "id", x, y)
    if x == y:
        if rel == "lt":
            return
        # not (x <= x) / not (x == x): only NaN
        st.narrow(x, 1, 0, True)
        return
    if st.nan[x] or st.nan[y]:
        return
    if rel == "lt":
        _enforce(st, "le", y, x)
    elif rel == "le":
        _enforce(st, "lt", y, x)
    else:
        _enforce_neq_real(st, x, y)
        _enforce_neq_real(st, y, x)


def _enforce_neq_real(st: DomainStore, x: int, y: int):
    yl, yh = st.lo[y], st.hi[y]
    if yl > yh or real_lo(yl) != real_lo(yh):
        return
    k = real_lo(yl)
    lo, hi = st.lo[x], st.hi[x]
    if lo <= hi and real_lo(lo) == k:
        lo = above(lo)
    if lo <= hi and real_lo(hi) == k:
        hi = below(hi)
    st.narrow(x, lo, hi, st.nan[x])


def project_cmp(c, st: DomainStore):
    if isinstance(c, K.Cmp):
        _enforce(st, c.rel, c.x, c.y)
        return
    b = c.b
    if st.lo[b] == st.hi[b]:
        if st.lo[b]:
            _enforce(st, c.rel, c.x, c.y)
        else:
            _enforce_not(st, c.rel, c.x, c.y)
        return
    s = _rel_status(st, c.rel, c.x, c.y)
    if s is not None:
        st.fix_bool(b, s)
        project_cmp(c, st)


# -- Boolean skeleton ------------------------------------------------------------


def _lit_value(st: DomainStore, lit):
    v, pos = lit
    if st.lo[v] != st.hi[v]:
        return None
    return bool(st.lo[v]) == pos


def _set_lit(st: DomainStore, lit, value: bool):
    v, pos = lit
    st.fix_bool(v, value == pos)


def project_clause(c: K.BoolClause, st: DomainStore):
    free = None
    nfree = 0
    for lit in c.lits:
        val = _lit_value(st, lit)
        if val is True:
            return
        if val is None:
            nfree += 1
            free = lit
            if nfree > 1:
                return
    if nfree == 0:
        raise Inconsistent(c)
    _set_lit(st, free, True)


def project_gate(c: K.BoolGate, st: DomainStore):
    bl = (c.b, True)
    b = _lit_value(st, bl)
    vals = [_lit_value(st, l) for l in c.lits]
    if c.op in ("and", "or"):
        unit = c.op == "or"  # the value that decides the gate
        if unit in vals:
            _set_lit(st, bl, unit)
            return
        if all(v is not None for v in vals):
            _set_lit(st, bl, not unit)
            return
        if b is None:
            return
        if b != unit:
            for l in c.lits:
                _set_lit(st, l, not unit)
            return
        free = [l for l, v in zip(c.lits, vals) if v is None]
        if len(free) == 1:
            _set_lit(st, free[0], unit)
        return
    if c.op == "iff":
        known = [(l, v) for l, v in zip((bl,) + c.lits, [b] + vals) if v is not None]
        if len(known) < 2:
            return
        p, q = c.lits
        if b is None:
            _set_lit(st, bl, vals[0] == vals[1])
        elif vals[0] is None:
            _set_lit(st, p, vals[1] == b)
        elif vals[1] is None:
            _set_lit(st, q, vals[0] == b)
        elif (vals[0] == vals[1]) != b:
            raise Inconsistent(c)
        return
    # ite
    cond, then, other = c.lits
    vc, vt, ve = vals
    if vc is not None:
        chosen = then if vc else other
        vch = vt if vc else ve
        if vch is not None:
            _set_lit(st, bl, vch)
        elif b is not None:
            _set_lit(st, chosen, b)
        return
    if vt is not None and vt == ve:
        _set_lit(st, bl, vt)
        return
    if b is not None:
        if vt is not None and vt != b:
            _set_lit(st, cond, False)
        elif ve is not None and ve != b:
            _set_lit(st, cond, True)


def project_ite(c: K.IteFp, st: DomainStore):
    b, z, x, y = c.b, c.z, c.x, c.y
    if st.lo[b] == st.hi[b]:
        src = x if st.lo[b] else y
        _enforce(st, "id", z, src)
        return
    zx = _id_status(st.lo[z], st.hi[z], st.nan[z], st.lo[x], st.hi[x], st.nan[x])
    zy = _id_status(st.lo[z], st.hi[z], st.nan[z], st.lo[y], st.hi[y], st.nan[y])
    if zx is False:
        st.fix_bool(b, False)
        return project_ite(c, st)
    if zy is False:
        st.fix_bool(b, True)
        return project_ite(c, st)
    xl, xh, yl, yh = st.lo[x], st.hi[x], st.lo[y], st.hi[y]
    if xl > xh:
        lo, hi = yl, yh
    elif yl > yh:
        lo, hi = xl, xh
    else:
        lo, hi = min(xl, yl), max(xh, yh)
    st.narrow(z, lo, hi, st.nan[x] or st.nan[y])


def project_pred(c: K.Pred, st: DomainStore):
    b, x = c.b, c.x
    fmt = st.fmts[x]
    m = fmt.max_ordinal
    lo, hi, nan = st.lo[x], st.hi[x], st.nan[x]
    if st.lo[b] != st.hi[b]:
        num = lo <= hi
        if c.p == "isNaN":
            s = True if not num else (False if not nan else None)
        elif c.p == "isInf":
            inf_only = num and (lo == hi == m or lo == hi == -m - 1)
            has_inf = num and (lo == -m - 1 or hi == m)
            s = True if (inf_only and not nan) else (False if not has_inf else None)
        else:
            zero_only = num and lo >= -1 and hi <= 0
            has_zero = num and lo <= 0 and hi >= -1
            s = True if (zero_only and not nan) else (False if not has_zero else None)
        if s is not None:
            st.fix_bool(b, s)
        return
    want = bool(st.lo[b])
    if c.p == "isNaN":
        if want:
            st.narrow(x, 1, 0, True)
        else:
            st.narrow(x, lo, hi, False)
    elif c.p == "isInf":
        if want:
            if lo > -m - 1:
                lo = m
            if hi < m:
                hi = -m - 1
            st.narrow(x, lo, hi, False)
        else:
            st.narrow(x, max(lo, -m), min(hi, m - 1), nan)
    else:
        if want:
            st.narrow(x, -1, 0, False)
        else:
            if lo in (-1, 0):
                lo = 1
            if hi in (-1, 0):
                hi = -2
            st.narrow(x, lo, hi, nan)


# -- dispatch -------------------------------------------------------------------

_PROJECTORS = {
    K.TernArith: project_arith,
    K.Square: project_square,
    K.Unary: project_unary,
    K.MinMax: project_minmax,
    K.Cmp: project_cmp,
    K.ReifCmp: project_cmp,
    K.BoolClause: project_clause,
    K.BoolGate: project_gate,
    K.IteFp: project_ite,
    K.Pred: project_pred,
}


def project(c, st: DomainStore):
    """Apply the projection functions of ``c`` once."""
    _PROJECTORS[type(c)](c, st)


def project_bool(c, st: DomainStore):
    project(c, st)


@dataclass
class PropagationStats:
    revisions: int = 0
    prunes: int = 0
    failures: int = 0
    budget_exhausted: int = 0


class Propagator:
    """AC-style agenda over the constraints of a concrete model."""

    def __init__(self, constraints, store: DomainStore, budget_factor: Optional[int] = 100):
        self.constraints = list(constraints)
        self.store = store
        self.watch: List[List[int]] = [[] for _ in range(len(store))]
        for i, c in enumerate(self.constraints):
            for v in dict.fromkeys(c.scope):
                self.watch[v].append(i)
        self.queue: deque = deque()
        self.queued = [False] * len(self.constraints)
        self.budget = None if budget_factor is None else budget_factor * max(1, len(self.constraints))
        self.stats = PropagationStats()

    def enqueue(self, i: int):
        if not self.queued[i]:
            self.queued[i] = True
            self.queue.append(i)

    def enqueue_var(self, v: int, skip: int = -1):
        for i in self.watch[v]:
            if i != skip:
                self.enqueue(i)

    def clear(self):
        for i in self.queue:
            self.queued[i] = False
        self.queue.clear()
        self.store.changed.clear()

    def fixpoint(self, seed=None, budget: Optional[int] = -1) -> bool:
        """Propagate until stable (True) or a domain empties (False).

        ``seed`` lists constraint ids to start from; by default every
        constraint, plus those watching variables changed since the last call.
        """
        st = self.store
        if seed is None and not st.changed:
            seed = range(len(self.constraints))
        for i in seed or ():
            self.enqueue(i)
        for v in st.changed:
            self.enqueue_var(v)
        st.changed.clear()
        limit = self.budget if budget == -1 else budget
        steps = 0
        cons = self.constraints
        stats = self.stats
        p0 = st.prunes
        try:
            while self.queue:
                if limit is not None and steps >= limit:
                    stats.budget_exhausted += 1
                    self.clear()
                    return True
                i = self.queue.popleft()
                self.queued[i] = False
                steps += 1
                c = cons[i]
                _PROJECTORS[type(c)](c, st)
                if st.changed:
                    for v in st.changed:
                        self.enqueue_var(v)
                    st.changed.clear()
                    # a projection may not be idempotent; revisit it
                    self.enqueue(i)
        except Inconsistent:
            stats.failures += 1
            self.clear()
            return False
        finally:
            stats.revisions += steps
            stats.prunes += st.prunes - p0
        return True


def fixpoint(store: DomainStore, constraints, queue=None, budget_factor: Optional[int] = 100) -> bool:
    """One-shot fixpoint over ``constraints`` starting from ``queue`` (all
    constraints by default)."""
    return Propagator(constraints, store, budget_factor).fixpoint(queue)
