"""Brute-force soundness checks for single projection applications.

A check takes one elementary constraint over distinct variable ids, a box of
domains, and compares the solutions inside the box (computed from the oracle
tables) with the domains left after one call to ``project``.  A violation is
a supported value that the projection removed.
"""

from __future__ import annotations

import random
from types import SimpleNamespace
from typing import List, Optional, Sequence

import numpy as np

from fpcp import constraints as K
from fpcp.fp import ROUNDING_MODES as MODES, FpFormat, fraction_to_bits
from fpcp.propagation import DomainStore, Inconsistent, project
from oracle import Grid, _defined_value, _holds, index_of_ordinal, n_values, nan_index

FMT = FpFormat(4, 4)
RELS = K.RELATIONS


def anchors(fmt: FpFormat) -> List[int]:
    """Ordinals at the piece boundaries plus a few interior points."""
    m = fmt.max_ordinal
    one = fmt.ordinal(fraction_to_bits(fmt, 1))
    three = fmt.ordinal(fraction_to_bits(fmt, 3))
    pts = {-m - 1, -m, -three - 1, -one - 1, -2, -1, 0, 1, one, three, m - 1, m}
    return sorted(pts)


def anchor_boxes(fmt: FpFormat):
    pts = anchors(fmt)
    out = [(1, 0, True)]
    for i, a in enumerate(pts):
        for b in pts[i:]:
            out.append((a, b, False))
            out.append((a, b, True))
    return out


def random_box(rng: random.Random, fmt: FpFormat):
    lo_all, hi_all = fmt.min_ordinal, fmt.max_ordinal
    r = rng.random()
    if r < 0.05:
        return (1, 0, True)
    a = rng.randint(lo_all, hi_all)
    if r < 0.4:
        b = min(hi_all, a + rng.randint(0, 4))
    else:
        b = rng.randint(lo_all, hi_all)
        a, b = min(a, b), max(a, b)
    return (a, b, rng.random() < 0.3)


BOOL_BOXES = [(0, 0, False), (1, 1, False), (0, 1, False)]


def _store(fmts: Sequence[Optional[FpFormat]], boxes) -> DomainStore:
    st = DomainStore([None] * len(fmts), [frozenset((False, True))] * len(fmts))
    st.fmts = list(fmts)
    for v, (lo, hi, nan) in enumerate(boxes):
        st.lo[v], st.hi[v], st.nan[v] = lo, hi, nan
    return st


def _values(fmt, box) -> np.ndarray:
    lo, hi, nan = box
    if fmt is None:
        return np.array([b for b in (False, True) if lo <= int(b) <= hi], dtype=bool)
    idx = list(range(index_of_ordinal(fmt, lo), index_of_ordinal(fmt, hi) + 1)) if lo <= hi else []
    if nan:
        idx.append(nan_index(fmt))
    return np.array(idx, dtype=np.int64)


def _inbox(fmt, box) -> np.ndarray:
    lo, hi, nan = box
    if fmt is None:
        return np.array([lo <= 0 <= hi, lo <= 1 <= hi])
    m = np.zeros(n_values(fmt), dtype=bool)
    if lo <= hi:
        m[index_of_ordinal(fmt, lo):index_of_ordinal(fmt, hi) + 1] = True
    m[nan_index(fmt)] = nan
    return m


def supports(c, fmts, boxes):
    """Per variable in the scope, the set of value indices (ints; bools as
    0/1) taking part in some solution inside the box."""
    scope = list(dict.fromkeys(c.scope))
    ns = SimpleNamespace(fmt_of=lambda v: fmts[v])
    d = K.defined_var(c)
    ins = [v for v in scope if v != d] if d is not None else scope
    vals = [_values(fmts[v], boxes[v]) for v in ins]
    if any(len(a) == 0 for a in vals):
        return {v: set() for v in scope}
    grid = Grid([str(v) for v in ins], vals)
    val = {v: grid.arrays[str(v)] for v in ins}
    if d is not None:
        got = grid.full(np.asarray(_defined_value(c, ns, val)))
        ok = _inbox(fmts[d], boxes[d])[got.astype(np.int64)]
    else:
        got = None
        ok = grid.full(np.asarray(_holds(c, ns, val)))
    out = {}
    for a, v in enumerate(ins):
        axes = tuple(i for i in range(len(ins)) if i != a)
        hit = ok.any(axis=axes) if axes else ok
        out[v] = {int(x) for x in vals[a][hit]}
    if d is not None:
        out[d] = {int(x) for x in np.unique(got[ok])}
    return out


def check(c, fmts, boxes) -> Optional[str]:
    """None when one projection keeps every solution, else a description."""
    sup = supports(c, fmts, boxes)
    st = _store(fmts, boxes)
    try:
        project(c, st)
    except Inconsistent:
        if any(sup.values()):
            return f"{c} {boxes}: inconsistent but solutions exist"
        return None
    for v, s in sup.items():
        box = (st.lo[v], st.hi[v], st.nan[v])
        keep = _inbox(fmts[v], box)
        lost = [x for x in s if not keep[x]]
        if lost:
            return f"{c} {boxes}: var {v} lost {lost[:5]} (now {box})"
        old = boxes[v]
        if fmts[v] is not None and not (_inbox(fmts[v], old) | ~keep).all():
            return f"{c} {boxes}: var {v} grew to {box}"
    return None


# -- constraint families ------------------------------------------------------

def families(fmt: FpFormat = FMT):
    """(label, constraint, formats) for every elementary kind over distinct ids."""
    F, B = fmt, None
    out = []
    for op in ("add", "sub", "mul", "div"):
        for mode in MODES:
            out.append((f"arith-{op}-{mode}", K.TernArith(op, mode, 0, 1, 2), [F, F, F]))
    for mode in MODES:
        out.append((f"square-{mode}", K.Square(mode, 0, 1), [F, F]))
    for op in ("neg", "abs"):
        out.append((f"unary-{op}", K.Unary(op, 0, 1), [F, F]))
    for op in ("min", "max"):
        out.append((f"minmax-{op}", K.MinMax(op, 0, 1, 2), [F, F, F]))
    for rel in RELS:
        out.append((f"cmp-{rel}", K.Cmp(rel, 0, 1), [F, F]))
        out.append((f"reif-{rel}", K.ReifCmp(2, rel, 0, 1), [F, F, B]))
    for p in ("isNaN", "isInf", "isZero"):
        out.append((f"pred-{p}", K.Pred(p, 1, 0), [F, B]))
    out.append(("ite", K.IteFp(3, 0, 1, 2), [F, F, F, B]))
    out.append(("clause", K.BoolClause(((0, True), (1, False), (2, True))), [B, B, B]))
    for op, n in (("and", 2), ("or", 3), ("iff", 2), ("ite", 3)):
        lits = tuple((i + 1, i % 2 == 0) for i in range(n))
        out.append((f"gate-{op}", K.BoolGate(op, 0, lits), [B] * (n + 1)))
    return out


def _all_boxes(fmts, fp_boxes):
    import itertools
    pools = [BOOL_BOXES if f is None else fp_boxes for f in fmts]
    return itertools.product(*pools)


def run(fmt: FpFormat = FMT, samples: int = 3000, seed: int = 0, labels=None) -> dict:
    """Check every family.  Families with at most two FP variables (and any
    Bool ones) run on every combination of anchor boxes; wider ones run on
    ``samples`` random combinations mixing anchor and random boxes.

    Returns {label: (checks, violations list)}."""
    fp_boxes = anchor_boxes(fmt)
    rng = random.Random(seed)
    report = {}
    for label, c, fmts in families(fmt):
        if labels is not None and label not in labels:
            continue
        bad, n = [], 0
        n_fp = sum(f is not None for f in fmts)
        if n_fp <= 2:
            combos = _all_boxes(fmts, fp_boxes)
        else:
            def sample():
                for _ in range(samples):
                    yield [rng.choice(BOOL_BOXES) if f is None else
                           (rng.choice(fp_boxes) if rng.random() < 0.5 else random_box(rng, fmt))
                           for f in fmts]
            combos = sample()
        for boxes in combos:
            n += 1
            msg = check(c, fmts, list(boxes))
            if msg:
                bad.append(msg)
        report[label] = (n, bad)
    return report
