"""Elementary constraints of the concrete model and their exact semantics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Tuple

from .fp import ARITH, FpFormat, fp_abs, fp_eq, fp_leq, fp_lt, fp_max, fp_min, fp_neg, same_value

Lit = Tuple[int, bool]  # (bool var id, polarity)

# Comparison relations.  ``eq``/``lt``/``le`` follow IEEE (NaN unordered,
# zeros equal); ``id`` is SMT-LIB ``=`` on floats and ``ne`` its negation.
RELATIONS = ("eq", "lt", "le", "id", "ne")


@dataclass(frozen=True)
class TernArith:
    op: str
    mode: str
    z: int
    x: int
    y: int

    @property
    def scope(self):
        return (self.z, self.x, self.y)


@dataclass(frozen=True)
class Square:
    mode: str
    z: int
    x: int

    @property
    def scope(self):
        return (self.z, self.x)


@dataclass(frozen=True)
class Unary:
    op: str  # neg | abs
    z: int
    x: int

    @property
    def scope(self):
        return (self.z, self.x)


@dataclass(frozen=True)
class MinMax:
    op: str  # min | max
    z: int
    x: int
    y: int

    @property
    def scope(self):
        return (self.z, self.x, self.y)


@dataclass(frozen=True)
class Cmp:
    rel: str
    x: int
    y: int

    @property
    def scope(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class ReifCmp:
    b: int
    rel: str
    x: int
    y: int

    @property
    def scope(self):
        return (self.b, self.x, self.y)


@dataclass(frozen=True)
class BoolClause:
    lits: Tuple[Lit, ...]

    @property
    def scope(self):
        return tuple(v for v, _ in self.lits)


@dataclass(frozen=True)
class BoolGate:
    """``b <=> op(lits)`` for op in and/or/iff/ite (ite takes cond, then, else)."""

    op: str
    b: int
    lits: Tuple[Lit, ...]

    @property
    def scope(self):
        return (self.b,) + tuple(v for v, _ in self.lits)


@dataclass(frozen=True)
class IteFp:
    b: int
    z: int
    x: int
    y: int

    @property
    def scope(self):
        return (self.b, self.z, self.x, self.y)


@dataclass(frozen=True)
class Pred:
    p: str  # isNaN | isInf | isZero
    b: int
    x: int

    @property
    def scope(self):
        return (self.b, self.x)


ElemConstraint = (TernArith, Square, Unary, MinMax, Cmp, ReifCmp, BoolClause, BoolGate, IteFp, Pred)

# variable defined by a constraint, if it has a defining form
def defined_var(c) -> int | None:
    if isinstance(c, (TernArith, Square, Unary, MinMax, IteFp)):
        return c.z
    if isinstance(c, (ReifCmp, BoolGate, Pred)):
        return c.b
    return None


def relation_holds(rel: str, fmt: FpFormat, a: int, b: int) -> bool:
    if rel == "eq":
        return fp_eq(fmt, a, b)
    if rel == "lt":
        return fp_lt(fmt, a, b)
    if rel == "le":
        return fp_leq(fmt, a, b)
    if rel == "id":
        return same_value(fmt, a, b)
    if rel == "ne":
        return not same_value(fmt, a, b)
    raise ValueError(rel)


def _lit(val, lit: Lit) -> bool:
    v, pos = lit
    return bool(val[v]) == pos


def evaluate_defined(c, val: Mapping[int, object], fmt_of: Callable[[int], FpFormat]):
    """Value of the variable a defining constraint determines."""
    if isinstance(c, TernArith):
        return ARITH[c.op](fmt_of(c.z), c.mode, val[c.x], val[c.y])
    if isinstance(c, Square):
        return ARITH["mul"](fmt_of(c.z), c.mode, val[c.x], val[c.x])
    if isinstance(c, Unary):
        return (fp_neg if c.op == "neg" else fp_abs)(fmt_of(c.z), val[c.x])
    if isinstance(c, MinMax):
        return (fp_min if c.op == "min" else fp_max)(fmt_of(c.z), val[c.x], val[c.y])
    if isinstance(c, IteFp):
        return val[c.x] if val[c.b] else val[c.y]
    if isinstance(c, ReifCmp):
        return relation_holds(c.rel, fmt_of(c.x), val[c.x], val[c.y])
    if isinstance(c, Pred):
        fmt = fmt_of(c.x)
        bits = val[c.x]
        if c.p == "isNaN":
            return fmt.is_nan_bits(bits)
        mag = bits & ~fmt.sign_mask
        if c.p == "isInf":
            return mag == fmt.exp_mask
        return mag == 0
    if isinstance(c, BoolGate):
        xs = [_lit(val, l) for l in c.lits]
        if c.op == "and":
            return all(xs)
        if c.op == "or":
            return any(xs)
        if c.op == "iff":
            return xs[0] == xs[1]
        if c.op == "ite":
            return xs[1] if xs[0] else xs[2]
        raise ValueError(c.op)
    raise TypeError(f"{type(c).__name__} has no defining form")


def holds(c, val: Mapping[int, object], fmt_of: Callable[[int], FpFormat]) -> bool:
    """Exact check of one constraint under a full assignment (FP vars map to
    bit patterns, Bool vars to bools)."""
    if isinstance(c, Cmp):
        return relation_holds(c.rel, fmt_of(c.x), val[c.x], val[c.y])
    if isinstance(c, BoolClause):
        return any(_lit(val, l) for l in c.lits)
    got = evaluate_defined(c, val, fmt_of)
    d = defined_var(c)
    if isinstance(got, bool):
        return bool(val[d]) == got
    fmt = fmt_of(d)
    return same_value(fmt, val[d], got)


def describe(c, names: Sequence[str]) -> str:
    n = names.__getitem__
    if isinstance(c, TernArith):
        sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[c.op]
        return f"{n(c.z)} = {n(c.x)} {sym}_{c.mode} {n(c.y)}"
    if isinstance(c, Square):
        return f"{n(c.z)} = {n(c.x)}^2_{c.mode}"
    if isinstance(c, Unary):
        return f"{n(c.z)} = {c.op}({n(c.x)})"
    if isinstance(c, MinMax):
        return f"{n(c.z)} = {c.op}({n(c.x)}, {n(c.y)})"
    if isinstance(c, Cmp):
        return f"{n(c.x)} {c.rel} {n(c.y)}"
    if isinstance(c, ReifCmp):
        return f"{n(c.b)} <=> {n(c.x)} {c.rel} {n(c.y)}"
    if isinstance(c, IteFp):
        return f"{n(c.z)} = ite({n(c.b)}, {n(c.x)}, {n(c.y)})"
    if isinstance(c, Pred):
        return f"{n(c.b)} <=> {c.p}({n(c.x)})"
    lits = ", ".join(("" if p else "!") + n(v) for v, p in c.lits)
    if isinstance(c, BoolGate):
        return f"{n(c.b)} <=> {c.op}({lits})"
    return f"clause({lits})"
