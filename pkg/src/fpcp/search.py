"""Depth-first search over a concrete model.

Variables are chosen by maximal density among the eligible decision
variables, domains are split five ways around ``middle``, and a variable
branched at depth ``d`` is not eligible again before depth ``d + u``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from . import constraints as K
from .domain import middle_ordinal
from .fp import FpFormat
from .propagation import DomainStore, Propagator

log = logging.getLogger(__name__)

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@lru_cache(maxsize=1 << 16)
def _value(fmt: FpFormat, o: int) -> Optional[Fraction]:
    return fmt.value_fraction(o)


@lru_cache(maxsize=None)
def _w_max(fmt: FpFormat) -> Fraction:
    return 2 * fmt.value_fraction(fmt.max_ordinal - 1)


def density_of(fmt: FpFormat, lo: int, hi: int, nan: bool) -> float:
    """Cardinality over width; +inf for bound domains."""
    card = max(0, hi - lo + 1) + nan
    if card <= 1:
        return float("inf")
    if lo > hi:
        return float("inf")
    a, b = _value(fmt, lo), _value(fmt, hi)
    w = _w_max(fmt) if a is None or b is None else b - a
    if w == 0:
        return float("inf")
    try:
        return float(card / w)
    except OverflowError:
        return 1.7976931348623157e308


@dataclass
class DiversificationState:
    u: int
    last: Dict[int, int] = field(default_factory=dict)

    @classmethod
    def clamped(cls, u: int, n_decision: int) -> "DiversificationState":
        return cls(max(0, min(u, n_decision)))

    def allowed(self, x: int, depth: int) -> bool:
        return self.last.get(x, 0) <= depth


def record_prohibition(x: int, depth: int, div: DiversificationState) -> None:
    div.last[x] = depth + div.u


def eligible_set(store: DomainStore, decision: Sequence[int], aux: Sequence[int],
                 div: DiversificationState, depth: int) -> List[int]:
    """Unbound FP decision variables allowed at ``depth``; falls back to all
    unbound FP decision variables, then to unbound FP auxiliaries."""
    free = [v for v in decision if not store.is_bound(v)]
    allowed = [v for v in free if div.allowed(v, depth)]
    if allowed:
        return allowed
    if free:
        return free
    return [v for v in aux if not store.is_bound(v)]


def select_variable(eligible: Sequence[int], store: DomainStore) -> int:
    """Densest eligible variable, ties to the smallest index."""
    best, best_d = None, None
    for v in sorted(eligible):
        d = density_of(store.fmts[v], store.lo[v], store.hi[v], store.nan[v])
        if best is None or d > best_d:
            best, best_d = v, d
    return best


def split_domain(fmt: FpFormat, lo: int, hi: int, nan: bool):
    """Five-way split ``[L], [U], [M], [L+..M-], [M+..U-]`` followed by a NaN
    branch; empty parts are skipped.  Branches are (lo, hi, nan) triples."""
    out = []
    if lo <= hi:
        out.append((lo, lo, False))
        if hi > lo:
            out.append((hi, hi, False))
        if hi - lo >= 2:
            m = middle_ordinal(fmt, lo, hi)
            out.append((m, m, False))
            if m - 1 >= lo + 1:
                out.append((lo + 1, m - 1, False))
            if hi - 1 >= m + 1:
                out.append((m + 1, hi - 1, False))
    if nan:
        out.append((1, 0, True))
    return out


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    max_depth: int = 0
    leaves_rejected: int = 0


@dataclass
class SearchResult:
    verdict: str
    assignment: Optional[Dict[int, object]] = None
    stats: SearchStats = field(default_factory=SearchStats)
    reason: str = ""


class Search:
    def __init__(self, m2, u: int = 5, deadline: Optional[float] = None,
                 node_limit: Optional[int] = None, budget_factor: Optional[int] = 100,
                 validator: Optional[Callable[[Dict[int, object]], None]] = None):
        self.m2 = m2
        self.store = DomainStore.from_model(m2)
        self.prop = Propagator(m2.constraints, self.store, budget_factor)
        kinds = m2.kinds
        fp = [s.is_fp for s in m2.sorts]
        n = len(kinds)
        self.decision_fp = [v for v in range(n) if kinds[v] == "decision" and fp[v]]
        self.aux_fp = [v for v in range(n) if kinds[v] != "decision" and fp[v]]
        self.bools = ([v for v in range(n) if kinds[v] == "decision" and not fp[v]]
                      + [v for v in range(n) if kinds[v] != "decision" and not fp[v]])
        n_decision = sum(1 for k in kinds if k == "decision")
        self.div = DiversificationState.clamped(u, n_decision)
        self.deadline = deadline
        self.node_limit = node_limit
        self.validator = validator
        self.stats = SearchStats()

    def choose(self, depth: int):
        st = self.store
        elig = eligible_set(st, self.decision_fp, self.aux_fp, self.div, depth)
        if elig:
            v = select_variable(elig, st)
            if v in self.decision_fp:
                record_prohibition(v, depth, self.div)
            return v, split_domain(st.fmts[v], st.lo[v], st.hi[v], st.nan[v])
        for v in self.bools:
            if not st.is_bound(v):
                return v, [(0, 0, False), (1, 1, False)]
        return None, None

    def leaf_ok(self) -> bool:
        st = self.store
        val = {v: st.value(v) for v in range(len(st))}
        fmt_of = self.m2.fmt_of
        if not all(K.holds(c, val, fmt_of) for c in self.m2.constraints):
            self.stats.leaves_rejected += 1
            return False
        if self.validator is not None:
            self.validator(val)
        self._solution = val
        return True

    def out_of_time(self) -> bool:
        if self.deadline is not None and time.monotonic() >= self.deadline:
            return True
        return self.node_limit is not None and self.stats.nodes >= self.node_limit

    def run(self) -> SearchResult:
        st, prop, stats = self.store, self.prop, self.stats
        stats.nodes = 1
        if not prop.fixpoint():
            return SearchResult(UNSAT, stats=stats)
        stack: list = []  # frames: [var, branches, next index, pushed]
        descend = True
        while True:
            if descend:
                if self.out_of_time():
                    return SearchResult(UNKNOWN, stats=stats, reason="timeout")
                depth = len(stack)
                v, branches = self.choose(depth)
                if v is None:
                    if self.leaf_ok():
                        return SearchResult(SAT, self._solution, stats)
                else:
                    stack.append([v, branches, 0, False])
            descend = False
            if not stack:
                return SearchResult(UNSAT, stats=stats)
            frame = stack[-1]
            if frame[3]:
                st.pop()
                frame[3] = False
            if frame[2] == len(frame[1]):
                stack.pop()
                continue
            lo, hi, nan = frame[1][frame[2]]
            frame[2] += 1
            st.push()
            frame[3] = True
            st.set_domain(frame[0], lo, hi, nan)
            stats.nodes += 1
            if len(stack) > stats.max_depth:
                stats.max_depth = len(stack)
            if prop.fixpoint():
                descend = True
            else:
                stats.backtracks += 1
                if self.node_limit is not None and stats.nodes >= self.node_limit:
                    return SearchResult(UNKNOWN, stats=stats, reason="node limit")
                if self.deadline is not None and time.monotonic() >= self.deadline:
                    return SearchResult(UNKNOWN, stats=stats, reason="timeout")


def solve(m2, x1: Optional[Sequence[int]] = None, u: int = 5, deadline: Optional[float] = None,
          node_limit: Optional[int] = None, budget_factor: Optional[int] = 100,
          validator=None) -> SearchResult:
    """Search ``m2`` branching on its decision variables (``x1``, defaults
    to the variables marked as decision in ``m2``)."""
    if x1 is not None:
        keep = set(x1)
        m2.kinds[:] = ["decision" if v in keep else ("cse" if k == "decision" else k)
                       for v, k in enumerate(m2.kinds)]
    return Search(m2, u, deadline, node_limit, budget_factor, validator).run()
