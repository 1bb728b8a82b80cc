"""Sorts, hash-consed term DAGs and the operator signature table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import ArityError, SortError, UnsupportedOperator
from .fp import FpFormat, FpValue


@dataclass(frozen=True)
class Sort:
    kind: str  # "Bool" | "RoundingMode" | "FloatingPoint"
    ebits: int = 0
    sbits: int = 0

    @property
    def is_fp(self) -> bool:
        return self.kind == "FloatingPoint"

    @property
    def fmt(self) -> FpFormat:
        return FpFormat(self.ebits, self.sbits)

    def __str__(self):
        if self.is_fp:
            return f"(_ FloatingPoint {self.ebits} {self.sbits})"
        return self.kind


BOOL = Sort("Bool")
RM = Sort("RoundingMode")


def fp_sort(ebits: int, sbits: int) -> Sort:
    if ebits < 2 or sbits < 2:
        raise SortError(f"FloatingPoint sort needs ebits >= 2 and sbits >= 2, got {ebits} {sbits}")
    return Sort("FloatingPoint", ebits, sbits)


def sort_of_format(fmt: FpFormat) -> Sort:
    return Sort("FloatingPoint", fmt.ebits, fmt.sbits)


VAR, FP_LIT, BOOL_LIT, RM_LIT, APP = "var", "fp", "bool", "rm", "app"


class Term:
    """A DAG node.  Nodes are created only through a :class:`TermTable`, so
    structurally equal nodes from one table are the same object."""

    __slots__ = ("id", "kind", "op", "args", "sort", "value")

    def __init__(self, id, kind, op, args, sort, value):
        self.id = id
        self.kind = kind
        self.op = op
        self.args = args
        self.sort = sort
        # var: name; fp literal: FpValue; bool literal: bool; rm literal: mode
        self.value = value

    @property
    def name(self) -> str:
        return self.value

    @property
    def is_leaf(self) -> bool:
        return self.kind != APP

    def __repr__(self):
        return f"Term#{self.id}<{to_smtlib(self)}>"


ARITH_OPS = {"fp.add": "add", "fp.sub": "sub", "fp.mul": "mul", "fp.div": "div"}
UNARY_FP_OPS = {"fp.neg": "neg", "fp.abs": "abs"}
MINMAX_OPS = {"fp.min": "min", "fp.max": "max"}
CMP_OPS = {"fp.eq", "fp.lt", "fp.leq", "fp.gt", "fp.geq"}
PRED_OPS = {"fp.isNaN": "isNaN", "fp.isInfinite": "isInf", "fp.isZero": "isZero"}
BOOL_OPS = {"and", "or", "not", "=>"}
SUPPORTED_OPS = (
    set(ARITH_OPS) | set(UNARY_FP_OPS) | set(MINMAX_OPS) | CMP_OPS | set(PRED_OPS)
    | BOOL_OPS | {"=", "distinct", "ite"}
)


def result_sort(op: str, sorts: Sequence[Sort]) -> Sort:
    """Check an application against its signature and return its sort."""
    n = len(sorts)

    def need(k):
        if n != k:
            raise ArityError(f"{op} expects {k} arguments, got {n}")

    def same_fp(ss):
        if not all(s.is_fp for s in ss):
            raise SortError(f"{op} expects FloatingPoint arguments, got {' '.join(map(str, ss))}")
        if any(s != ss[0] for s in ss):
            raise SortError(f"{op} arguments have different formats")
        return ss[0]

    if op in ARITH_OPS:
        need(3)
        if sorts[0] != RM:
            raise SortError(f"{op} expects a RoundingMode first, got {sorts[0]}")
        return same_fp(sorts[1:])
    if op in UNARY_FP_OPS:
        need(1)
        return same_fp(sorts)
    if op in MINMAX_OPS:
        need(2)
        return same_fp(sorts)
    if op in CMP_OPS:
        need(2)
        same_fp(sorts)
        return BOOL
    if op in PRED_OPS:
        need(1)
        same_fp(sorts)
        return BOOL
    if op == "not":
        need(1)
    if op in BOOL_OPS:
        if n < 1 or (op == "=>" and n != 2):
            raise ArityError(f"bad arity {n} for {op}")
        if any(s != BOOL for s in sorts):
            raise SortError(f"{op} expects Bool arguments")
        return BOOL
    if op in ("=", "distinct"):
        need(2)
        if sorts[0] != sorts[1]:
            raise SortError(f"{op} arguments have different sorts {sorts[0]} and {sorts[1]}")
        if sorts[0] == RM:
            raise SortError(f"{op} over RoundingMode is not supported")
        return BOOL
    if op == "ite":
        need(3)
        if sorts[0] != BOOL:
            raise SortError("ite condition must be Bool")
        if sorts[1] != sorts[2]:
            raise SortError("ite branches have different sorts")
        if sorts[1] == RM:
            raise SortError("ite over RoundingMode is not supported")
        return sorts[1]
    raise UnsupportedOperator(f"unsupported operator {op}")


class TermTable:
    """Hash-consing factory; one per parse session."""

    def __init__(self):
        self._index: Dict[tuple, Term] = {}
        self.nodes: List[Term] = []

    def _make(self, kind, op, args, sort, value) -> Term:
        key = (kind, op, tuple(a.id for a in args), sort, value)
        t = self._index.get(key)
        if t is None:
            t = Term(len(self.nodes), kind, op, tuple(args), sort, value)
            self._index[key] = t
            self.nodes.append(t)
        return t

    def var(self, name: str, sort: Sort) -> Term:
        return self._make(VAR, None, (), sort, name)

    def fp_const(self, v: FpValue) -> Term:
        return self._make(FP_LIT, None, (), sort_of_format(v.fmt), v)

    def bool_const(self, b: bool) -> Term:
        return self._make(BOOL_LIT, None, (), BOOL, bool(b))

    def rm_const(self, mode: str) -> Term:
        return self._make(RM_LIT, None, (), RM, mode)

    def app(self, op: str, args: Sequence[Term]) -> Term:
        sort = result_sort(op, [a.sort for a in args])
        return self._make(APP, op, tuple(args), sort, None)

    def import_term(self, t: Term, memo: Optional[dict] = None) -> Term:
        """Rebuild ``t`` (possibly from another table) inside this table."""
        memo = {} if memo is None else memo
        for node in postorder([t]):
            if id(node) in memo:
                continue
            if node.kind == APP:
                new = self.app(node.op, [memo[id(a)] for a in node.args])
            else:
                new = self._make(node.kind, None, (), node.sort, node.value)
            memo[id(node)] = new
        return memo[id(t)]


def postorder(roots: Iterable[Term]) -> Iterator[Term]:
    """Children before parents, each node once (iterative)."""
    seen = set()
    for root in roots:
        if root.id in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                if node.id not in seen:
                    seen.add(node.id)
                    yield node
                continue
            if node.id in seen:
                continue
            stack.append((node, True))
            for a in reversed(node.args):
                if a.id not in seen:
                    stack.append((a, False))


def free_vars(roots: Iterable[Term]) -> List[Term]:
    return [t for t in postorder(roots) if t.kind == VAR]


def term_size(t: Term) -> int:
    """Number of nodes of ``t`` viewed as a tree."""
    sizes: Dict[int, int] = {}
    for node in postorder([t]):
        sizes[node.id] = 1 + sum(sizes[a.id] for a in node.args)
    return sizes[t.id]


def structurally_equal(a: Term, b: Term) -> bool:
    """Tree equality that ignores node ids (usable across tables)."""
    memo: Dict[Tuple[int, int], bool] = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if (x.id, y.id) in memo:
            continue
        memo[(x.id, y.id)] = True
        if (x.kind, x.op, x.sort, len(x.args)) != (y.kind, y.op, y.sort, len(y.args)):
            return False
        if x.kind != APP and x.value != y.value:
            return False
        stack.extend(zip(x.args, y.args))
    return True


def audit_sorts(roots: Iterable[Term]) -> None:
    """Re-derive every application's sort; raises SortError on mismatch."""
    for node in postorder(roots):
        if node.kind == APP:
            s = result_sort(node.op, [a.sort for a in node.args])
            if s != node.sort:
                raise SortError(f"node {node.id} has sort {node.sort}, signature gives {s}")


def to_smtlib(t: Term) -> str:
    """Render a term as SMT-LIB text (tree form, shared nodes repeated)."""
    out: Dict[int, str] = {}
    for node in postorder([t]):
        if node.kind == VAR:
            s = quote_symbol(node.value)
        elif node.kind == FP_LIT:
            s = node.value.to_smtlib()
        elif node.kind == BOOL_LIT:
            s = "true" if node.value else "false"
        elif node.kind == RM_LIT:
            s = node.value
        else:
            s = "(" + node.op + " " + " ".join(out[a.id] for a in node.args) + ")"
        out[node.id] = s
    return out[t.id]


def quote_symbol(name: str) -> str:
    if name and all(c.isalnum() or c in "~!@$%^&*_-+=<>.?/" for c in name) and not name[0].isdigit():
        return name
    return f"|{name}|"
