"""Symbolic reconstruction of a parsed script.

Pipeline: ``inline_closure`` recovers the abstract model (macros expanded,
only declared variables left), ``factor_cse`` names repeated subterms,
``decompose`` lowers every assertion to elementary constraints and
``detect_ineq_cycle`` looks for contradictory cycles of comparisons.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from . import constraints as K
from .domain import FpDomain
from .errors import CyclicDefinition, UnsupportedOperator
from .fp import FpValue
from .frontend import ModelM0
from .terms import (
    APP,
    ARITH_OPS,
    BOOL,
    BOOL_LIT,
    FP_LIT,
    MINMAX_OPS,
    PRED_OPS,
    RM,
    RM_LIT,
    UNARY_FP_OPS,
    VAR,
    Sort,
    Term,
    TermTable,
    postorder,
    quote_symbol,
    term_size,
    to_smtlib,
)

log = logging.getLogger(__name__)

BOOL_DOMAIN = frozenset((False, True))

# above this tree size a constraint is decomposed as a DAG even without CSE
NAIVE_TREE_LIMIT = 200_000


def initial_domain(sort: Sort):
    return FpDomain.full(sort.fmt) if sort.is_fp else BOOL_DOMAIN


@dataclass
class ModelM1:
    """Abstract model: decision variables, macro-free constraints, and the
    fresh variables introduced by common-subexpression factoring."""

    decision_vars: Dict[str, Sort]
    constraints: List[Term]
    table: TermTable
    aux_vars: Dict[str, Sort] = field(default_factory=dict)

    @property
    def vars(self) -> Dict[str, Sort]:
        return {**self.decision_vars, **self.aux_vars}

    @property
    def domains(self):
        return {n: initial_domain(s) for n, s in self.vars.items()}


@dataclass
class ModelM2:
    """Concrete model over integer variable ids."""

    names: List[str] = field(default_factory=list)
    sorts: List[Sort] = field(default_factory=list)
    kinds: List[str] = field(default_factory=list)  # decision | cse | dec | const
    domains: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    index: Dict[str, int] = field(default_factory=dict)

    def add_var(self, name: str, sort: Sort, kind: str, domain=None) -> int:
        vid = len(self.names)
        self.names.append(name)
        self.sorts.append(sort)
        self.kinds.append(kind)
        self.domains.append(initial_domain(sort) if domain is None else domain)
        self.index[name] = vid
        return vid

    @property
    def decision(self) -> List[int]:
        return [i for i, k in enumerate(self.kinds) if k == "decision"]

    @property
    def aux(self) -> List[int]:
        return [i for i, k in enumerate(self.kinds) if k != "decision"]

    def fmt_of(self, vid: int):
        return self.sorts[vid].fmt

    def describe(self, c) -> str:
        return K.describe(c, self.names)


# -- reconstruction -------------------------------------------------------------


def identify_aux(m0: ModelM0):
    """Split ``m0`` into macro definitions and asserted constraints."""
    return list(m0.macros), list(m0.assertions)


def inline_closure(m0: ModelM0) -> ModelM1:
    """Substitute every macro by its (recursively expanded) body.

    Expansion is memoised per macro so a macro used several times becomes
    one shared node.
    """
    c_aux, c_main = identify_aux(m0)
    bodies = {name: body for name, _, body in c_aux}
    table = m0.table
    expanded: Dict[str, Term] = {}
    state: Dict[str, int] = {}
    memo: Dict[int, Term] = {}

    def expand_macro(name: str) -> Term:
        if name in expanded:
            return expanded[name]
        if state.get(name) == 1:
            raise CyclicDefinition(f"macro {name} is defined in terms of itself")
        state[name] = 1
        expanded[name] = substitute(bodies[name])
        state[name] = 2
        return expanded[name]

    def substitute(root: Term) -> Term:
        # macros referenced here are expanded first so postorder can rebuild
        for node in postorder([root]):
            if node.id in memo:
                continue
            if node.kind == VAR and node.value in bodies:
                memo[node.id] = expand_macro(node.value)
            elif node.kind == APP:
                memo[node.id] = table.app(node.op, [memo[a.id] for a in node.args])
            else:
                memo[node.id] = node
        return memo[root.id]

    constraints = [substitute(a) for a in c_main]
    return ModelM1(dict(m0.declared_vars), constraints, table)


def _fresh(prefix: str, taken) -> "callable":
    k = 0

    def make():
        nonlocal k
        while f"{prefix}{k}" in taken:
            k += 1
        name = f"{prefix}{k}"
        k += 1
        return name

    return make


def factor_cse(m1: ModelM1) -> ModelM1:
    """Give every repeated non-leaf FP subterm a fresh variable ``__cse<k>``
    and one defining equation.  Occurrences are counted in the tree view, with
    the subterms of an already factored node counted once."""
    table = m1.table
    roots = list(m1.constraints)
    order = list(postorder(roots))
    occ: Dict[int, int] = defaultdict(int)
    for r in roots:
        occ[r.id] += 1
    factored = set()
    for node in reversed(order):
        if node.kind == APP and node.sort.is_fp and occ[node.id] >= 2:
            factored.add(node.id)
        weight = 1 if node.id in factored else occ[node.id]
        for a in node.args:
            occ[a.id] += weight

    fresh = _fresh("__cse", set(m1.vars))
    rebuilt: Dict[int, Term] = {}
    aux = dict(m1.aux_vars)
    defs: List[Term] = []
    for node in order:
        if node.kind != APP:
            rebuilt[node.id] = node
            continue
        body = table.app(node.op, [rebuilt[a.id] for a in node.args])
        if node.id in factored:
            name = fresh()
            v = table.var(name, node.sort)
            aux[name] = node.sort
            defs.append(table.app("=", [v, body]))
            rebuilt[node.id] = v
        else:
            rebuilt[node.id] = body
    constraints = defs + [rebuilt[r.id] for r in roots]
    return ModelM1(dict(m1.decision_vars), constraints, table, aux)


# -- decomposition ----------------------------------------------------------------

_CMP_REL = {"fp.eq": ("eq", False), "fp.lt": ("lt", False), "fp.leq": ("le", False),
            "fp.gt": ("lt", True), "fp.geq": ("le", True)}


class _Decomposer:
    def __init__(self, m1: ModelM1, share: bool):
        self.m = ModelM2()
        self.share = share
        for name, sort in m1.decision_vars.items():
            self.m.add_var(name, sort, "decision")
        for name, sort in m1.aux_vars.items():
            self.m.add_var(name, sort, "cse")
        self.fresh = _fresh("__dec", set(self.m.index))
        self.consts: Dict[object, int] = {}
        self.memo: Dict[int, object] = {}

    def emit(self, c):
        self.m.constraints.append(c)

    def new_var(self, sort: Sort) -> int:
        return self.m.add_var(self.fresh(), sort, "dec")

    def const(self, t: Term) -> int:
        key = (t.sort, t.value)
        if key not in self.consts:
            if t.sort == BOOL:
                dom = frozenset((bool(t.value),))
            else:
                dom = FpDomain.singleton(t.value)
            self.consts[key] = self.m.add_var(self.fresh(), t.sort, "const", dom)
        return self.consts[key]

    # FP-sorted terms ---------------------------------------------------------

    def fp(self, t: Term, target: Optional[int] = None) -> int:
        if t.kind == VAR:
            vid = self.m.index[t.value]
            if target is not None:
                self.emit(K.Cmp("id", target, vid))
                return target
            return vid
        if t.kind == FP_LIT:
            vid = self.const(t)
            if target is not None:
                self.emit(K.Cmp("id", target, vid))
                return target
            return vid
        if self.share and target is None and t.id in self.memo:
            return self.memo[t.id]
        op, a = t.op, t.args
        if op in ARITH_OPS:
            if a[0].kind != RM_LIT:
                raise UnsupportedOperator(f"rounding mode must be a literal in {to_smtlib(t)}")
            mode = a[0].value
            x, y = self.fp(a[1]), self.fp(a[2])
            z = self.new_var(t.sort) if target is None else target
            if ARITH_OPS[op] == "mul" and x == y:
                self.emit(K.Square(mode, z, x))
            else:
                self.emit(K.TernArith(ARITH_OPS[op], mode, z, x, y))
        elif op in UNARY_FP_OPS:
            x = self.fp(a[0])
            z = self.new_var(t.sort) if target is None else target
            self.emit(K.Unary(UNARY_FP_OPS[op], z, x))
        elif op in MINMAX_OPS:
            x, y = self.fp(a[0]), self.fp(a[1])
            z = self.new_var(t.sort) if target is None else target
            self.emit(K.MinMax(MINMAX_OPS[op], z, x, y))
        elif op == "ite":
            bv, pos = self.lit(a[0])
            x, y = self.fp(a[1]), self.fp(a[2])
            if not pos:
                x, y = y, x
            z = self.new_var(t.sort) if target is None else target
            self.emit(K.IteFp(bv, z, x, y))
        else:
            raise UnsupportedOperator(f"unsupported FP operator {op}")
        if self.share and target is None:
            self.memo[t.id] = z
        return z

    # Bool-sorted terms --------------------------------------------------------

    def lit(self, t: Term) -> K.Lit:
        if t.kind == VAR:
            return (self.m.index[t.value], True)
        if t.kind == BOOL_LIT:
            return (self.const(t), True)
        if t.op == "not":
            v, p = self.lit(t.args[0])
            return (v, not p)
        if self.share and t.id in self.memo:
            return self.memo[t.id]
        op, a = t.op, t.args
        b = None
        if op in ("and", "or"):
            lits = tuple(self.lit(x) for x in a)
            b = self.new_var(BOOL)
            self.emit(K.BoolGate(op, b, lits))
        elif op == "=>":
            lits = (_neg(self.lit(a[0])), self.lit(a[1]))
            b = self.new_var(BOOL)
            self.emit(K.BoolGate("or", b, lits))
        elif op == "ite":
            lits = tuple(self.lit(x) for x in a)
            b = self.new_var(BOOL)
            self.emit(K.BoolGate("ite", b, lits))
        elif op in ("=", "distinct") and a[0].sort == BOOL:
            lits = (self.lit(a[0]), self.lit(a[1]))
            b = self.new_var(BOOL)
            self.emit(K.BoolGate("iff", b, lits))
            result = (b, op == "=")
        elif op in ("=", "distinct") or op in _CMP_REL:
            rel, swap = ("id", False) if op in ("=", "distinct") else _CMP_REL[op]
            x, y = self.fp(a[0]), self.fp(a[1])
            if swap:
                x, y = y, x
            b = self.new_var(BOOL)
            self.emit(K.ReifCmp(b, rel, x, y))
            result = (b, op != "distinct")
        elif op in PRED_OPS:
            x = self.fp(a[0])
            b = self.new_var(BOOL)
            self.emit(K.Pred(PRED_OPS[op], b, x))
        else:
            raise UnsupportedOperator(f"unsupported Boolean operator {op}")
        if op not in ("=", "distinct") and op not in _CMP_REL:
            result = (b, True)
        if self.share:
            self.memo[t.id] = result
        return result

    # top level --------------------------------------------------------------

    def assertion(self, t: Term, positive: bool = True):
        if t.kind == BOOL_LIT:
            if bool(t.value) != positive:
                self.emit(K.BoolClause(()))
            return
        if t.kind == APP:
            op, a = t.op, t.args
            if op == "not":
                return self.assertion(a[0], not positive)
            if (op == "and" and positive) or (op == "or" and not positive):
                for x in a:
                    self.assertion(x, positive)
                return
            if op == "=>" and not positive:
                self.assertion(a[0], True)
                self.assertion(a[1], False)
                return
            if op in ("=", "distinct") and a[0].sort.is_fp:
                if (op == "=") == positive:
                    self.define_or_equate(a[0], a[1])
                else:
                    self.emit(K.Cmp("ne", self.fp(a[0]), self.fp(a[1])))
                return
            if op in _CMP_REL and positive:
                rel, swap = _CMP_REL[op]
                x, y = self.fp(a[0]), self.fp(a[1])
                self.emit(K.Cmp(rel, y, x) if swap else K.Cmp(rel, x, y))
                return
            if op == "or" and positive:
                self.emit(K.BoolClause(tuple(self.lit(x) for x in a)))
                return
            if op == "=>" and positive:
                self.emit(K.BoolClause((_neg(self.lit(a[0])), self.lit(a[1]))))
                return
        v, p = self.lit(t)
        self.emit(K.BoolClause(((v, p if positive else not p),)))

    def define_or_equate(self, lhs: Term, rhs: Term):
        for var, expr in ((lhs, rhs), (rhs, lhs)):
            if var.kind == VAR and expr.kind == APP:
                self.fp(expr, target=self.m.index[var.value])
                return
        self.emit(K.Cmp("id", self.fp(lhs), self.fp(rhs)))


def _neg(l: K.Lit) -> K.Lit:
    return (l[0], not l[1])


def decompose(m1: ModelM1, share: Optional[bool] = None) -> ModelM2:
    """Lower ``m1`` to elementary constraints.

    By default every occurrence of a subterm is lowered on its own (the
    tree view), so sharing in the result comes only from ``factor_cse``.
    Oversized trees fall back to DAG lowering.
    """
    if share is None:
        share = any(term_size(c) > NAIVE_TREE_LIMIT for c in m1.constraints)
        if share:
            log.info("constraint tree exceeds %d nodes; decomposing as a DAG", NAIVE_TREE_LIMIT)
    d = _Decomposer(m1, share)
    for c in m1.constraints:
        d.assertion(c)
    return d.m


def per_macro_model(m0: ModelM0) -> ModelM1:
    """The encoding as-is: each FP/Bool macro stays a variable defined by its
    body.  Rounding-mode macros are inlined since modes are not variables."""
    table = m0.table
    rm = {name: body for name, sort, body in m0.macros if sort == RM}
    memo: Dict[int, Term] = {}

    def sub(root: Term) -> Term:
        for node in postorder([root]):
            if node.id in memo:
                continue
            if node.kind == VAR and node.value in rm:
                memo[node.id] = sub(rm[node.value])
            elif node.kind == APP:
                memo[node.id] = table.app(node.op, [memo[a.id] for a in node.args])
            else:
                memo[node.id] = node
        return memo[root.id]

    aux = {name: sort for name, sort, _ in m0.macros if sort != RM}
    defs = [table.app("=", [table.var(n, s), sub(b)]) for n, s, b in m0.macros if s != RM]
    return ModelM1(dict(m0.declared_vars), defs + [sub(a) for a in m0.assertions], table, aux)


# -- inequality cycles -----------------------------------------------------------


def detect_ineq_cycle(m2: ModelM2) -> Optional[List[object]]:
    """Return the constraints of a strictly increasing comparison cycle, or
    None.  Only asserted variable-to-variable comparisons are considered."""
    g = nx.DiGraph()
    for c in m2.constraints:
        if not isinstance(c, K.Cmp) or c.rel == "ne":
            continue
        if c.x == c.y:
            if c.rel == "lt":
                return [c]
            continue
        w = 1 if c.rel == "lt" else 0
        edges = [(c.x, c.y)] if c.rel in ("lt", "le") else [(c.x, c.y), (c.y, c.x)]
        for u, v in edges:
            if g.has_edge(u, v) and g[u][v]["w"] >= w:
                continue
            g.add_edge(u, v, w=w, c=c)
    for comp in nx.strongly_connected_components(g):
        if len(comp) < 2:
            continue
        for u, v, data in g.subgraph(comp).edges(data=True):
            if data["w"] == 1:
                back = nx.shortest_path(g.subgraph(comp), v, u)
                witness = [data["c"]]
                for a, b in zip(back, back[1:]):
                    c = g[a][b]["c"]
                    if c not in witness:
                        witness.append(c)
                return witness
    return None


# -- constraint graphs -----------------------------------------------------------

Model = Union[ModelM1, ModelM2]


@dataclass
class ConstraintGraph:
    nodes: List[str]
    edges: List[Tuple[str, str]]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_dot(self, name: str = "constraints") -> str:
        lines = [f"graph {name} {{"]
        lines += [f'  "{n}";' for n in self.nodes]
        lines += [f'  "{a}" -- "{b}";' for a, b in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def constraint_graph(model: Model) -> ConstraintGraph:
    """Variables as nodes, an edge between any two sharing a constraint."""
    if isinstance(model, ModelM2):
        nodes = list(model.names)
        scopes = [[model.names[v] for v in c.scope] for c in model.constraints]
    else:
        nodes = list(model.vars)
        scopes = [[n.value for n in postorder([c]) if n.kind == VAR] for c in model.constraints]
    seen = set()
    edges = []
    for scope in scopes:
        for a, b in combinations(dict.fromkeys(scope), 2):
            key = (a, b) if a < b else (b, a)
            if key not in seen:
                seen.add(key)
                edges.append(key)
    return ConstraintGraph(nodes, edges)


def export_constraint_graph(model: Model, path=None) -> str:
    dot = constraint_graph(model).to_dot()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dot)
    return dot


def emit_smt2(m1: ModelM1) -> str:
    """Re-emit an abstract model as a closed SMT-LIB script."""
    lines = ["(set-logic QF_FP)"]
    for name, sort in m1.vars.items():
        lines.append(f"(declare-fun {quote_symbol(name)} () {sort})")
    for c in m1.constraints:
        lines.append(f"(assert {to_smtlib(c)})")
    lines += ["(check-sat)", "(exit)"]
    return "\n".join(lines) + "\n"


def elementary_audit(m2: ModelM2) -> None:
    """Every constraint must be an elementary form over known variables."""
    n = len(m2.names)
    for c in m2.constraints:
        if not isinstance(c, K.ElemConstraint):
            raise TypeError(f"composite constraint {c!r}")
        if any(not 0 <= v < n for v in c.scope):
            raise ValueError(f"constraint {c!r} references an unknown variable")


def reconstruct(m0: ModelM0, cse: bool = True) -> Tuple[ModelM1, ModelM1, ModelM2]:
    """Run the whole pipeline; returns (M1, factored M1, M2)."""
    m1 = inline_closure(m0)
    m1f = factor_cse(m1) if cse else m1
    return m1, m1f, decompose(m1f)


__all__ = [
    "ModelM1",
    "ModelM2",
    "identify_aux",
    "inline_closure",
    "factor_cse",
    "decompose",
    "per_macro_model",
    "detect_ineq_cycle",
    "constraint_graph",
    "export_constraint_graph",
    "emit_smt2",
    "reconstruct",
    "FpValue",
]
