"""SMT-LIB 2 QF_FP script parser producing the initial model.

The accepted subset is documented in ``docs/smtlib-subset.md``.  ``let``
binders are expanded while parsing; ``define-fun`` macros are kept as named
references so that the rewriter can see them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import errors as E
from .fp import MODE_ALIASES, RNE, FpFormat, FpValue, fraction_to_bits
from .sexpr import Atom, SExpr, SList, read_sexprs, tokenize
from .terms import (
    APP,
    BOOL,
    RM,
    SUPPORTED_OPS,
    Sort,
    Term,
    TermTable,
    fp_sort,
    postorder,
    quote_symbol,
    to_smtlib,
)

_DECIMAL = re.compile(r"^[0-9]+(\.[0-9]+)?$")
_CHAINABLE = {"fp.eq", "fp.lt", "fp.leq", "fp.gt", "fp.geq", "="}
_NAMED_FORMATS = {
    "Float16": (5, 11),
    "Float32": (8, 24),
    "Float64": (11, 53),
    "Float128": (15, 113),
}
_IGNORED_COMMANDS = {"set-info", "set-option"}


@dataclass
class ModelM0:
    """The script as written: declarations, macros and assertions."""

    logic: Optional[str] = None
    declared_vars: Dict[str, Sort] = field(default_factory=dict)
    macros: List[Tuple[str, Sort, Term]] = field(default_factory=list)
    assertions: List[Term] = field(default_factory=list)
    table: TermTable = field(default_factory=TermTable)
    info: Dict[str, str] = field(default_factory=dict)

    @property
    def macro_names(self) -> List[str]:
        return [m[0] for m in self.macros]

    def var(self, name: str) -> Term:
        return self.table.var(name, self.declared_vars[name])


def _pos(e: SExpr):
    return e.line, e.column


def _err(cls, msg: str, e: SExpr):
    return cls(msg, *_pos(e))


def parse_fp_literal(sign: str, exponent: str, significand: str, fmt: FpFormat) -> FpValue:
    """Interpret three ``#b`` bit strings as a value of ``fmt``."""
    s, e, m = (_bits(x) for x in (sign, exponent, significand))
    if len(s) != 1 or len(e) != fmt.ebits or len(m) != fmt.sbits - 1:
        raise E.WidthMismatch(
            f"fp literal widths ({len(s)}, {len(e)}, {len(m)}) do not match "
            f"(1, {fmt.ebits}, {fmt.sbits - 1})"
        )
    return FpValue.from_fields(fmt, int(s, 2), int(e, 2), int(m, 2) if m else 0)


def _bits(tok: str) -> str:
    if not tok.startswith("#b"):
        raise E.UnsupportedLiteral(f"expected a #b literal, got {tok}")
    return tok[2:]


class _Parser:
    def __init__(self):
        self.m = ModelM0()
        self.t = self.m.table
        self.symbols: Dict[str, Term] = {}
        self.check_sat_seen = False

    # -- commands --------------------------------------------------------------

    def command(self, cmd: SExpr):
        if not isinstance(cmd, SList) or not cmd.children or not isinstance(cmd[0], Atom):
            raise _err(E.UnsupportedCommand, f"not a command: {cmd}", cmd)
        name = cmd[0].token
        args = cmd.children[1:]
        if name == "set-logic":
            if len(args) != 1 or not isinstance(args[0], Atom):
                raise _err(E.ArityError, "set-logic expects one symbol", cmd)
            if args[0].token != "QF_FP":
                raise _err(E.UnsupportedLogic, f"unsupported logic {args[0].token}", args[0])
            self.m.logic = "QF_FP"
        elif name in _IGNORED_COMMANDS:
            if name == "set-info" and len(args) >= 1 and isinstance(args[0], Atom):
                self.m.info[args[0].token] = " ".join(str(a) for a in args[1:])
        elif name in ("declare-fun", "declare-const"):
            self.declare(name, cmd, args)
        elif name == "define-fun":
            self.define(cmd, args)
        elif name == "assert":
            if len(args) != 1:
                raise _err(E.ArityError, "assert expects one term", cmd)
            term = self.term(args[0], {})
            if term.sort != BOOL:
                raise _err(E.SortError, f"assertion has sort {term.sort}, expected Bool", args[0])
            self.m.assertions.append(term)
        elif name == "check-sat":
            if self.check_sat_seen:
                raise _err(E.UnsupportedCommand, "only one check-sat is supported", cmd)
            self.check_sat_seen = True
        elif name == "exit":
            return False
        else:
            raise _err(E.UnsupportedCommand, f"unsupported command {name}", cmd)
        return True

    def _fresh_name(self, e: SExpr) -> str:
        if not isinstance(e, Atom) or not _is_symbol(e.token):
            raise _err(E.SortError, f"expected a symbol, got {e}", e)
        name = _unquote(e.token)
        if name in self.symbols:
            raise _err(E.SortError, f"symbol {name} already declared", e)
        return name

    def declare(self, kind: str, cmd: SList, args):
        if kind == "declare-fun":
            if len(args) != 3:
                raise _err(E.ArityError, "declare-fun expects name, parameter sorts and sort", cmd)
            params = args[1]
            if not isinstance(params, SList):
                raise _err(E.SortError, "declare-fun parameter list expected", params)
            if len(params):
                raise _err(E.ArityError, "uninterpreted functions with parameters are not supported", params)
            sort_e = args[2]
        else:
            if len(args) != 2:
                raise _err(E.ArityError, "declare-const expects name and sort", cmd)
            sort_e = args[1]
        name = self._fresh_name(args[0])
        sort = self.sort(sort_e)
        if sort == RM:
            raise _err(E.SortError, "RoundingMode variables are not supported", sort_e)
        self.m.declared_vars[name] = sort
        self.symbols[name] = self.t.var(name, sort)

    def define(self, cmd: SList, args):
        if len(args) != 4:
            raise _err(E.ArityError, "define-fun expects name, parameters, sort and body", cmd)
        if not isinstance(args[1], SList) or len(args[1]):
            raise _err(E.ArityError, "define-fun with parameters is not supported", args[1])
        name = self._fresh_name(args[0])
        sort = self.sort(args[2])
        body = self.term(args[3], {})
        if body.sort != sort:
            raise _err(E.SortError, f"body of {name} has sort {body.sort}, declared {sort}", args[3])
        self.m.macros.append((name, sort, body))
        self.symbols[name] = self.t.var(name, sort)

    # -- sorts -------------------------------------------------------------

    def sort(self, e: SExpr) -> Sort:
        if isinstance(e, Atom):
            if e.token == "Bool":
                return BOOL
            if e.token == "RoundingMode":
                return RM
            if e.token in _NAMED_FORMATS:
                return fp_sort(*_NAMED_FORMATS[e.token])
        elif (len(e) == 4 and all(isinstance(c, Atom) for c in e)
              and e[0].token == "_" and e[1].token == "FloatingPoint"):
            eb, sb = self.numeral(e[2]), self.numeral(e[3])
            try:
                return fp_sort(eb, sb)
            except E.SortError as exc:
                raise _err(E.SortError, exc.message, e) from None
        raise _err(E.SortError, f"unsupported sort {e}", e)

    def numeral(self, e: SExpr) -> int:
        if not isinstance(e, Atom) or not e.token.isdigit():
            raise _err(E.SortError, f"expected a numeral, got {e}", e)
        return int(e.token)

    # -- terms -------------------------------------------------------------

    def term(self, e: SExpr, scope: Dict[str, Term]) -> Term:
        try:
            return self._term(e, scope)
        except E.InputError as exc:
            if exc.line is None:
                raise type(exc)(exc.message, *_pos(e)) from None
            raise

    def _term(self, e: SExpr, scope: Dict[str, Term]) -> Term:
        t = self.t
        if isinstance(e, Atom):
            tok = e.token
            name = _unquote(tok)
            if name in scope:
                return scope[name]
            if name in self.symbols:
                return self.symbols[name]
            if tok == "true" or tok == "false":
                return t.bool_const(tok == "true")
            if tok in MODE_ALIASES:
                return t.rm_const(MODE_ALIASES[tok])
            if tok.startswith("#") or _DECIMAL.match(tok):
                raise _err(E.UnsupportedLiteral, f"bare literal {tok} has no FloatingPoint sort", e)
            raise _err(E.UnboundSymbol, f"unbound symbol {name}", e)
        if not len(e):
            raise _err(E.SortError, "empty application", e)
        head = e[0]
        if isinstance(head, SList):
            return self.indexed_application(e, scope)
        op = head.token
        rest = e.children[1:]
        if op == "_":
            return self.indexed_constant(e)
        if op == "fp":
            if len(rest) != 3 or not all(isinstance(r, Atom) for r in rest):
                raise _err(E.ArityError, "fp expects three bit-vector literals", e)
            sb, eb, mb = (_bits(r.token) for r in rest)
            if len(eb) < 2 or len(mb) < 1:
                raise _err(E.WidthMismatch, "fp literal too narrow", e)
            fmt = FpFormat(len(eb), len(mb) + 1)
            try:
                return t.fp_const(parse_fp_literal(rest[0].token, rest[1].token, rest[2].token, fmt))
            except E.WidthMismatch as exc:
                raise _err(E.WidthMismatch, exc.message, e) from None
        if op == "let":
            return self.let(e, scope)
        if op == "!":
            if not rest:
                raise _err(E.ArityError, "empty annotation", e)
            return self.term(rest[0], scope)
        if op not in SUPPORTED_OPS:
            raise _err(E.UnsupportedOperator, f"unsupported operator {op}", head)
        args = [self.term(a, scope) for a in rest]
        return self.application(op, args, e)

    def application(self, op: str, args: List[Term], e: SExpr) -> Term:
        t = self.t
        try:
            if op in _CHAINABLE and len(args) > 2:
                parts = [t.app(op, [args[i], args[i + 1]]) for i in range(len(args) - 1)]
                return t.app("and", parts)
            if op == "distinct" and len(args) > 2:
                parts = [t.app("distinct", [args[i], args[j]])
                         for i in range(len(args)) for j in range(i + 1, len(args))]
                return t.app("and", parts)
            if op == "=>" and len(args) > 2:
                acc = args[-1]
                for a in reversed(args[:-1]):
                    acc = t.app("=>", [a, acc])
                return acc
            return t.app(op, args)
        except E.InputError as exc:
            raise type(exc)(exc.message, *_pos(e)) from None

    def let(self, e: SList, scope):
        if len(e) != 3 or not isinstance(e[1], SList):
            raise _err(E.ArityError, "let expects bindings and a body", e)
        inner = dict(scope)
        for b in e[1]:
            if not isinstance(b, SList) or len(b) != 2 or not isinstance(b[0], Atom):
                raise _err(E.ArityError, "malformed let binding", b)
            inner[_unquote(b[0].token)] = self.term(b[1], scope)
        return self.term(e[2], inner)

    def indexed_constant(self, e: SList) -> Term:
        if len(e) != 4 or not all(isinstance(c, Atom) for c in e):
            raise _err(E.UnsupportedLiteral, f"unsupported indexed term {e}", e)
        kind = e[1].token
        fmt = self.sort(SList((Atom("_"), Atom("FloatingPoint"), e[2], e[3]), *_pos(e))).fmt
        if kind == "+oo":
            v = FpValue.inf(fmt)
        elif kind == "-oo":
            v = FpValue.inf(fmt, negative=True)
        elif kind == "+zero":
            v = FpValue.zero(fmt)
        elif kind == "-zero":
            v = FpValue.zero(fmt, negative=True)
        elif kind == "NaN":
            v = FpValue.nan(fmt)
        else:
            raise _err(E.UnsupportedLiteral, f"unsupported indexed constant {kind}", e)
        return self.t.fp_const(v)

    def indexed_application(self, e: SList, scope) -> Term:
        head = e[0]
        if (len(head) == 4 and all(isinstance(c, Atom) for c in head)
                and head[0].token == "_" and head[1].token == "to_fp"):
            fmt = self.sort(SList((Atom("_"), Atom("FloatingPoint"), head[2], head[3]), *_pos(head))).fmt
            rest = e.children[1:]
            if len(rest) == 1 and isinstance(rest[0], Atom) and rest[0].token.startswith("#b"):
                bits = rest[0].token[2:]
                if len(bits) != fmt.width:
                    raise _err(E.WidthMismatch, f"bit-vector width {len(bits)} != {fmt.width}", rest[0])
                return self.t.fp_const(FpValue(fmt, int(bits, 2)))
            if len(rest) == 2:
                mode = self.term(rest[0], scope)
                if mode.sort != RM or mode.kind != "rm":
                    raise _err(E.SortError, "to_fp expects a rounding-mode literal", rest[0])
                q = self.real_literal(rest[1])
                bits = fraction_to_bits(fmt, q, RNE)
                v = FpValue(fmt, bits)
                if v.is_inf or v.to_fraction() != q:
                    raise _err(E.UnsupportedLiteral, f"{rest[1]} is not exactly representable in {fmt}", rest[1])
                return self.t.fp_const(v)
            raise _err(E.UnsupportedLiteral, f"unsupported to_fp form {e}", e)
        raise _err(E.UnsupportedOperator, f"unsupported indexed operator {head}", head)

    def real_literal(self, e: SExpr) -> Fraction:
        if isinstance(e, Atom) and _DECIMAL.match(e.token):
            return Fraction(e.token)
        if isinstance(e, SList) and len(e) == 2 and isinstance(e[0], Atom) and e[0].token == "-":
            return -self.real_literal(e[1])
        raise _err(E.UnsupportedLiteral, f"unsupported real literal {e}", e)


def _is_symbol(tok: str) -> bool:
    if tok.startswith("|"):
        return True
    return not (tok[0].isdigit() or tok[0] in ":#\"")


def _unquote(tok: str) -> str:
    if len(tok) >= 2 and tok[0] == "|" and tok[-1] == "|":
        return tok[1:-1]
    return tok


def parse_script(source) -> ModelM0:
    """Parse a token list or raw text into :class:`ModelM0`."""
    tokens = tokenize(source) if isinstance(source, str) else source
    p = _Parser()
    for cmd in read_sexprs(tokens):
        if not p.command(cmd):
            break
    return p.m


def parse_file(path) -> ModelM0:
    with open(path, encoding="utf-8") as fh:
        return parse_script(fh.read())


def print_script(m: ModelM0) -> str:
    """Render a model back to SMT-LIB text."""
    lines = []
    if m.logic:
        lines.append(f"(set-logic {m.logic})")
    for name, sort in m.declared_vars.items():
        lines.append(f"(declare-fun {quote_symbol(name)} () {sort})")
    for name, sort, body in m.macros:
        lines.append(f"(define-fun {quote_symbol(name)} () {sort} {to_smtlib(body)})")
    for a in m.assertions:
        lines.append(f"(assert {to_smtlib(a)})")
    lines.append("(check-sat)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def macro_dependencies(m: ModelM0) -> Dict[str, List[str]]:
    names = set(m.macro_names)
    deps = {}
    for name, _, body in m.macros:
        deps[name] = [n.value for n in postorder([body]) if n.kind == "var" and n.value in names]
    return deps


__all__ = [
    "ModelM0",
    "parse_script",
    "parse_file",
    "parse_fp_literal",
    "print_script",
    "tokenize",
    "APP",
]
