"""Direct evaluation of terms under a full assignment.

Used to validate models against the original script.  It shares only the
scalar IEEE operations with the solver, never the propagators.
"""

from __future__ import annotations

from typing import Dict, Mapping

from .errors import ValidationError
from .fp import ARITH, fp_abs, fp_eq, fp_leq, fp_lt, fp_max, fp_min, fp_neg, same_value
from .frontend import ModelM0
from .terms import BOOL_LIT, FP_LIT, RM_LIT, VAR, Term, postorder


def evaluate(roots, env: Mapping[str, object], macros: Mapping[str, Term] | None = None):
    """Evaluate terms; ``env`` maps variable names to bits (FP) or bools.
    Macro variables found in ``macros`` are evaluated from their bodies."""
    macros = macros or {}
    memo: Dict[int, object] = {}
    roots = list(roots)

    def ev(root: Term):
        for node in postorder([root]):
            if node.id in memo:
                continue
            if node.kind == VAR:
                if node.value in env:
                    memo[node.id] = env[node.value]
                elif node.value in macros:
                    memo[node.id] = ev(macros[node.value])
                else:
                    raise KeyError(node.value)
            elif node.kind in (FP_LIT,):
                memo[node.id] = node.value.bits
            elif node.kind in (BOOL_LIT, RM_LIT):
                memo[node.id] = node.value
            else:
                memo[node.id] = _apply(node, [memo[a.id] for a in node.args])
        return memo[root.id]

    return [ev(r) for r in roots]


def _apply(node: Term, a):
    op = node.op
    if op in ("fp.add", "fp.sub", "fp.mul", "fp.div"):
        return ARITH[op[3:]](node.sort.fmt, a[0], a[1], a[2])
    if op == "fp.neg":
        return fp_neg(node.sort.fmt, a[0])
    if op == "fp.abs":
        return fp_abs(node.sort.fmt, a[0])
    if op == "fp.min":
        return fp_min(node.sort.fmt, a[0], a[1])
    if op == "fp.max":
        return fp_max(node.sort.fmt, a[0], a[1])
    if op == "not":
        return not a[0]
    if op == "and":
        return all(a)
    if op == "or":
        return any(a)
    if op == "=>":
        return (not a[0]) or a[1]
    if op == "ite":
        return a[1] if a[0] else a[2]
    fmt = node.args[0].sort.fmt if node.args[0].sort.is_fp else None
    if op in ("=", "distinct"):
        eq = same_value(fmt, a[0], a[1]) if fmt else a[0] == a[1]
        return eq if op == "=" else not eq
    if op == "fp.eq":
        return fp_eq(fmt, a[0], a[1])
    if op == "fp.lt":
        return fp_lt(fmt, a[0], a[1])
    if op == "fp.leq":
        return fp_leq(fmt, a[0], a[1])
    if op == "fp.gt":
        return fp_lt(fmt, a[1], a[0])
    if op == "fp.geq":
        return fp_leq(fmt, a[1], a[0])
    if op == "fp.isNaN":
        return fmt.is_nan_bits(a[0])
    if op == "fp.isInfinite":
        return (a[0] & ~fmt.sign_mask) == fmt.exp_mask
    if op == "fp.isZero":
        return (a[0] & ~fmt.sign_mask) == 0
    raise ValueError(f"cannot evaluate {op}")


def check_model(m0: ModelM0, env: Mapping[str, object]) -> bool:
    """True when every assertion of ``m0`` holds under ``env`` (declared
    variables only; macros are evaluated from their definitions)."""
    macros = {name: body for name, _, body in m0.macros}
    return all(v is True for v in evaluate(m0.assertions, env, macros))


def validate_model(m0: ModelM0, env: Mapping[str, object]) -> None:
    macros = {name: body for name, _, body in m0.macros}
    for i, v in enumerate(evaluate(m0.assertions, env, macros)):
        if v is not True:
            raise ValidationError(f"assertion {i} evaluates to false under the model")
