"""End-to-end pipeline: parse, reconstruct, concretize, search, validate."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

from .errors import ValidationError
from .evaluate import validate_model
from .fp import FpValue
from .frontend import ModelM0, parse_file, parse_script
from .rewrite import (
    constraint_graph,
    decompose,
    detect_ineq_cycle,
    emit_smt2,
    export_constraint_graph,
    factor_cse,
    inline_closure,
    per_macro_model,
)
from .search import SAT, UNKNOWN, UNSAT, Search

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    timeout: Optional[float] = 60.0
    u: int = 5
    cse: bool = True
    diversification: bool = True
    cycle_check: bool = True
    budget_factor: Optional[int] = 100
    node_limit: Optional[int] = None
    validate: bool = True
    dot_path: Optional[str] = None
    emit_smt2_path: Optional[str] = None
    graph_stats: bool = False

    @property
    def effective_u(self) -> int:
        return self.u if self.diversification else 0


PRESETS: Dict[str, dict] = {
    "NONE": dict(cse=False, diversification=False, cycle_check=False),
    "DIV": dict(cse=False, diversification=True, cycle_check=False),
    "CSE": dict(cse=True, diversification=False, cycle_check=False),
    "DIV+CSE": dict(cse=True, diversification=True, cycle_check=False),
    "DIV+CSE+CY": dict(cse=True, diversification=True, cycle_check=True),
}


def preset(name: str, **overrides) -> SolverConfig:
    return replace(SolverConfig(**PRESETS[name.upper()]), **overrides)


@dataclass
class RunReport:
    verdict: str
    model: Optional[Dict[str, object]] = None  # name -> FpValue | bool
    seconds: float = 0.0
    stats: Dict[str, object] = field(default_factory=dict)
    reason: str = ""
    validated: Optional[bool] = None


def _model_values(m0: ModelM0, m2, assignment) -> Dict[str, object]:
    out = {}
    for name, sort in m0.declared_vars.items():
        bits = assignment[m2.index[name]]
        out[name] = FpValue(sort.fmt, bits) if sort.is_fp else bool(bits)
    return out


def _env(model: Dict[str, object]) -> Dict[str, object]:
    return {k: (v.bits if isinstance(v, FpValue) else v) for k, v in model.items()}


def solve_m0(m0: ModelM0, config: SolverConfig = SolverConfig(), start: Optional[float] = None) -> RunReport:
    start = time.monotonic() if start is None else start
    deadline = None if config.timeout is None else start + config.timeout
    stats: Dict[str, object] = {}
    m1 = inline_closure(m0)
    m1f = factor_cse(m1) if config.cse else m1
    m2 = decompose(m1f)
    if config.emit_smt2_path:
        with open(config.emit_smt2_path, "w", encoding="utf-8") as fh:
            fh.write(emit_smt2(m1))
    if config.dot_path:
        export_constraint_graph(m2, config.dot_path)
    g = constraint_graph(m2)
    stats.update(graph_nodes=g.node_count, graph_edges=g.edge_count)
    if config.graph_stats:
        g0 = constraint_graph(decompose(per_macro_model(m0)))
        stats.update(graph_nodes_before=g0.node_count, graph_edges_before=g0.edge_count)
    stats.update(vars_x1=len(m1.decision_vars), vars_x2=len(m2.names), constraints=len(m2.constraints))

    if config.cycle_check:
        witness = detect_ineq_cycle(m2)
        if witness is not None:
            stats.update(cycle_witness=len(witness), nodes=0, backtracks=0, max_depth=0)
            return RunReport(UNSAT, seconds=time.monotonic() - start, stats=stats, reason="inequality cycle")

    def validator(val):
        if config.validate:
            validate_model(m0, _env(_model_values(m0, m2, val)))

    search = Search(m2, u=config.effective_u, deadline=deadline, node_limit=config.node_limit,
                    budget_factor=config.budget_factor, validator=validator)
    res = search.run()
    s = res.stats
    p = search.prop.stats
    stats.update(nodes=s.nodes, backtracks=s.backtracks, max_depth=s.max_depth,
                 revisions=p.revisions, prunes=p.prunes, empty_domains=p.failures,
                 budget_exhausted=p.budget_exhausted)
    report = RunReport(res.verdict, seconds=time.monotonic() - start, stats=stats, reason=res.reason)
    if res.verdict == SAT:
        report.model = _model_values(m0, m2, res.assignment)
        report.validated = config.validate or None
    return report


def solve_text(text: str, config: SolverConfig = SolverConfig()) -> RunReport:
    start = time.monotonic()
    return solve_m0(parse_script(text), config, start)


def solve_file(path, config: SolverConfig = SolverConfig()) -> RunReport:
    start = time.monotonic()
    return solve_m0(parse_file(path), config, start)


__all__ = ["SolverConfig", "PRESETS", "preset", "RunReport", "solve_m0", "solve_text", "solve_file",
           "SAT", "UNSAT", "UNKNOWN", "ValidationError"]
