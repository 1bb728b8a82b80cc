"""``fpcp`` command-line driver."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Dict, List, Optional

from .errors import FpcpError, InputError, ValidationError
from .fp import FpValue
from .solver import PRESETS, SAT, UNKNOWN, UNSAT, SolverConfig, preset, solve_file
from .terms import quote_symbol

EXIT_CODES = {SAT: 10, UNSAT: 20, UNKNOWN: 0}


def print_model(model: Dict[str, object]) -> str:
    """SMT-LIB ``define-fun`` lines for a model (name -> FpValue | bool)."""
    lines = []
    for name, v in model.items():
        if isinstance(v, FpValue):
            lines.append(f"(define-fun {quote_symbol(name)} () {v.fmt} {v.to_smtlib()})")
        else:
            lines.append(f"(define-fun {quote_symbol(name)} () Bool {'true' if v else 'false'})")
    return "\n".join(lines)


def model_assertions(model: Dict[str, object]) -> str:
    """The model as equality assertions, to conjoin with a script that
    declares the same variables."""
    lines = []
    for name, v in model.items():
        lit = v.to_smtlib() if isinstance(v, FpValue) else ("true" if v else "false")
        lines.append(f"(assert (= {quote_symbol(name)} {lit}))")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpcp", description="Constraint solver for QF_FP SMT-LIB instances.")
    p.add_argument("file", help="input .smt2 file")
    p.add_argument("--timeout", type=float, default=60.0, metavar="S", help="wall-clock limit in seconds (default 60)")
    p.add_argument("--u", type=int, default=5, metavar="N", help="prohibition depth increment (default 5)")
    p.add_argument("--preset", choices=sorted(PRESETS), type=str.upper, help="option preset")
    p.add_argument("--no-cse", action="store_true", help="disable common-subexpression factoring")
    p.add_argument("--no-div", action="store_true", help="disable diversification (u = 0)")
    p.add_argument("--no-cycle-check", action="store_true", help="disable the inequality-cycle pass")
    p.add_argument("--model", action="store_true", help="print the model when sat")
    p.add_argument("--stats", action="store_true", help="print statistics on stderr")
    p.add_argument("--dot", metavar="PATH", help="write the concrete constraint graph as DOT")
    p.add_argument("--emit-smt2", metavar="PATH", help="write the reconstructed model as SMT-LIB")
    p.add_argument("--seed", type=int, help="accepted for compatibility; search is deterministic")
    p.add_argument("--node-limit", type=int, metavar="N", help="give up after N search nodes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> SolverConfig:
    if args.u < 0:
        raise ValueError("--u must be non-negative")
    if args.timeout is not None and args.timeout <= 0:
        raise ValueError("--timeout must be positive")
    common = dict(timeout=args.timeout, u=args.u, dot_path=args.dot, emit_smt2_path=args.emit_smt2,
                  graph_stats=args.stats, node_limit=args.node_limit)
    if args.preset:
        if args.no_cse or args.no_div or args.no_cycle_check:
            raise ValueError("--preset cannot be combined with --no-* switches")
        return preset(args.preset, **common)
    return SolverConfig(cse=not args.no_cse, diversification=not args.no_div,
                        cycle_check=not args.no_cycle_check, **common)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as e:
        parser.print_usage(sys.stderr)
        print(f"fpcp: error: {e}", file=sys.stderr)
        return 2
    try:
        report = solve_file(args.file, config)
    except OSError as e:
        print(UNKNOWN)
        print(f"fpcp: cannot read {args.file}: {e.strerror or e}", file=sys.stderr)
        return 1
    except InputError as e:
        print(UNKNOWN)
        sep = ":" if e.line is not None else ": "
        print(f"fpcp: {args.file}{sep}{e}", file=sys.stderr)
        return 1
    except ValidationError as e:
        print(UNKNOWN)
        print(f"fpcp: internal error, model failed validation: {e}", file=sys.stderr)
        return 3
    except FpcpError as e:
        print(UNKNOWN)
        print(f"fpcp: {e}", file=sys.stderr)
        return 1
    print(report.verdict)
    if args.model and report.verdict == SAT:
        print(print_model(report.model))
    if args.stats:
        print(f"time={report.seconds:.6f}", file=sys.stderr)
        for k, v in report.stats.items():
            print(f"{k}={v}", file=sys.stderr)
        if report.validated is not None:
            print(f"validated={int(report.validated)}", file=sys.stderr)
        if report.reason:
            print(f"reason={report.reason}", file=sys.stderr)
    sys.stdout.flush()
    return EXIT_CODES[report.verdict]


if __name__ == "__main__":
    sys.exit(main())
