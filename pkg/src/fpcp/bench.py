"""``fpcp-bench``: run a corpus under several configurations.

Each (instance, configuration) pair runs in its own ``fpcp`` subprocess.
Results go to a CSV file and are summarised per category (SAT, UNSAT, ALL)
as percentage solved, timeouts and total time.
"""

from __future__ import annotations

import argparse
import csv
import os
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .sexpr import Atom, SList, parse_sexprs
from .solver import PRESETS

CSV_COLUMNS = ["instance", "config", "verdict", "seconds", "nodes", "validated"]
DEFAULT_CONFIGS = ["NONE", "DIV", "CSE", "DIV+CSE", "DIV+CSE+CY"]
GRACE = 5.0


class SoundnessAlarm(RuntimeError):
    """Two configurations of the solver disagree on a verdict."""


class ExternalSolverUnavailable(RuntimeError):
    pass


@dataclass
class RunResult:
    instance: str
    config: str
    verdict: str
    seconds: float
    nodes: Optional[int] = None
    validated: str = ""
    model: str = ""


@dataclass
class BenchRecord:
    instance: str
    expected: Optional[str] = None
    runs: Dict[str, RunResult] = field(default_factory=dict)

    def verdicts(self) -> set:
        return {r.verdict for r in self.runs.values() if r.verdict in ("sat", "unsat")}

    @property
    def category(self) -> Optional[str]:
        v = self.verdicts()
        if len(v) == 1:
            return v.pop().upper()
        if self.expected in ("sat", "unsat"):
            return self.expected.upper()
        return None


@dataclass
class SummaryTable:
    configs: List[str]
    # rows[category][config] = (instances, solved, timeouts, total seconds)
    rows: Dict[str, Dict[str, tuple]]
    unclassified: List[str] = field(default_factory=list)

    def cell(self, category: str, config: str):
        n, solved, to, secs = self.rows[category][config]
        pct = 100.0 * solved / n if n else 0.0
        return pct, to, secs

    def format(self) -> str:
        head = ["category"] + [f"{c} %solved | TO | time" for c in self.configs]
        lines = ["\t".join(head)]
        for cat in ("SAT", "UNSAT", "ALL"):
            cells = []
            for c in self.configs:
                pct, to, secs = self.cell(cat, c)
                cells.append(f"{pct:.2f} | {to} | {secs:.2f}")
            n = self.rows[cat][self.configs[0]][0] if self.configs else 0
            lines.append("\t".join([f"{cat} ({n})"] + cells))
        if self.unclassified:
            lines.append(f"unclassified (unknown everywhere): {len(self.unclassified)}")
        return "\n".join(lines)


_STATUS_RE = re.compile(r"\(\s*set-info\s+:status\s+(sat|unsat|unknown)\s*\)")


def expected_status(path) -> Optional[str]:
    try:
        m = _STATUS_RE.search(Path(path).read_text(encoding="utf-8", errors="replace"))
    except OSError:
        return None
    return m.group(1) if m else None


def solver_command() -> List[str]:
    return [sys.executable, "-m", "fpcp.cli"]


def run_one(instance, config: str, timeout: float, extra: Sequence[str] = ()) -> RunResult:
    """Run the solver on one instance in a subprocess."""
    cmd = solver_command() + ["--preset", config, "--timeout", str(timeout), "--stats", "--model",
                              *extra, str(instance)]
    t0 = time.monotonic()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout + GRACE)
    except subprocess.TimeoutExpired:
        return RunResult(str(instance), config, "unknown", time.monotonic() - t0)
    secs = time.monotonic() - t0
    out = proc.stdout.splitlines()
    verdict = out[0].strip() if out else "error"
    if proc.returncode not in (0, 10, 20) or verdict not in ("sat", "unsat", "unknown"):
        verdict = "error"
    stats = dict(line.split("=", 1) for line in proc.stderr.splitlines() if "=" in line and " " not in line.split("=", 1)[0])
    nodes = int(stats["nodes"]) if stats.get("nodes", "").isdigit() else None
    validated = "internal" if stats.get("validated") == "1" else ""
    return RunResult(str(instance), config, verdict, secs, nodes, validated, "\n".join(out[1:]))


def model_to_assertions(model_text: str) -> str:
    """Turn printed ``define-fun`` model lines into equality assertions."""
    lines = []
    for line in model_text.splitlines():
        m = re.match(r"\(define-fun\s+(\S+)\s+\(\)\s+(\(_ FloatingPoint \d+ \d+\)|Bool)\s+(.*)\)\s*$", line.strip())
        if m:
            lines.append(f"(assert (= {m.group(1)} {m.group(3)}))")
    return "\n".join(lines)


def combined_script(instance_text: str, assertions: str) -> str:
    """The instance with extra assertions inserted before its check-sat."""
    idx = instance_text.find("(check-sat)")
    if idx < 0:
        return instance_text + "\n" + assertions + "\n(check-sat)\n"
    return instance_text[:idx] + assertions + "\n" + instance_text[idx:]


def _pin(e):
    if not isinstance(e, SList):
        return e
    kids = tuple(_pin(c) for c in e.children)
    head = kids[0] if kids else None
    if isinstance(head, Atom) and head.token in ("fp.min", "fp.max") and len(kids) == 3:
        a, b = Atom("|fpcp pin a|"), Atom("|fpcp pin b|")
        neg_first = (a, b) if head.token == "fp.min" else (b, a)
        body = SList((Atom("ite"),
                      SList((Atom("and"), SList((Atom("fp.isZero"), a)), SList((Atom("fp.isZero"), b)))),
                      SList((Atom("ite"), SList((Atom("="), a, SList((Atom("fp.neg"), SList((Atom("fp.abs"), a)))))),
                             *neg_first)),
                      SList((head, a, b))))
        return SList((Atom("let"), SList((SList((a, kids[1])), SList((b, kids[2])))), body))
    return SList(kids)


def pin_signed_zeros(text: str) -> str:
    """Rewrite fp.min/fp.max so that opposite zeros resolve as this solver
    resolves them (-0 below +0).  The standard leaves that case open and
    some solvers answer unknown on it even when every input is fixed."""
    return "\n".join(str(_pin(e)) for e in parse_sexprs(text)) + "\n"


def _external(cmd_template: str, path: str, timeout: float) -> str:
    cmd = [a.replace("{}", path) for a in shlex.split(cmd_template)]
    if shutil.which(cmd[0]) is None:
        raise ExternalSolverUnavailable(cmd[0])
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return "unknown"
    lines = proc.stdout.split()
    return lines[0] if lines else "error"


def cross_validate(instance, model_text: Optional[str], command: str, timeout: float = 60.0) -> str:
    """Check a sat model (or a bare verdict when ``model_text`` is None) with
    an external solver.  Returns ``pass``, ``fail`` or ``skip``."""
    text = Path(instance).read_text(encoding="utf-8")
    body = combined_script(text, model_to_assertions(model_text)) if model_text is not None else text
    body = pin_signed_zeros(body)
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False, encoding="utf-8") as fh:
        fh.write(body)
        path = fh.name
    try:
        answer = _external(command, path, timeout)
    except ExternalSolverUnavailable:
        return "skip"
    finally:
        os.unlink(path)
    return "pass" if answer == "sat" else "fail"


def summarize(records: Sequence[BenchRecord], configs: Sequence[str]) -> SummaryTable:
    rows = {cat: {c: [0, 0, 0, 0.0] for c in configs} for cat in ("SAT", "UNSAT", "ALL")}
    unclassified = []
    for rec in records:
        cat = rec.category
        if cat is None:
            unclassified.append(rec.instance)
            continue
        for c in configs:
            r = rec.runs.get(c)
            if r is None:
                continue
            for row in (rows[cat][c], rows["ALL"][c]):
                row[0] += 1
                row[1] += r.verdict in ("sat", "unsat")
                row[2] += r.verdict == "unknown"
                row[3] += r.seconds
    return SummaryTable(list(configs), {k: {c: tuple(v) for c, v in d.items()} for k, d in rows.items()},
                        unclassified)


def check_soundness(records: Sequence[BenchRecord]) -> None:
    for rec in records:
        if len(rec.verdicts()) > 1:
            detail = ", ".join(f"{c}={r.verdict}" for c, r in rec.runs.items())
            raise SoundnessAlarm(f"{rec.instance}: configurations disagree ({detail})")


def run_suite(directory, configs: Sequence[str] = DEFAULT_CONFIGS, timeout: float = 60.0,
              jobs: int = 1, xcheck: Optional[str] = None, csv_path=None, extra: Sequence[str] = ()):
    """Run every ``.smt2`` file under ``directory`` with each configuration.
    Returns ``(records, summary)``; raises SoundnessAlarm on disagreement."""
    for c in configs:
        if c not in PRESETS:
            raise ValueError(f"unknown configuration {c!r}")
    files = sorted(Path(directory).rglob("*.smt2"))
    records = {str(f): BenchRecord(str(f), expected_status(f)) for f in files}
    tasks = [(f, c) for f in files for c in configs]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda t: run_one(t[0], t[1], timeout, extra), tasks))
    for r in results:
        records[r.instance].runs[r.config] = r
    if xcheck:
        for r in results:
            if r.verdict == "sat":
                status = cross_validate(r.instance, r.model, xcheck, timeout)
                r.validated = {"pass": "external", "fail": "FAIL", "skip": r.validated or "skip"}[status]
    recs = list(records.values())
    if csv_path is not None:
        write_csv(results, csv_path)
    check_soundness(recs)
    return recs, summarize(recs, configs)


def write_csv(results: Sequence[RunResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in results:
            w.writerow([r.instance, r.config, r.verdict, f"{r.seconds:.4f}",
                        "" if r.nodes is None else r.nodes, r.validated])


def read_csv(path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def virtual_best(rows: Sequence[dict]) -> Dict[str, dict]:
    """Per instance, the fastest solved run over all configurations."""
    best: Dict[str, dict] = {}
    for row in rows:
        if row["verdict"] not in ("sat", "unsat"):
            continue
        cur = best.get(row["instance"])
        if cur is None or float(row["seconds"]) < float(cur["seconds"]):
            best[row["instance"]] = row
    return best


def main(argv: Optional[List[str]] = None) -> int:
    p = argparse.ArgumentParser(prog="fpcp-bench", description="Run fpcp over a corpus of .smt2 files.")
    p.add_argument("--dir", required=True, help="directory searched recursively for .smt2 files")
    p.add_argument("--configs", default=",".join(DEFAULT_CONFIGS),
                   help="comma-separated presets (default: all five)")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--xcheck", metavar="CMD", help='external solver command, "{}" stands for the file')
    p.add_argument("--csv", required=True, metavar="OUT.csv")
    args = p.parse_args(argv)
    configs = [c.strip().upper() for c in args.configs.split(",") if c.strip()]
    if not Path(args.dir).is_dir():
        print(f"fpcp-bench: no such directory {args.dir}", file=sys.stderr)
        return 1
    try:
        records, table = run_suite(args.dir, configs, args.timeout, args.jobs, args.xcheck, args.csv)
    except ValueError as e:
        print(f"fpcp-bench: {e}", file=sys.stderr)
        return 2
    except SoundnessAlarm as e:
        print(f"fpcp-bench: SOUNDNESS ALARM: {e}", file=sys.stderr)
        return 3
    print(table.format())
    failed = [r for rec in records for r in rec.runs.values() if r.validated == "FAIL"]
    if failed:
        print(f"fpcp-bench: {len(failed)} model(s) failed cross-validation", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
