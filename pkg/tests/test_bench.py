import shutil

import pytest

from fpcp import bench
from fpcp.bench import (
    BenchRecord,
    RunResult,
    SoundnessAlarm,
    check_soundness,
    cross_validate,
    read_csv,
    run_suite,
    summarize,
    virtual_best,
)

SAT_TEXT = "(set-info :status sat)(declare-fun x () Float16)(assert (fp.gt x (_ +zero 5 11)))(check-sat)"
UNSAT_TEXT = "(set-info :status unsat)(declare-fun x () Float16)(assert (fp.lt x x))(check-sat)"
HAS_Z3 = shutil.which("z3") is not None


@pytest.fixture
def corpus(tmp_path):
    d = tmp_path / "corpus"
    (d / "sub").mkdir(parents=True)
    (d / "a.smt2").write_text(SAT_TEXT)
    (d / "sub" / "b.smt2").write_text(UNSAT_TEXT)
    (d / "notes.txt").write_text("ignored")
    return d


def test_run_suite_and_csv(corpus, tmp_path):
    out = tmp_path / "out.csv"
    records, table = run_suite(corpus, ["NONE", "DIV+CSE+CY"], timeout=30, jobs=2, csv_path=out)
    assert len(records) == 2
    rows = read_csv(out)
    assert len(rows) == 4 and list(rows[0]) == bench.CSV_COLUMNS
    verdicts = {(r["instance"].rsplit("/", 1)[-1], r["config"]): r["verdict"] for r in rows}
    assert verdicts[("a.smt2", "NONE")] == "sat" and verdicts[("b.smt2", "DIV+CSE+CY")] == "unsat"
    assert all(r["nodes"].isdigit() for r in rows)
    assert {r["validated"] for r in rows if r["verdict"] == "sat"} == {"internal"}
    assert table.cell("ALL", "NONE")[0] == 100.0


def test_empty_directory(tmp_path):
    records, table = run_suite(tmp_path, ["NONE"])
    assert records == []
    assert table.cell("ALL", "NONE") == (0.0, 0, 0.0)


def _rec(name, expected=None, **verdicts):
    r = BenchRecord(name, expected)
    for i, (cfg, v) in enumerate(verdicts.items()):
        r.runs[cfg] = RunResult(name, cfg, v, 1.0 + i)
    return r


def test_summary_arithmetic():
    recs = [
        _rec("s1", NONE="sat", DIV="sat"),
        _rec("s2", NONE="unknown", DIV="sat"),
        _rec("u1", NONE="unsat", DIV="unknown"),
        _rec("u2", "unsat", NONE="unknown", DIV="unknown"),
        _rec("x", None, NONE="unknown", DIV="error"),
    ]
    t = summarize(recs, ["NONE", "DIV"])
    assert t.rows["SAT"]["NONE"] == (2, 1, 1, 2.0)
    assert t.rows["SAT"]["DIV"] == (2, 2, 0, 4.0)
    assert t.rows["UNSAT"]["DIV"] == (2, 0, 2, 4.0)
    assert t.rows["ALL"]["NONE"] == (4, 2, 2, 4.0)
    assert t.cell("ALL", "NONE") == (50.0, 2, 4.0)
    assert t.unclassified == ["x"]
    assert "UNSAT (2)" in t.format()


def test_soundness_alarm():
    with pytest.raises(SoundnessAlarm):
        check_soundness([_rec("a", NONE="sat", DIV="unsat")])
    check_soundness([_rec("a", NONE="sat", DIV="unknown")])


def test_alarm_exit_code(corpus, tmp_path, monkeypatch):
    real = bench.run_one

    def flipped(instance, config, timeout, extra=()):
        r = real(instance, config, timeout, extra)
        if config == "DIV" and r.verdict == "unsat":
            r.verdict = "sat"
        return r

    monkeypatch.setattr(bench, "run_one", flipped)
    code = bench.main(["--dir", str(corpus), "--configs", "NONE,DIV", "--csv", str(tmp_path / "o.csv")])
    assert code == 3


def test_bad_arguments(tmp_path):
    assert bench.main(["--dir", str(tmp_path / "nope"), "--csv", str(tmp_path / "o.csv")]) == 1
    assert bench.main(["--dir", str(tmp_path), "--configs", "FAST", "--csv", str(tmp_path / "o.csv")]) == 2


def test_virtual_best():
    rows = [
        dict(instance="a", config="NONE", verdict="sat", seconds="2.0"),
        dict(instance="a", config="DIV", verdict="sat", seconds="1.0"),
        dict(instance="b", config="NONE", verdict="unknown", seconds="0.1"),
        dict(instance="b", config="DIV", verdict="unsat", seconds="3.0"),
        dict(instance="c", config="DIV", verdict="unknown", seconds="60"),
    ]
    best = virtual_best(rows)
    assert best["a"]["config"] == "DIV" and best["b"]["config"] == "DIV" and "c" not in best


def test_xcheck_skips_without_solver(corpus):
    assert cross_validate(corpus / "a.smt2", "", "no-such-solver-xyz {}") == "skip"


@pytest.mark.skipif(not HAS_Z3, reason="z3 not installed")
def test_xcheck_with_z3(corpus, tmp_path):
    good = "(define-fun x () (_ FloatingPoint 5 11) (fp #b0 #b01111 #b0000000000))"
    bad = "(define-fun x () (_ FloatingPoint 5 11) (fp #b1 #b01111 #b0000000000))"
    assert cross_validate(corpus / "a.smt2", good, "z3 {}") == "pass"
    assert cross_validate(corpus / "a.smt2", bad, "z3 {}") == "fail"
    out = tmp_path / "x.csv"
    assert bench.main(["--dir", str(corpus), "--configs", "CSE", "--xcheck", "z3 {}", "--csv", str(out)]) == 0
    rows = read_csv(out)
    assert [r["validated"] for r in rows if r["verdict"] == "sat"] == ["external"]


@pytest.mark.skipif(not HAS_Z3, reason="z3 not installed")
def test_xcheck_failure_exit_code(corpus, tmp_path, monkeypatch):
    real = bench.run_one

    def corrupt(instance, config, timeout, extra=()):
        r = real(instance, config, timeout, extra)
        r.model = r.model.replace("#b0 #b", "#b1 #b")
        return r

    monkeypatch.setattr(bench, "run_one", corrupt)
    code = bench.main(["--dir", str(corpus), "--configs", "NONE", "--xcheck", "z3 {}",
                       "--csv", str(tmp_path / "o.csv")])
    assert code == 4


def test_console_script(corpus, tmp_path):
    import subprocess

    exe = shutil.which("fpcp-bench")
    if exe is None:
        pytest.skip("package not installed")
    proc = subprocess.run([exe, "--dir", str(corpus), "--configs", "NONE", "--csv", str(tmp_path / "c.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "SAT" in proc.stdout


def test_pinning_keeps_our_semantics():
    import numpy as np

    from fpcp.bench import pin_signed_zeros
    from fpcp.frontend import parse_script
    from oracle import m0_solutions

    text = ("(declare-fun a () (_ FloatingPoint 2 3))(declare-fun b () (_ FloatingPoint 2 3))"
            "(assert (= (fp.min a (fp.max b a)) (_ -zero 2 3)))(assert (fp.isZero b))")
    pinned = pin_signed_zeros(text)
    assert "(= |fpcp pin a| (fp.neg (fp.abs |fpcp pin a|)))" in pinned
    n1, k1 = m0_solutions(parse_script(text))
    n2, k2 = m0_solutions(parse_script(pinned))
    assert n1 == n2 and np.array_equal(k1, k2) and k1.any()
