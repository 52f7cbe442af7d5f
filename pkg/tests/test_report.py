import json

import pytest
from hypothesis import given, settings, strategies as st

from ischeck.diagnostics import ALL_TASKS, Diagnostic, RuleResult, SourceLoc
from ischeck.report import (
    NO_CHECKS_WARNING, CriticOutcome, aggregate, compute_verdict, parse_report, render,
)
from ischeck.rules import run_tasks

STATUS = st.sampled_from(["pass", "fail", "skipped", "error"])


def task(tid, status):
    if status == "fail":
        d = Diagnostic("DFR1", "x", SourceLoc("m.c", 2, 1), "x", "T8")
        return RuleResult("T8" if tid == "T8" else tid, status,
                          [d] if tid == "T8" else [], 0.5)
    return RuleResult(tid, status, [], 0.25, "why" if status == "skipped" else "")


def test_all_pass_is_verified():
    r = aggregate([task(t, "pass") for t in ALL_TASKS])
    assert r.verdict == "verified" and r.warnings == []


def test_fail_is_not_verified(tmon_modules, tmon_contract):
    r = aggregate(run_tasks(tmon_modules["b"], tmon_contract), module_name="tmon_b")
    assert r.verdict == "not-verified"
    doc = json.loads(render(r, "json"))
    failing = {t["task_id"] for t in doc["tasks"] if t["status"] == "fail"}
    assert failing - {"T12"} == {"T1", "T5", "T6", "T7", "T8", "T9"}


def test_error_dominates():
    crit = CriticOutcome("compile", "error", reason="command not found: gcc")
    assert aggregate([task("T1", "fail")], [crit]).verdict == "error"


def test_optional_critics_do_not_count():
    crit = CriticOutcome("misra", "error", required=False)
    assert aggregate([task("T1", "pass")], [crit]).verdict == "verified"
    crit = CriticOutcome("misra", "fail", required=False)
    assert aggregate([task("T1", "pass")], [crit]).verdict == "verified"


def test_empty_is_vacuously_verified():
    r = aggregate([], [])
    assert r.verdict == "verified" and r.warnings == [NO_CHECKS_WARNING]
    assert "warning: no checks executed" in render(r).decode()
    assert parse_report(render(r, "json")).verdict == "verified"


def test_task_ordering():
    r = aggregate([task("T10", "pass"), task("T2", "pass"), task("T1", "pass")])
    assert [t.task_id for t in r.tasks] == ["T1", "T2", "T10"]


def test_text_layout():
    crit = CriticOutcome("deductive", "pass", {"proven": 86, "total": 86}, duration=1.5)
    misra = CriticOutcome("misra", "fail", {"required": 6})
    text = render(aggregate([task("T1", "pass")], [crit, misra], module_name="sgmm")).decode()
    assert "T1 External function calls are permitted  ✓" in text
    assert "critic deductive" in text and "✓ (86/86)" in text
    assert "× (6 required)" in text
    assert text.rstrip().endswith("VERDICT: not-verified")


def test_verified_rows_all_ticked(tmon_modules, tmon_contract):
    text = render(aggregate(run_tasks(tmon_modules["a"], tmon_contract))).decode()
    rows = [l for l in text.splitlines() if l.startswith("T")]
    assert len(rows) == len(ALL_TASKS) and all("✓" in l for l in rows)
    assert "VERDICT: verified" in text


def test_json_schema_fields(tmon_modules, tmon_contract):
    r = aggregate(run_tasks(tmon_modules["b"], tmon_contract), module_name="tmon_b",
                  contract_path="tmon.is")
    doc = json.loads(render(r, "json"))
    assert set(doc) == {"schema_version", "module_name", "contract_path", "timestamp",
                        "tool_version", "verdict", "warnings", "tasks", "critics"}
    assert doc["schema_version"] == 1
    diag = next(d for t in doc["tasks"] for d in t["diagnostics"])
    assert set(diag) == {"rule_id", "task_id", "severity", "file", "line", "column",
                         "subject", "message"}


def test_canonical_rendering():
    a = aggregate([task("T1", "pass")], timestamp="2020-01-01T00:00:00+00:00")
    b = aggregate([RuleResult("T1", "pass", [], 9.0)], timestamp="2021-01-01T00:00:00+00:00")
    assert render(a, "json") != render(b, "json")
    assert render(a, "json", canonical=True) == render(b, "json", canonical=True)


def test_bad_inputs():
    with pytest.raises(ValueError):
        CriticOutcome("x", "ok")
    with pytest.raises(ValueError):
        CriticOutcome("x", "pass", {"n": -1})
    with pytest.raises(ValueError):
        render(aggregate([]), "xml")
    with pytest.raises(ValueError):
        parse_report(json.dumps({"schema_version": 2}))


# -- properties -------------------------------------------------------------

RANK = {"verified": 0, "not-verified": 1, "error": 2}


@settings(max_examples=300)
@given(st.lists(STATUS, max_size=6), st.lists(st.tuples(STATUS, st.booleans()), max_size=4),
       st.data())
def test_verdict_monotone(task_statuses, critic_statuses, data):
    tasks = [task(f"T{i + 1}", s) for i, s in enumerate(task_statuses)]
    critics = [CriticOutcome(f"c{i}", s, required=req) for i, (s, req) in enumerate(critic_statuses)]
    v = compute_verdict(tasks, critics)
    passes = [i for i, t in enumerate(tasks) if t.status == "pass"]
    if passes:
        i = data.draw(st.sampled_from(passes))
        worse = list(tasks)
        worse[i] = RuleResult(tasks[i].task_id, "fail")
        assert RANK[compute_verdict(worse, critics)] >= RANK[v]
    statuses = [t.status for t in tasks] + [c.status for c in critics if c.required]
    assert (v == "error") == ("error" in statuses)
    assert (v == "verified") == all(s in ("pass", "skipped") for s in statuses)


diags = st.builds(
    lambda line, col, msg, subj: Diagnostic("CFR8", msg, SourceLoc("m.c", line, col), subj, "T7"),
    st.integers(1, 500), st.integers(1, 80), st.text(max_size=20), st.text(max_size=8))


@settings(max_examples=150)
@given(st.lists(diags, max_size=4), st.lists(st.tuples(STATUS, st.dictionaries(
    st.sampled_from(["proven", "total", "required", "advisory"]), st.integers(0, 999)),
    st.text(max_size=30), st.floats(0, 100), st.booleans()), max_size=3),
    st.text(max_size=10), st.one_of(st.none(), st.text(max_size=10)))
def test_json_roundtrip(ds, crits, name, contract_path):
    tasks = [RuleResult.from_diagnostics("T7", ds), RuleResult.skipped("T1", "no contract")]
    critics = [CriticOutcome(f"c{i}", s, d, raw, dur, req)
               for i, (s, d, raw, dur, req) in enumerate(crits)]
    r = aggregate(tasks, critics, module_name=name, contract_path=contract_path)
    back = parse_report(render(r, "json"))
    assert back == r
    assert render(back, "json") == render(r, "json")
