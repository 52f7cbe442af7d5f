"""Unified report: task results plus critic outcomes, a verdict, and renderers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .diagnostics import STATUSES, TASK_TITLES, Diagnostic, RuleResult, SourceLoc, task_sort_key

SCHEMA_VERSION = 1
VERDICTS = ("verified", "not-verified", "error")
NO_CHECKS_WARNING = "no checks executed"
EXCERPT_LIMIT = 2000


def _tool_version() -> str:
    from . import __version__
    return __version__


@dataclass
class CriticOutcome:
    critic_name: str
    status: str
    detail: dict = field(default_factory=dict)  # counter name -> non-negative int
    raw_excerpt: str = ""
    duration: float = 0.0
    required: bool = True
    reason: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown critic status {self.status!r}")
        if self.duration < 0:
            raise ValueError("negative duration")
        for k, v in self.detail.items():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"critic counter {k} must be a non-negative integer")
        self.raw_excerpt = self.raw_excerpt[-EXCERPT_LIMIT:]


@dataclass
class Report:
    module_name: str
    contract_path: str | None
    timestamp: str | None
    tool_version: str
    tasks: list[RuleResult]
    critics: list[CriticOutcome]
    verdict: str
    warnings: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def failing_tasks(self) -> list[str]:
        return [t.task_id for t in self.tasks if t.status == "fail"]


def compute_verdict(tasks, critics) -> str:
    """error dominates; then any failing task or required critic; else verified.

    Critics marked required=False are recorded but never move the verdict.
    """
    counted = [c for c in critics if c.required]
    statuses = [t.status for t in tasks] + [c.status for c in counted]
    if "error" in statuses:
        return "error"
    if "fail" in statuses:
        return "not-verified"
    return "verified"


def aggregate(tasks, critics=(), *, module_name="", contract_path=None,
              timestamp=None, tool_version=None) -> Report:
    tasks = sorted(tasks, key=lambda t: task_sort_key(t.task_id))
    critics = list(critics)  # configured order is kept
    warnings = []
    ran = [t for t in tasks if t.status != "skipped"] + [c for c in critics if c.status != "skipped"]
    if not ran:
        warnings.append(NO_CHECKS_WARNING)
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
    return Report(module_name, contract_path, timestamp, tool_version or _tool_version(),
                  tasks, critics, compute_verdict(tasks, critics), warnings)


def canonicalize(r: Report) -> Report:
    """Drop the fields that legitimately differ between runs."""
    return replace(r, timestamp=None,
                   tasks=[replace(t, duration=0.0) for t in r.tasks],
                   critics=[replace(c, duration=0.0) for c in r.critics])


# -- structured form -------------------------------------------------------

def _diag_dict(d: Diagnostic) -> dict:
    return {"rule_id": d.rule_id, "task_id": d.task_id, "severity": d.severity,
            "file": d.loc.file, "line": d.loc.line, "column": d.loc.column,
            "subject": d.subject, "message": d.message}


def to_dict(r: Report) -> dict:
    return {
        "schema_version": r.schema_version,
        "module_name": r.module_name,
        "contract_path": r.contract_path,
        "timestamp": r.timestamp,
        "tool_version": r.tool_version,
        "verdict": r.verdict,
        "warnings": list(r.warnings),
        "tasks": [{"task_id": t.task_id, "title": TASK_TITLES.get(t.task_id, ""),
                   "status": t.status, "duration": t.duration, "reason": t.reason,
                   "diagnostics": [_diag_dict(d) for d in t.diagnostics]} for t in r.tasks],
        "critics": [{"critic_name": c.critic_name, "status": c.status, "required": c.required,
                     "detail": dict(sorted(c.detail.items())), "raw_excerpt": c.raw_excerpt,
                     "duration": c.duration, "reason": c.reason} for c in r.critics],
    }


def from_dict(d: dict) -> Report:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version {d.get('schema_version')!r}")
    tasks = [RuleResult(t["task_id"], t["status"],
                        [Diagnostic(x["rule_id"], x["message"],
                                    SourceLoc(x["file"], x["line"], x["column"]),
                                    x["subject"], x["task_id"], x["severity"])
                         for x in t["diagnostics"]],
                        t["duration"], t["reason"]) for t in d["tasks"]]
    critics = [CriticOutcome(c["critic_name"], c["status"], dict(c["detail"]), c["raw_excerpt"],
                             c["duration"], c["required"], c["reason"]) for c in d["critics"]]
    if d["verdict"] not in VERDICTS:
        raise ValueError(f"unknown verdict {d['verdict']!r}")
    return Report(d["module_name"], d["contract_path"], d["timestamp"], d["tool_version"],
                  tasks, critics, d["verdict"], list(d["warnings"]), d["schema_version"])


def parse_report(data) -> Report:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return from_dict(json.loads(data))


# -- text form -------------------------------------------------------------

MARKS = {"pass": "✓", "fail": "×", "skipped": "-", "error": "!"}


def _critic_result(c: CriticOutcome) -> str:
    mark = MARKS[c.status]
    if "proven" in c.detail and "total" in c.detail:
        return f"{mark} ({c.detail['proven']}/{c.detail['total']})"
    counts = ", ".join(f"{v} {k}" for k, v in sorted(c.detail.items()))
    return f"{mark} ({counts})" if counts else mark


def render_text(r: Report) -> str:
    lines = [f"module: {r.module_name}"]
    if r.contract_path:
        lines.append(f"contract: {r.contract_path}")
    lines.append(f"tool version: {r.tool_version}")
    if r.timestamp:
        lines.append(f"timestamp: {r.timestamp}")
    lines.append("")
    rows = [(f"{t.task_id} {TASK_TITLES.get(t.task_id, '')}", MARKS[t.status], t.duration)
            for t in r.tasks]
    rows += [(f"critic {c.critic_name}" + ("" if c.required else " (optional)"),
              _critic_result(c), c.duration) for c in r.critics]
    if rows:
        width = max(len(name) for name, _, _ in rows)
        lines.append(f"{'check'.ljust(width)}  result  time")
        for name, result, dur in rows:
            lines.append(f"{name.ljust(width)}  {result.ljust(6)}  {dur:.3f}s")
        lines.append("")
    for t in r.tasks:
        if t.status == "skipped":
            lines.append(f"{t.task_id} skipped: {t.reason}")
        for d in t.diagnostics:
            lines.append(str(d))
    for c in r.critics:
        if c.reason:
            lines.append(f"critic {c.critic_name} {c.status}: {c.reason}")
    for w in r.warnings:
        lines.append(f"warning: {w}")
    lines.append(f"VERDICT: {r.verdict}")
    return "\n".join(lines) + "\n"


def render(r: Report, format: str = "text", canonical: bool = False) -> bytes:
    if canonical:
        r = canonicalize(r)
    if format == "json":
        text = json.dumps(to_dict(r), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    elif format == "text":
        text = render_text(r)
    else:
        raise ValueError(f"unknown report format {format!r}")
    return text.encode("utf-8")
