"""Diagnostics, rule results and the task/rule catalogue."""

from __future__ import annotations

from dataclasses import dataclass, field

CONTROL_FLOW_RULES = tuple(f"CFR{i}" for i in range(1, 12))
DATA_FLOW_RULES = tuple(f"DFR{i}" for i in range(1, 7))
ALL_RULES = CONTROL_FLOW_RULES + DATA_FLOW_RULES

# Contract well-formedness findings are not module rules; they get their own id.
CONTRACT_RULE = "IS"

# Verification tasks T1..T11 and the rule(s) each one targets.
BASE_TASK_RULES: dict[str, tuple[str, ...]] = {
    "T1": ("CFR1",),
    "T2": ("CFR3",),
    "T3": ("CFR4",),
    "T4": ("CFR5",),
    "T5": ("CFR6",),
    "T6": ("CFR7",),
    "T7": ("CFR8", "CFR9"),
    "T8": ("DFR1",),
    "T9": ("DFR4",),
    "T10": ("DFR5",),
    "T11": ("DFR6",),
}

# The tasks this checker runs. T5 also reports signature mismatches (CFR11);
# T12-T14 cover the rules the original task list leaves out.
TASK_RULES: dict[str, tuple[str, ...]] = {
    **BASE_TASK_RULES,
    "T5": ("CFR6", "CFR11"),
    "T12": ("CFR2",),
    "T13": ("CFR10",),
    "T14": ("DFR2", "DFR3"),
}

TASK_TITLES = {
    "T1": "External function calls are permitted",
    "T2": "Absence of function pointers",
    "T3": "No definitions in the .h file",
    "T4": "Only .h files are included",
    "T5": "Entry points are declared",
    "T6": "Entry points are defined",
    "T7": "Non-entry functions are local",
    "T8": "Variables have static storage",
    "T9": "Initialized or written before read",
    "T10": "Absence of pointer literals",
    "T11": "Typedefs are used",
    "T12": "External call order is respected",
    "T13": "No extern keyword",
    "T14": "No pointer arithmetic or casts",
}

ALL_TASKS = tuple(TASK_RULES)

# Tasks that need the .is contract to run at all.
CONTRACT_TASKS = frozenset({"T1", "T5", "T6", "T7", "T9", "T12"})

STATUSES = ("pass", "fail", "skipped", "error")


def task_sort_key(task_id: str) -> int:
    return int(task_id[1:])


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int = 1
    column: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid source location {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    message: str
    loc: SourceLoc
    subject: str = ""
    task_id: str | None = None
    severity: str = "violation"

    def __post_init__(self):
        if self.rule_id not in ALL_RULES and self.rule_id != CONTRACT_RULE:
            raise ValueError(f"unknown rule id {self.rule_id!r}")
        if self.severity not in ("violation", "warning"):
            raise ValueError(f"unknown severity {self.severity!r}")
        if self.task_id is not None and self.rule_id not in TASK_RULES.get(self.task_id, ()):
            raise ValueError(f"rule {self.rule_id} does not belong to task {self.task_id}")

    def sort_key(self):
        return (self.loc.file, self.loc.line, self.loc.column, self.rule_id,
                self.subject, self.message)

    def __str__(self) -> str:
        tag = self.rule_id if self.task_id is None else f"{self.task_id}/{self.rule_id}"
        return f"{self.loc}: {self.severity}: [{tag}] {self.message}"


@dataclass
class RuleResult:
    task_id: str
    status: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    duration: float = 0.0
    reason: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @classmethod
    def from_diagnostics(cls, task_id: str, diagnostics) -> "RuleResult":
        diags = sorted(diagnostics, key=Diagnostic.sort_key)
        failed = any(d.severity == "violation" for d in diags)
        return cls(task_id, "fail" if failed else "pass", diags)

    @classmethod
    def skipped(cls, task_id: str, reason: str) -> "RuleResult":
        return cls(task_id, "skipped", reason=reason)

    @property
    def violations(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "violation"]
