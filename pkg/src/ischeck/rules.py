"""Structural and syntactic rule checks, one function per task."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .cfront.model import CModule
from .contract import ISContract
from .diagnostics import CONTRACT_TASKS, Diagnostic, RuleResult, task_sort_key


@dataclass(frozen=True)
class RuleConfig:
    null_macros: frozenset = frozenset()
    typedef_allowlist: frozenset = frozenset()
    strict_advisory: bool = False


DEFAULT_CONFIG = RuleConfig()


def _result(task_id, diags) -> RuleResult:
    return RuleResult.from_diagnostics(task_id, diags)


def _effectively_static(m: CModule, name: str) -> bool:
    return any(d.is_static for d in m.decl_sites(name) if d.declared_in != "external")


def check_call_permissions(m: CModule, c: ISContract) -> RuleResult:
    """T1: every call goes to a module function, an entry point or a contracted external."""
    entries = set(c.entry_names)
    externals = c.external_functions()
    diags = []
    for call in m.calls:
        if call.via_pointer:
            continue  # reported by T2
        name = call.callee
        if name in m.functions or name in entries:
            continue
        if name not in externals:
            diags.append(Diagnostic("CFR1", f"call to {name} is not permitted by the contract",
                                    call.loc, name, "T1"))
            continue
        group, sig = externals[name]
        if group.is_header:
            sites = [d for d in m.decl_sites(name)
                     if d.file_name == group.group_id and not d.is_definition]
            if not sites:
                diags.append(Diagnostic(
                    "CFR1", f"{name} is permitted from {group.group_id}, but no declaration "
                    f"of it in {group.group_id} is visible", call.loc, name, "T1"))
        if call.args_arity != sig.arity:
            diags.append(Diagnostic(
                "CFR1", f"{name} called with {call.args_arity} argument(s), contract declares "
                f"{sig.arity}", call.loc, name, "T1"))
    return _result("T1", diags)


def check_no_function_pointers(m: CModule) -> RuleResult:
    """T2: no function pointer declarations, function values or indirect calls."""
    return _result("T2", [Diagnostic("CFR3", f.detail + (f" ({f.subject})" if f.subject else ""),
                                     f.loc, f.subject, "T2")
                          for f in m.flags("function_pointer")])


def check_header_purity(m: CModule) -> RuleResult:
    """T3: the module header holds declarations only."""
    what = {"function": "function definition", "initialization": "initialized variable"}
    return _result("T3", [Diagnostic("CFR4", f"{what[h.kind]} {h.name} in header", h.loc,
                                     h.name, "T3") for h in m.header_defs])


def check_includes(m: CModule) -> RuleResult:
    """T4: only .h files are included, judged on the raw directive text."""
    return _result("T4", [Diagnostic("CFR5", f"#include {r.directive_text} is not a .h file",
                                     r.loc, r.directive_text, "T4")
                          for r in m.includes if not r.is_header_suffix])


def check_entry_declarations(m: CModule, c: ISContract) -> RuleResult:
    """T5: contract entry points are declared non-static in the header, with the exact signature."""
    diags = []
    for sig in c.entry_points:
        sites = [d for d in m.decl_sites(sig.name) if d.declared_in == "header"]
        if not sites:
            diags.append(Diagnostic("CFR6", f"entry point {sig.name} is not declared in "
                                    "the module header", c.loc_of(sig.name), sig.name, "T5"))
            continue
        for d in sites:
            if d.is_static:
                diags.append(Diagnostic("CFR6", f"entry point {sig.name} is declared static "
                                        "in the header", d.loc, sig.name, "T5"))
            if d.signature != sig:
                diags.append(Diagnostic(
                    "CFR11", f"declaration `{d.signature}` does not match the contract's "
                    f"`{sig}`", d.loc, sig.name, "T5"))
    return _result("T5", diags)


def check_entry_definitions(m: CModule, c: ISContract) -> RuleResult:
    """T6: contract entry points are defined, non-static, in the source file."""
    diags = []
    for sig in c.entry_points:
        d = m.definition(sig.name)
        if d is None:
            diags.append(Diagnostic("CFR7", f"entry point {sig.name} is not defined",
                                    c.loc_of(sig.name), sig.name, "T6"))
        elif d.declared_in != "source":
            diags.append(Diagnostic("CFR7", f"entry point {sig.name} is defined outside "
                                    "the source file", d.loc, sig.name, "T6"))
        elif _effectively_static(m, sig.name):
            diags.append(Diagnostic("CFR7", f"entry point {sig.name} is defined with internal "
                                    "linkage (static)", d.loc, sig.name, "T6"))
    return _result("T6", diags)


def check_local_functions(m: CModule, c: ISContract) -> RuleResult:
    """T7: non-entry functions are static and kept out of the header."""
    entries = set(c.entry_names)
    diags = []
    for name in sorted(m.functions):
        if name in entries:
            continue
        if not _effectively_static(m, name):
            diags.append(Diagnostic("CFR8", f"{name} is not an entry point but is not static",
                                    m.definition(name).loc, name, "T7"))
    for d in m.decls:
        if d.declared_in == "header" and d.name not in entries:
            diags.append(Diagnostic("CFR9", f"header declares {d.name}, which is not an entry "
                                    "point", d.loc, d.name, "T7"))
    return _result("T7", diags)


def check_globals_static(m: CModule) -> RuleResult:
    """T8: file-scope variables are static and live in the source file."""
    diags = []
    for g in m.globals:
        if g.declared_in == "header":
            diags.append(Diagnostic("DFR1", f"variable {g.name} is declared in the header",
                                    g.loc, g.name, "T8"))
        elif not g.is_extern and not g.is_static:
            diags.append(Diagnostic("DFR1", f"file-scope variable {g.name} is not static",
                                    g.loc, g.name, "T8"))
    return _result("T8", diags)


def check_no_pointer_literals(m: CModule, cfg: RuleConfig = DEFAULT_CONFIG) -> RuleResult:
    """T10: integer constants never become pointers (configured null macros excepted)."""
    return _result("T10", [
        Diagnostic("DFR5", f"pointer literal {f.subject}: {f.detail}", f.loc, f.subject, "T10")
        for f in m.flags("pointer_literal") if f.macro is None or f.macro not in cfg.null_macros])


def _allowed(spelling: str, allowlist) -> bool:
    return spelling in allowlist or all(w in allowlist for w in spelling.split())


def check_typedef_usage(m: CModule, c: ISContract | None = None,
                        cfg: RuleConfig = DEFAULT_CONFIG) -> RuleResult:
    """T11: raw arithmetic types in declarations; advisory unless strict."""
    contracted = {}
    if c is not None:
        contracted = {f.name: f for f in c.entry_points}
        contracted.update({name: sig for name, (_, sig) in c.external_functions().items()})
    severity = "violation" if cfg.strict_advisory else "warning"
    diags = []
    for use in m.base_type_uses:
        if _allowed(use.spelling, cfg.typedef_allowlist):
            continue
        sig = use.signature
        if sig is not None and contracted.get(sig.name) == sig:
            continue
        diags.append(Diagnostic("DFR6", f"raw type `{use.spelling}` used for {use.subject}; "
                                "prefer a typedef", use.loc, use.subject, "T11", severity))
    return _result("T11", diags)


def check_no_extern(m: CModule, c: ISContract | None = None) -> RuleResult:
    """T13: no `extern`, except on entry point function declarations."""
    if c is not None:
        entries = set(c.entry_names)
    else:
        entries = {d.name for d in m.decls if d.declared_in == "header" and not d.is_static}
    diags = [Diagnostic("CFR10", f"extern used on {f.detail} {f.subject}", f.loc, f.subject, "T13")
             for f in m.flags("extern")
             if not (f.detail == "function" and f.subject in entries)]
    return _result("T13", diags)


def check_pointer_discipline(m: CModule, cfg: RuleConfig = DEFAULT_CONFIG) -> RuleResult:
    """T14: no pointer arithmetic and no casts to or from pointer types."""
    diags = [Diagnostic("DFR2", f"pointer arithmetic: {f.detail}", f.loc, f.subject, "T14")
             for f in m.flags("pointer_arith")]
    diags += [Diagnostic("DFR3", f"pointer cast: {f.detail}", f.loc, f.subject, "T14")
              for f in m.flags("pointer_cast") if f.macro is None or f.macro not in cfg.null_macros]
    return _result("T14", diags)


def _t9(m, c, cfg):
    from .dataflow import check_init_before_read
    return check_init_before_read(m, c)


def _t12(m, c, cfg):
    from .callorder import check_call_order
    return check_call_order(m, c)


TASK_CHECKS = {
    "T1": lambda m, c, cfg: check_call_permissions(m, c),
    "T2": lambda m, c, cfg: check_no_function_pointers(m),
    "T3": lambda m, c, cfg: check_header_purity(m),
    "T4": lambda m, c, cfg: check_includes(m),
    "T5": lambda m, c, cfg: check_entry_declarations(m, c),
    "T6": lambda m, c, cfg: check_entry_definitions(m, c),
    "T7": lambda m, c, cfg: check_local_functions(m, c),
    "T8": lambda m, c, cfg: check_globals_static(m),
    "T9": _t9,
    "T10": lambda m, c, cfg: check_no_pointer_literals(m, cfg),
    "T11": lambda m, c, cfg: check_typedef_usage(m, c, cfg),
    "T12": _t12,
    "T13": lambda m, c, cfg: check_no_extern(m, c),
    "T14": lambda m, c, cfg: check_pointer_discipline(m, cfg),
}


def run_tasks(m: CModule, c: ISContract | None, tasks=None,
              cfg: RuleConfig = DEFAULT_CONFIG) -> list[RuleResult]:
    """Run the selected tasks in id order; contract tasks are skipped without a contract."""
    selected = sorted(set(tasks) if tasks is not None else set(TASK_CHECKS), key=task_sort_key)
    results = []
    for task in selected:
        if task not in TASK_CHECKS:
            raise KeyError(f"unknown task {task}")
        if c is None and task in CONTRACT_TASKS:
            results.append(RuleResult.skipped(task, "no contract given"))
            continue
        started = time.perf_counter()
        r = TASK_CHECKS[task](m, c, cfg)
        r.duration = time.perf_counter() - started
        results.append(r)
    return results


__all__ = [name for name in dir() if name.startswith("check_")] + [
    "RuleConfig", "DEFAULT_CONFIG", "TASK_CHECKS", "run_tasks"]
