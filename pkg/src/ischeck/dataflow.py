"""Initialized-before-read checking for module globals (task T9).

Each function gets an effect summary: the globals it writes on every path
and the globals some path reads before writing. Calls to module functions
splice the callee's summary in at the call site; calls leaving the module
have no effect on module globals.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cfront.cfg import Cfg
from .cfront.model import CModule
from .contract import ISContract, order_closure
from .diagnostics import Diagnostic, RuleResult


@dataclass(frozen=True)
class EffectSummary:
    fn: str
    must_write: frozenset = frozenset()
    may_read_before_write: frozenset = frozenset()
    # where each possibly-unwritten read happens (first one per global)
    read_locs: dict = field(default_factory=dict, compare=False, repr=False)


def _local_call_order(m: CModule) -> list[str]:
    """Module functions, callees before callers."""
    order, seen = [], set()

    def visit(f):
        seen.add(f)
        for callee in sorted(m.defs[f].called_names()):
            if callee in m.defs and callee not in seen:
                visit(callee)
        order.append(f)

    for f in sorted(m.defs):
        if f not in seen:
            visit(f)
    return order


def _summarize(cfg: Cfg, summaries: dict[str, EffectSummary]) -> EffectSummary:
    order = cfg.reverse_postorder()
    preds = cfg.preds()
    out: dict[int, frozenset | None] = {b: None for b in cfg.blocks}  # None = not yet reached

    def transfer(bid, written, reads=None):
        w = set(written)
        for ev in cfg.blocks[bid].events:
            if ev.kind == "read":
                if ev.name not in w and reads is not None:
                    reads.setdefault(ev.name, ev.loc)
            elif ev.kind == "write":
                if ev.full:
                    w.add(ev.name)
            elif ev.kind == "call" and ev.local and ev.name in summaries:
                s = summaries[ev.name]
                if reads is not None:
                    for g in sorted(s.may_read_before_write - w):
                        reads.setdefault(g, ev.loc)
                w |= s.must_write
        return frozenset(w)

    def state_in(bid):
        if bid == cfg.entry:
            return frozenset()
        ins = [out[p] for p in preds[bid] if out[p] is not None]
        return frozenset.intersection(*ins) if ins else None

    changed = True
    while changed:
        changed = False
        for b in order:
            s = state_in(b)
            if s is None:
                continue
            new = transfer(b, s)
            if new != out[b]:
                out[b] = new
                changed = True
    reads: dict = {}
    for b in order:
        transfer(b, state_in(b), reads)
    return EffectSummary(cfg.fn, out[cfg.exit], frozenset(reads), reads)


def compute_effects(m: CModule) -> dict[str, EffectSummary]:
    summaries: dict[str, EffectSummary] = {}
    for f in _local_call_order(m):
        summaries[f] = _summarize(m.defs[f], summaries)
    return summaries


def t9_entry_points(m: CModule, c: ISContract) -> list[str]:
    """Functions callable from outside: contract entries plus any other non-static definition."""
    names = [e for e in c.entry_names if e in m.defs]
    for f in sorted(m.defs):
        site = m.definition(f)
        if f not in names and site is not None and not site.is_static:
            names.append(f)
    return names


def check_init_before_read(m: CModule, c: ISContract, effects=None) -> RuleResult:
    started = time.perf_counter()
    effects = effects if effects is not None else compute_effects(m)
    closure = order_closure(c.entry_order)
    initialized = m.initialized_globals
    diags = []
    for e in t9_entry_points(m, c):
        summary = effects[e]
        for g in sorted(summary.may_read_before_write):
            if g in initialized:
                continue
            preds = sorted(p for p, q in closure if q == e and p in effects
                           and g in effects[p].must_write)
            if preds:
                continue
            loc = summary.read_locs.get(g, m.definition(e).loc)
            diags.append(Diagnostic(
                "DFR4", f"{g} may be read in {e} before it is initialized or written "
                "(no explicit initializer and no earlier entry point writes it)",
                loc, g, "T9"))
    for flag in m.flags("address_taken"):
        if flag.subject not in m.tracked_globals:
            continue
        diags.append(Diagnostic("DFR4", f"address of {flag.subject} is taken ({flag.detail}); "
                                "its initialization cannot be tracked", flag.loc, flag.subject, "T9"))
    result = RuleResult.from_diagnostics("T9", diags)
    result.duration = time.perf_counter() - started
    return result

