"""External call order checking (rule CFR2, task T12).

A constraint `a < b` holds when, in every admissible schedule of entry
points and on every path, the first call of `b` is preceded by a call of
`a`. The check is conservative: a site of `b` is accepted only if `a` is
called on every path leading to it within the same entry point, or if an
entry point ordered strictly earlier calls `a` on every path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cfront.cfg import Cfg
from .cfront.model import CModule
from .contract import ISContract, order_closure
from .diagnostics import Diagnostic, RuleResult, SourceLoc
from .oracle import Bounds, BoundExceeded, OracleResult, enumerate_oracle  # noqa: F401


@dataclass(frozen=True, order=True)
class CallSiteRef:
    """An external call site, reached through a chain of call locations."""
    callee: str
    chain: tuple[SourceLoc, ...]

    @property
    def loc(self) -> SourceLoc:
        return self.chain[-1]


@dataclass(frozen=True)
class CallSequenceSummary:
    fn: str
    must_call: frozenset = frozenset()
    may_call: frozenset = frozenset()
    must_before: dict = field(default_factory=dict, hash=False)  # CallSiteRef -> frozenset


def _summarize(cfg: Cfg, summaries: dict[str, CallSequenceSummary]) -> CallSequenceSummary:
    order = cfg.reverse_postorder()
    preds = cfg.preds()
    out: dict[int, frozenset | None] = {b: None for b in cfg.blocks}

    def transfer(bid, called, sites=None, may=None):
        c = set(called)
        for ev in cfg.blocks[bid].events:
            if ev.kind != "call" or ev.via_pointer:
                continue
            if ev.local:
                s = summaries.get(ev.name)
                if s is None:
                    continue
                if sites is not None:
                    for ref, before in s.must_before.items():
                        _record(sites, CallSiteRef(ref.callee, (ev.loc,) + ref.chain),
                                frozenset(c) | before)
                    may.update(s.may_call)
                c |= s.must_call
            else:
                if sites is not None:
                    _record(sites, CallSiteRef(ev.name, (ev.loc,)), frozenset(c))
                    may.add(ev.name)
                c.add(ev.name)
        return frozenset(c)

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
    sites: dict[CallSiteRef, frozenset] = {}
    may: set[str] = set()
    for b in order:
        transfer(b, state_in(b), sites, may)
    return CallSequenceSummary(cfg.fn, out[cfg.exit], frozenset(may), dict(sorted(sites.items())))


def _record(sites, ref, before):
    # two sites can share a chain when a macro expands to several calls
    sites[ref] = sites[ref] & before if ref in sites else before


def summarize_call_sequences(m: CModule) -> dict[str, CallSequenceSummary]:
    from .dataflow import _local_call_order

    summaries: dict[str, CallSequenceSummary] = {}
    for f in _local_call_order(m):
        summaries[f] = _summarize(m.defs[f], summaries)
    return summaries


def check_call_order(m: CModule, c: ISContract, summaries=None) -> RuleResult:
    started = time.perf_counter()
    summaries = summaries if summaries is not None else summarize_call_sequences(m)
    closure = order_closure(c.entry_order)
    order_closure(c.external_order)  # a cyclic order cannot be satisfied
    entries = [e for e in c.entry_names if e in summaries]
    diags = []
    for o in c.external_order:
        a, b = o.before, o.after
        for e in entries:
            earlier = [p for p in entries if (p, e) in closure and a in summaries[p].must_call]
            if earlier:
                continue
            for ref, before in summaries[e].must_before.items():
                if ref.callee != b or a in before:
                    continue
                via = ""
                if len(ref.chain) > 1:
                    via = " (reached via " + ", ".join(str(l) for l in ref.chain[:-1]) + ")"
                diags.append(Diagnostic(
                    "CFR2", f"{b} may be called in {e} without a prior call of {a} "
                    f"(constraint {a} < {b}){via}", ref.loc, f"{a}<{b}", "T12"))
    result = RuleResult.from_diagnostics("T12", diags)
    result.duration = time.perf_counter() - started
    return result
