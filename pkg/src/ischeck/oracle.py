"""Brute-force reference semantics for the order and initialization checks.

Interprets function bodies directly on the syntax tree, taking every branch
both ways and running loops a bounded number of times, then replays every
admissible schedule of entry points. Meant for testing the static checks on
small modules, not for production use.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfront import nodes as n
from .cfront.model import CModule
from .contract import ISContract, order_closure


class BoundExceeded(Exception):
    def __init__(self, dimension: str, limit):
        self.dimension = dimension
        self.limit = limit
        super().__init__(f"enumeration bound exceeded: {dimension} > {limit}")


@dataclass(frozen=True)
class Bounds:
    max_schedule_length: int = 3
    max_unroll: int = 2
    max_paths: int = 20000


@dataclass(frozen=True)
class OracleResult:
    violation: bool
    schedule: tuple = ()
    trace: tuple = ()
    detail: tuple = ()  # (a, b) for call order, (entry, global) for initialization

    @property
    def verdict(self) -> str:
        return "violating-trace" if self.violation else "no-violation"


NO_VIOLATION = OracleResult(False)


def _root(e):
    while True:
        if isinstance(e, n.Ident):
            return e
        if isinstance(e, n.Index) and not e.base.ctype.is_pointer:
            e = e.base
        elif isinstance(e, n.Member) and not e.arrow:
            e = e.base
        else:
            return None


def _product(left, right, limit):
    out = list(dict.fromkeys(a + b for a in left for b in right))
    if len(out) > limit:
        raise BoundExceeded("paths", limit)
    return out


class Interpreter:
    """All event traces of module functions: ('call', f), ('read', g), ('write', g)."""

    def __init__(self, m: CModule, bounds: Bounds):
        self.m = m
        self.bounds = bounds
        self.limit = bounds.max_paths
        self._memo: dict[str, list[tuple]] = {}

    def traces(self, fn: str) -> list[tuple]:
        if fn not in self._memo:
            body = self.m.functions[fn].body
            self._memo[fn] = list(dict.fromkeys(t for t, _ in self.stmt(body)))
        return self._memo[fn]

    def _dedupe(self, results):
        out = list(dict.fromkeys(results))
        if len(out) > self.limit:
            raise BoundExceeded("paths", self.limit)
        return out

    def _global(self, e):
        if isinstance(e, n.Ident) and e.binding == "global" and e.name in self.m.tracked_globals:
            return e.name
        return None

    # -- expressions: lists of traces ------------------------------------

    def expr(self, e) -> list[tuple]:
        if e is None or isinstance(e, (n.Const, n.StringLit, n.SizeOf)):
            return [()]
        if isinstance(e, n.Ident):
            g = self._global(e)
            return [(("read", g),)] if g else [()]
        if isinstance(e, n.Assign):
            out = _product(self.expr(e.value), self.lvalue(e.target), self.limit)
            return _product(out, [self._update(e.target, e.op != "=")], self.limit)
        if isinstance(e, n.Unary):
            if e.op == "&":
                return self.lvalue(e.operand)
            if e.op in ("++", "--"):
                return _product(self.lvalue(e.operand), [self._update(e.operand, True)], self.limit)
            return self.expr(e.operand)
        if isinstance(e, n.Postfix):
            return _product(self.lvalue(e.operand), [self._update(e.operand, True)], self.limit)
        if isinstance(e, n.Binary):
            left = self.expr(e.left)
            both = _product(left, self.expr(e.right), self.limit)
            if e.op in ("&&", "||"):
                return self._dedupe(left + both)
            return both
        if isinstance(e, n.Conditional):
            arms = self.expr(e.then) + self.expr(e.other)
            return _product(self.expr(e.cond), self._dedupe(arms), self.limit)
        if isinstance(e, n.Call):
            out = [()]
            for arg in e.args:
                out = _product(out, self.expr(arg), self.limit)
            func = e.func
            if isinstance(func, n.Ident) and func.binding in ("function", "unknown"):
                if func.name in self.m.functions:
                    return _product(out, self.traces(func.name), self.limit)
                return _product(out, [(("call", func.name),)], self.limit)
            return _product(out, self.expr(func), self.limit)
        if isinstance(e, n.Index):
            return _product(self.expr(e.base), self.expr(e.index), self.limit)
        if isinstance(e, (n.Member,)):
            return self.expr(e.base)
        if isinstance(e, n.Cast):
            return self.expr(e.operand)
        if isinstance(e, n.InitList):
            out = [()]
            for _, item in e.items:
                out = _product(out, self.expr(item), self.limit)
            return out
        raise TypeError(f"unexpected expression {type(e).__name__}")

    def lvalue(self, e) -> list[tuple]:
        if isinstance(e, n.Ident):
            return [()]
        if isinstance(e, n.Index):
            base = self.expr(e.base) if e.base.ctype.is_pointer else self.lvalue(e.base)
            return _product(base, self.expr(e.index), self.limit)
        if isinstance(e, n.Member):
            return self.expr(e.base) if e.arrow else self.lvalue(e.base)
        if isinstance(e, n.Unary) and e.op == "*":
            return self.expr(e.operand)
        return self.expr(e)

    def _update(self, target, reads: bool) -> tuple:
        g = self._global(_root(target))
        if g is None:
            return ()
        events = (("read", g),) if reads else ()
        # only a whole-object store counts as initializing the object
        if isinstance(target, n.Ident):
            events += (("write", g),)
        return events

    def cond(self, e) -> list[tuple[tuple, bool]]:
        if isinstance(e, n.Binary) and e.op in ("&&", "||"):
            short = e.op == "||"
            out = []
            for lt, lv in self.cond(e.left):
                if lv == short:
                    out.append((lt, lv))
                else:
                    out.extend((lt + rt, rv) for rt, rv in self.cond(e.right))
            return self._dedupe(out)
        if isinstance(e, n.Unary) and e.op == "!":
            return [(t, not v) for t, v in self.cond(e.operand)]
        return [(t, v) for t in self.expr(e) for v in (True, False)]

    # -- statements: lists of (trace, outcome) ---------------------------

    def seq(self, results, stmts):
        for s in stmts:
            nxt = []
            for t, o in results:
                if o != "normal":
                    nxt.append((t, o))
                else:
                    nxt.extend((t + t2, o2) for t2, o2 in self.stmt(s))
            results = self._dedupe(nxt)
        return results

    def stmt(self, s):
        if s is None:
            return [((), "normal")]
        if isinstance(s, n.Compound):
            return self.seq([((), "normal")], s.items)
        if isinstance(s, n.DeclStmt):
            out = [()]
            for item in s.decl.items:
                if item.init is not None:
                    out = _product(out, self.expr(item.init), self.limit)
            return [(t, "normal") for t in out]
        if isinstance(s, n.ExprStmt):
            return [(t, "normal") for t in self.expr(s.expr)]
        if isinstance(s, n.If):
            out = []
            for ct, v in self.cond(s.cond):
                branch = s.then if v else s.other
                out.extend((ct + t, o) for t, o in self.stmt(branch))
            return self._dedupe(out)
        if isinstance(s, (n.While, n.For)):
            return self.loop(s)
        if isinstance(s, n.DoWhile):
            return self.do_loop(s)
        if isinstance(s, n.Switch):
            return self.switch(s)
        if isinstance(s, n.Case):
            return self.stmt(s.stmt)
        if isinstance(s, n.Break):
            return [((), "break")]
        if isinstance(s, n.Continue):
            return [((), "continue")]
        if isinstance(s, n.Return):
            return [(t, "return") for t in self.expr(s.value)]
        raise TypeError(f"unexpected statement {type(s).__name__}")

    def loop(self, s):
        prefix = [()]
        if isinstance(s, n.For):
            prefix = [t for t, _ in self.stmt(s.init)] if s.init is not None else [()]
        conds = self.cond(s.cond) if s.cond is not None else [((), True), ((), False)]
        step = self.expr(s.step) if isinstance(s, n.For) else [()]
        out = []
        frontier = prefix
        for i in range(self.bounds.max_unroll + 1):
            nxt = []
            for t in frontier:
                for ct, v in conds:
                    if not v:
                        out.append((t + ct, "normal"))
                    elif i < self.bounds.max_unroll:
                        for bt, o in self.stmt(s.body):
                            if o == "break":
                                out.append((t + ct + bt, "normal"))
                            elif o == "return":
                                out.append((t + ct + bt, "return"))
                            else:
                                nxt.extend(t + ct + bt + st for st in step)
            frontier = self._dedupe(nxt)
            out = self._dedupe(out)
        return out

    def do_loop(self, s):
        out = []
        frontier = [()]
        for i in range(1, max(self.bounds.max_unroll, 1) + 1):
            nxt = []
            for t in frontier:
                for bt, o in self.stmt(s.body):
                    if o == "break":
                        out.append((t + bt, "normal"))
                    elif o == "return":
                        out.append((t + bt, "return"))
                        continue
                    else:
                        for ct, v in self.cond(s.cond):
                            if not v:
                                out.append((t + bt + ct, "normal"))
                            elif i < self.bounds.max_unroll:
                                nxt.append(t + bt + ct)
            frontier = self._dedupe(nxt)
            out = self._dedupe(out)
        return out

    def switch(self, s):
        items: list = []  # statements, with ("label", is_default) markers

        def flatten(stmt):
            if isinstance(stmt, n.Case):
                items.append(("label", stmt.value is None))
                flatten(stmt.stmt)
            else:
                items.append(stmt)

        body = s.body.items if isinstance(s.body, n.Compound) else [s.body]
        for item in body:
            flatten(item)
        starts = [i for i, it in enumerate(items) if isinstance(it, tuple)]
        has_default = any(it[1] for it in items if isinstance(it, tuple))
        out = []
        for ct in self.expr(s.cond):
            if not has_default:
                out.append((ct, "normal"))
            for start in starts:
                stmts = [it for it in items[start:] if not isinstance(it, tuple)]
                for t, o in self.seq([((), "normal")], stmts):
                    out.append((ct + t, "normal" if o == "break" else o))
        return self._dedupe(out)


def _entry_traces(interp: Interpreter, entries, keep) -> dict[str, list[tuple]]:
    out = {}
    for e in entries:
        projected = (tuple(ev for ev in t if ev[0] in keep) for t in interp.traces(e))
        out[e] = list(dict.fromkeys(projected))
    return out


def _first_violation(trace, called, constraints):
    seen = set(called)
    for i, (_, x) in enumerate(trace):
        if x not in seen:
            for a, b in constraints:
                if x == b and a not in seen:
                    return i, (a, b)
        seen.add(x)
    return None, seen


def enumerate_oracle(m: CModule, c: ISContract, bounds: Bounds = Bounds()) -> OracleResult:
    """Search admissible schedules for a run whose first call of b has no earlier call of a."""
    constraints = [(o.before, o.after) for o in c.external_order]
    if not constraints:
        return NO_VIOLATION
    entries = [e for e in c.entry_names if e in m.functions]
    if not entries:
        return NO_VIOLATION
    if len(entries) > bounds.max_schedule_length:
        raise BoundExceeded("schedule_length", bounds.max_schedule_length)
    closure = order_closure(c.entry_order)
    preds = {e: {p for p, q in closure if q == e and p in entries} for e in entries}
    traces = _entry_traces(Interpreter(m, bounds), entries, {"call"})

    # breadth-first over (entries seen, externals called) so the shortest schedule is reported
    frontier = [(frozenset(), frozenset(), (), ())]
    visited = {(frozenset(), frozenset())}
    for length in range(1, bounds.max_schedule_length + 1):
        nxt = []
        for seen, called, schedule, run in frontier:
            for e in entries:
                if e not in seen and not preds[e] <= seen:
                    continue
                now_seen = seen | {e}
                if len(entries) - len(now_seen) > bounds.max_schedule_length - length:
                    continue
                for t in traces[e]:
                    idx, info = _first_violation(t, called, constraints)
                    if idx is not None:
                        return OracleResult(True, schedule + (e,),
                                            run + tuple(x for _, x in t[:idx + 1]), info)
                    state = (now_seen, frozenset(info))
                    if state not in visited:
                        visited.add(state)
                        nxt.append((now_seen, frozenset(info), schedule + (e,),
                                    run + tuple(x for _, x in t)))
        frontier = nxt
    return NO_VIOLATION


def enumerate_init_oracle(m: CModule, c: ISContract, bounds: Bounds = Bounds()) -> OracleResult:
    """Run every linear extension of the entry order (each entry once) looking for a
    read of a module global that is neither initialized nor written yet."""
    from .dataflow import t9_entry_points

    entries = t9_entry_points(m, c)
    closure = order_closure(c.entry_order)
    preds = {e: {p for p, q in closure if q == e and p in entries} for e in entries}
    traces = _entry_traces(Interpreter(m, bounds), entries, {"read", "write"})
    start = (frozenset(), frozenset(m.initialized_globals))
    frontier = [(start, ())]
    visited = {start}
    while frontier:
        nxt = []
        for (placed, written), schedule in frontier:
            for e in entries:
                if e in placed or not preds[e] <= placed:
                    continue
                for t in traces[e]:
                    w = set(written)
                    for kind, g in t:
                        if kind == "read" and g not in w:
                            return OracleResult(True, schedule + (e,), t, (e, g))
                        if kind == "write":
                            w.add(g)
                    state = (placed | {e}, frozenset(w))
                    if state not in visited:
                        visited.add(state)
                        nxt.append((state, schedule + (e,)))
        frontier = nxt
    return NO_VIOLATION
