"""Per-function control-flow graphs over global-variable and call events.

Blocks hold events in evaluation order: reads and writes of tracked
file-scope variables, address-of events, calls and returns. `&&`, `||` and
`?:` become branches. Every loop gets an exit edge from its header, so a
loop body may run zero times on some path; `do`/`while` bodies get the
same bypass edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import SourceLoc
from . import nodes as n


@dataclass(frozen=True)
class Event:
    kind: str  # read | write | addr | call | return
    name: str
    loc: SourceLoc
    full: bool = True  # write covers the whole object
    local: bool = False  # call to a function defined in the module
    via_pointer: bool = False


@dataclass
class Block:
    id: int
    events: list[Event] = field(default_factory=list)
    succs: list[int] = field(default_factory=list)


@dataclass
class Cfg:
    fn: str
    blocks: dict[int, Block]
    entry: int
    exit: int

    def preds(self) -> dict[int, list[int]]:
        out = {b: [] for b in self.blocks}
        for b in self.blocks.values():
            for s in b.succs:
                out[s].append(b.id)
        return out

    def events(self):
        for bid in sorted(self.blocks):
            yield from self.blocks[bid].events

    def called_names(self) -> set[str]:
        return {e.name for e in self.events() if e.kind == "call" and not e.via_pointer}

    def reverse_postorder(self) -> list[int]:
        seen, order = set(), []

        def visit(b):
            seen.add(b)
            for s in self.blocks[b].succs:
                if s not in seen:
                    visit(s)
            order.append(b)

        visit(self.entry)
        return order[::-1]


class CfgError(Exception):
    pass


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


class _Builder:
    def __init__(self, fn: str, local_functions, tracked):
        self.fn = fn
        self.local = set(local_functions)
        self.tracked = set(tracked)
        self.blocks: dict[int, Block] = {}
        self.entry = self.new()
        self.exit = self.new()
        self.cur = self.entry
        self.breaks: list[int] = []
        self.continues: list[int] = []
        self.switches: list[list] = []  # [dispatch block, has default]

    def new(self) -> int:
        bid = len(self.blocks)
        self.blocks[bid] = Block(bid)
        return bid

    def edge(self, a: int, b: int):
        if b not in self.blocks[a].succs:
            self.blocks[a].succs.append(b)

    def jump(self, target: int):
        self.edge(self.cur, target)
        self.cur = self.new()  # whatever follows is unreachable

    def emit(self, kind, name, loc, **kw):
        self.blocks[self.cur].events.append(Event(kind, name, loc, **kw))

    def tracked_global(self, e) -> str | None:
        if isinstance(e, n.Ident) and e.binding == "global" and e.name in self.tracked:
            return e.name
        return None

    # -- expressions -------------------------------------------------------

    def lvalue(self, e):
        """Evaluate the sub-expressions of an lvalue without reading its object."""
        if isinstance(e, n.Ident):
            return
        if isinstance(e, n.Index):
            if e.base.ctype.is_pointer:
                self.value(e.base)
            else:
                self.lvalue(e.base)
            self.value(e.index)
        elif isinstance(e, n.Member):
            if e.arrow:
                self.value(e.base)
            else:
                self.lvalue(e.base)
        elif isinstance(e, n.Unary) and e.op == "*":
            self.value(e.operand)
        else:
            self.value(e)

    def update(self, target, loc, read: bool):
        self.lvalue(target)
        g = self.tracked_global(_root(target))
        if g is not None:
            if read:
                self.emit("read", g, loc)
            self.emit("write", g, loc, full=isinstance(target, n.Ident))

    def value(self, e):
        if e is None:
            return
        if isinstance(e, n.Ident):
            g = self.tracked_global(e)
            if g is not None:
                self.emit("read", g, e.loc)
        elif isinstance(e, (n.Const, n.StringLit, n.SizeOf)):
            return
        elif isinstance(e, n.Unary):
            if e.op == "&":
                self.lvalue(e.operand)
                g = self.tracked_global(_root(e.operand))
                if g is not None:
                    self.emit("addr", g, e.loc)
            elif e.op in ("++", "--"):
                self.update(e.operand, e.loc, read=True)
            else:
                self.value(e.operand)
        elif isinstance(e, n.Postfix):
            self.update(e.operand, e.loc, read=True)
        elif isinstance(e, n.Binary):
            if e.op in ("&&", "||"):
                self.value(e.left)
                rhs, join = self.new(), self.new()
                self.edge(self.cur, rhs)
                self.edge(self.cur, join)
                self.cur = rhs
                self.value(e.right)
                self.edge(self.cur, join)
                self.cur = join
            else:
                self.value(e.left)
                self.value(e.right)
        elif isinstance(e, n.Assign):
            self.value(e.value)
            self.update(e.target, e.loc, read=e.op != "=")
        elif isinstance(e, n.Conditional):
            self.value(e.cond)
            t, f, join = self.new(), self.new(), self.new()
            self.edge(self.cur, t)
            self.edge(self.cur, f)
            self.cur = t
            self.value(e.then)
            self.edge(self.cur, join)
            self.cur = f
            self.value(e.other)
            self.edge(self.cur, join)
            self.cur = join
        elif isinstance(e, n.Call):
            for arg in e.args:
                self.value(arg)
            func = e.func
            if isinstance(func, n.Ident) and func.binding in ("function", "unknown"):
                self.emit("call", func.name, e.loc, local=func.name in self.local)
            else:
                self.value(func)
                name = func.name if isinstance(func, n.Ident) else "<indirect>"
                self.emit("call", name, e.loc, via_pointer=True)
        elif isinstance(e, n.Index):
            self.value(e.base)
            self.value(e.index)
        elif isinstance(e, n.Member):
            self.value(e.base)
        elif isinstance(e, n.Cast):
            self.value(e.operand)
        elif isinstance(e, n.InitList):
            for _, item in e.items:
                self.value(item)
        else:
            raise CfgError(f"unexpected expression {type(e).__name__}")

    def cond(self, e, t: int, f: int):
        if isinstance(e, n.Binary) and e.op == "&&":
            mid = self.new()
            self.cond(e.left, mid, f)
            self.cur = mid
            self.cond(e.right, t, f)
        elif isinstance(e, n.Binary) and e.op == "||":
            mid = self.new()
            self.cond(e.left, t, mid)
            self.cur = mid
            self.cond(e.right, t, f)
        elif isinstance(e, n.Unary) and e.op == "!":
            self.cond(e.operand, f, t)
        else:
            self.value(e)
            self.edge(self.cur, t)
            self.edge(self.cur, f)

    # -- statements --------------------------------------------------------

    def stmt(self, s):
        if s is None:
            return
        if isinstance(s, n.Compound):
            for item in s.items:
                self.stmt(item)
        elif isinstance(s, n.DeclStmt):
            for item in s.decl.items:
                if item.init is not None:
                    self.value(item.init)
        elif isinstance(s, n.ExprStmt):
            self.value(s.expr)
        elif isinstance(s, n.If):
            t, join = self.new(), self.new()
            f = self.new() if s.other is not None else join
            self.cond(s.cond, t, f)
            self.cur = t
            self.stmt(s.then)
            self.edge(self.cur, join)
            if s.other is not None:
                self.cur = f
                self.stmt(s.other)
                self.edge(self.cur, join)
            self.cur = join
        elif isinstance(s, n.While):
            header, body, done = self.new(), self.new(), self.new()
            self.edge(self.cur, header)
            self.cur = header
            self.cond(s.cond, body, done)
            self.loop_body(s.body, body, header, done, header)
        elif isinstance(s, n.DoWhile):
            body, test, done = self.new(), self.new(), self.new()
            self.edge(self.cur, body)
            self.edge(self.cur, done)  # analyzed as zero or more iterations
            self.loop_body(s.body, body, test, done, test)
            self.cur = test
            self.cond(s.cond, body, done)
            self.cur = done
        elif isinstance(s, n.For):
            self.stmt(s.init)
            header, body, step, done = self.new(), self.new(), self.new(), self.new()
            self.edge(self.cur, header)
            self.cur = header
            if s.cond is not None:
                self.cond(s.cond, body, done)
            else:
                self.edge(header, body)
                self.edge(header, done)
            self.loop_body(s.body, body, step, done, step)
            self.cur = step
            self.value(s.step)
            self.edge(self.cur, header)
            self.cur = done
        elif isinstance(s, n.Switch):
            self.value(s.cond)
            dispatch, done = self.cur, self.new()
            self.switches.append([dispatch, False])
            self.breaks.append(done)
            self.cur = self.new()  # code before the first label is unreachable
            self.stmt(s.body)
            self.edge(self.cur, done)
            self.breaks.pop()
            _, has_default = self.switches.pop()
            if not has_default:
                self.edge(dispatch, done)
            self.cur = done
        elif isinstance(s, n.Case):
            if not self.switches:
                raise CfgError("case label outside switch")
            label = self.new()
            self.edge(self.cur, label)  # fallthrough
            self.edge(self.switches[-1][0], label)
            if s.value is None:
                self.switches[-1][1] = True
            self.cur = label
            self.stmt(s.stmt)
        elif isinstance(s, n.Break):
            self.jump(self.breaks[-1])
        elif isinstance(s, n.Continue):
            self.jump(self.continues[-1])
        elif isinstance(s, n.Return):
            self.value(s.value)
            self.emit("return", "", s.loc)
            self.jump(self.exit)
        else:
            raise CfgError(f"unexpected statement {type(s).__name__}")

    def loop_body(self, body, start, back, done, cont):
        self.breaks.append(done)
        self.continues.append(cont)
        self.cur = start
        self.stmt(body)
        self.edge(self.cur, back)
        self.breaks.pop()
        self.continues.pop()
        self.cur = done

    def finish(self) -> Cfg:
        self.edge(self.cur, self.exit)
        return _simplify(Cfg(self.fn, self.blocks, self.entry, self.exit))


def _simplify(cfg: Cfg) -> Cfg:
    blocks = cfg.blocks
    reachable = set(cfg.reverse_postorder())
    if cfg.exit not in reachable:
        raise CfgError(f"{cfg.fn}: function exit is unreachable")
    blocks = {b: blk for b, blk in blocks.items() if b in reachable}
    exit_id = cfg.exit
    changed = True
    while changed:
        changed = False
        preds: dict[int, list[int]] = {b: [] for b in blocks}
        for blk in blocks.values():
            for s in blk.succs:
                preds[s].append(blk.id)
        for a in sorted(blocks):
            blk = blocks[a]
            if len(blk.succs) != 1:
                continue
            b = blk.succs[0]
            if b == a or b == cfg.entry or preds[b] != [a]:
                continue
            blk.events.extend(blocks[b].events)
            blk.succs = list(blocks[b].succs)
            if b == exit_id:
                exit_id = a
            del blocks[b]
            changed = True
            break
    tmp = Cfg(cfg.fn, blocks, cfg.entry, exit_id)
    order = tmp.reverse_postorder()
    renum = {old: i for i, old in enumerate(order)}
    new_blocks = {renum[old]: Block(renum[old], blocks[old].events,
                                    [renum[s] for s in blocks[old].succs]) for old in order}
    return Cfg(cfg.fn, new_blocks, renum[cfg.entry], renum[exit_id])


def build_cfg(fdef: n.FunctionDef, local_functions=(), tracked=()) -> Cfg:
    b = _Builder(fdef.name, local_functions, tracked)
    b.stmt(fdef.body)
    cfg = b.finish()
    check_well_formed(cfg)
    return cfg


def dominators(cfg: Cfg) -> dict[int, set[int]]:
    order = cfg.reverse_postorder()
    preds = cfg.preds()
    dom = {b: set(cfg.blocks) for b in cfg.blocks}
    dom[cfg.entry] = {cfg.entry}
    changed = True
    while changed:
        changed = False
        for b in order:
            if b == cfg.entry:
                continue
            ps = [dom[p] for p in preds[b]]
            new = set.intersection(*ps) | {b} if ps else {b}
            if new != dom[b]:
                dom[b] = new
                changed = True
    return dom


def check_well_formed(cfg: Cfg):
    """Raise CfgError unless edges are closed, entry dominates all and exit is reachable."""
    for blk in cfg.blocks.values():
        for s in blk.succs:
            if s not in cfg.blocks:
                raise CfgError(f"{cfg.fn}: dangling edge {blk.id}->{s}")
    if cfg.blocks[cfg.exit].succs:
        raise CfgError(f"{cfg.fn}: exit block has successors")
    if set(cfg.reverse_postorder()) != set(cfg.blocks):
        raise CfgError(f"{cfg.fn}: unreachable blocks")
    for b, ds in dominators(cfg).items():
        if cfg.entry not in ds:
            raise CfgError(f"{cfg.fn}: entry does not dominate block {b}")
    preds = cfg.preds()
    seen, stack = set(), [cfg.exit]
    while stack:
        b = stack.pop()
        if b in seen:
            continue
        seen.add(b)
        stack.extend(preds[b])
    if seen != set(cfg.blocks):
        raise CfgError(f"{cfg.fn}: exit unreachable from blocks {sorted(set(cfg.blocks) - seen)}")
