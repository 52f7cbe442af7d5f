"""The `.is` interface contract language: parsing, validation, rendering.

A contract names a module's entry points, the order in which they are
assumed to be called, the external functions it may call (grouped by the
module or header providing them) and the order those calls must respect:

    module tmon {
      entry_points: { void tmon_init(void), int tmon_step(void) }
      entry_order: { tmon_init < tmon_step }
      external_calls: {
        sensors: { void tmon_sens_create(void), int tmon_sens_read(void) }
      }
      external_call_order: { tmon_sens_create < tmon_sens_read }
    }
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain

from .cfront.lexer import FrontendError, Token, tokenize_source
from .diagnostics import CONTRACT_RULE, Diagnostic, SourceLoc
from .signature import FunSignature, signature_from_declarator

SECTION_ALIASES = {
    "entry_points": "entry_points",
    "entry_functions": "entry_points",
    "EntryPoint": "entry_points",
    "entry_order": "entry_order",
    "EntryOrder": "entry_order",
    "external_calls": "external_calls",
    "ExtCalls": "external_calls",
    "external_call_order": "external_order",
    "external_order": "external_order",
    "ExtOrder": "external_order",
}
CANONICAL_KEYWORDS = {
    "entry_points": "entry_points",
    "entry_order": "entry_order",
    "external_calls": "external_calls",
    "external_order": "external_call_order",
}


class ContractSyntaxError(Exception):
    def __init__(self, message: str, loc: SourceLoc):
        self.message = message
        self.loc = loc
        self.line = loc.line
        self.column = loc.column
        super().__init__(f"{loc}: {message}")


class CycleError(Exception):
    def __init__(self, vertices):
        self.vertices = frozenset(vertices)
        super().__init__("order constraints form a cycle through " + ", ".join(sorted(self.vertices)))


@dataclass(frozen=True)
class OrderConstraint:
    before: str
    after: str
    # `(X)` annotations on either side; kept for rendering, ignored by equality
    annotations: tuple = field(default=((), ()), compare=False)

    def __post_init__(self):
        if self.before == self.after:
            raise ValueError(f"constraint orders {self.before} before itself")

    def render(self) -> str:
        left, right = self.annotations
        return (self.before + "".join(f"({a})" for a in left) + " < "
                + self.after + "".join(f"({a})" for a in right))


@dataclass(frozen=True)
class ExternalGroup:
    group_id: str
    decls: tuple[FunSignature, ...]

    @property
    def is_header(self) -> bool:
        return self.group_id.endswith(".h")


@dataclass(frozen=True)
class ISContract:
    module_name: str
    entry_points: tuple[FunSignature, ...] = ()
    entry_order: tuple[OrderConstraint, ...] = ()
    external_groups: tuple[ExternalGroup, ...] = ()
    external_order: tuple[OrderConstraint, ...] = ()
    # section -> keyword spelling used in the source text
    keywords: tuple = field(default=(), compare=False)
    locations: dict = field(default_factory=dict, compare=False, repr=False)
    path: str = field(default="<contract>", compare=False)

    @property
    def entry_names(self) -> list[str]:
        return [f.name for f in self.entry_points]

    def external_functions(self) -> dict[str, tuple[ExternalGroup, FunSignature]]:
        out = {}
        for g in self.external_groups:
            for f in g.decls:
                out.setdefault(f.name, (g, f))
        return out

    def entry(self, name: str) -> FunSignature | None:
        for f in self.entry_points:
            if f.name == name:
                return f
        return None

    def loc_of(self, name: str) -> SourceLoc:
        return self.locations.get(name, SourceLoc(self.path))

    def keyword(self, section: str) -> str | None:
        return dict(self.keywords).get(section)


class _ContractParser:
    def __init__(self, text: str, path: str):
        self.path = path
        try:
            self.tokens = tokenize_source(text, path)
        except FrontendError as e:
            raise ContractSyntaxError(e.message, e.loc or SourceLoc(path)) from None
        self.pos = 0
        self.locations: dict[str, SourceLoc] = {}

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else None

    def here(self) -> SourceLoc:
        t = self.peek()
        if t is not None:
            return t.loc
        if self.tokens:
            last = self.tokens[-1]
            return SourceLoc(self.path, last.line, last.col + len(last.value))
        return SourceLoc(self.path)

    def error(self, message: str):
        t = self.peek()
        found = repr(t.value) if t is not None else "end of input"
        raise ContractSyntaxError(f"{message}, found {found}", self.here())

    def at(self, value: str) -> bool:
        t = self.peek()
        return t is not None and t.value == value and t.kind in ("id", "punct")

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.pos += 1
            return True
        return False

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.error(f"expected {value!r}")
        self.pos += 1
        return self.tokens[self.pos - 1]

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t is None or t.kind != "id":
            self.error(f"expected {what}")
        self.pos += 1
        return t

    def parse(self) -> ISContract:
        kw = self.peek()
        if kw is None or kw.value != "module":
            self.error("expected 'module'")
        self.pos += 1
        name = self.ident("module name")
        self.expect("{")
        sections: dict[str, object] = {}
        keywords = []
        while not self.accept("}"):
            t = self.ident("section keyword")
            section = SECTION_ALIASES.get(t.value)
            if section is None:
                raise ContractSyntaxError(f"unknown section keyword {t.value!r}", t.loc)
            if section in sections:
                raise ContractSyntaxError(f"duplicate section {t.value!r}", t.loc)
            keywords.append((section, t.value))
            self.accept(":")
            self.expect("{")
            if section == "entry_points":
                sections[section] = tuple(self._fundecls())
            elif section == "external_calls":
                sections[section] = tuple(self._groups())
            else:
                sections[section] = tuple(self._constraints())
        if self.peek() is not None:
            self.error("unexpected text after module")
        return ISContract(
            module_name=name.value,
            entry_points=sections.get("entry_points", ()),
            entry_order=sections.get("entry_order", ()),
            external_groups=sections.get("external_calls", ()),
            external_order=sections.get("external_order", ()),
            keywords=tuple(keywords),
            locations=self.locations,
            path=self.path,
        )

    def _fundecls(self) -> list[FunSignature]:
        """Function declarations up to and including the closing brace."""
        out = []
        while not self.accept("}"):
            start = self.pos
            depth = 0
            while True:
                t = self.peek()
                if t is None:
                    self.error("unterminated declaration list")
                if t.value in ("(", "[") and t.kind == "punct":
                    depth += 1
                elif t.value in (")", "]") and t.kind == "punct":
                    depth -= 1
                elif depth == 0 and t.kind == "punct" and t.value in (",", "}", "{", ";"):
                    break
                self.pos += 1
            if self.pos == start:
                self.error("expected function declaration")
            out.append(self._fundecl(self.tokens[start:self.pos]))
            if not self.accept(","):
                self.expect("}")
                break
        return out

    def _fundecl(self, tokens: list[Token]) -> FunSignature:
        from .cfront.parser import Parser

        p = Parser(tokens, lenient_typedefs=True)
        try:
            specs = p.parse_decl_specs()
            if specs.storage or specs.inline:
                raise ContractSyntaxError("storage class in contract declaration", specs.loc)
            d = p.parse_declarator(specs.base)
            p.expect_end()
        except FrontendError as e:
            raise ContractSyntaxError(e.message, e.loc or tokens[0].loc) from None
        if d.params is None or not d.is_simple_function:
            raise ContractSyntaxError(f"{d.name!r} is not a function declaration", d.loc)
        self.locations.setdefault(d.name, d.loc)
        return signature_from_declarator(specs, d)

    def _groups(self) -> list[ExternalGroup]:
        out = []
        while not self.accept("}"):
            first = self.ident("group name")
            parts = [first.value]
            last = first
            # `rtdb.h` lexes as three adjacent tokens
            while self.at(".") and self._adjacent(last, self.peek()):
                dot = self.tokens[self.pos]
                nxt = self.peek(1)
                if nxt is None or nxt.kind != "id" or not self._adjacent(dot, nxt):
                    self.error("expected group name")
                parts.append("." + nxt.value)
                last = nxt
                self.pos += 2
            group_id = "".join(parts)
            self.expect(":")
            self.expect("{")
            decls = self._fundecls()
            if not decls:
                raise ContractSyntaxError(f"external group {group_id!r} is empty", first.loc)
            out.append(ExternalGroup(group_id, tuple(decls)))
            if not self.accept(","):
                self.expect("}")
                break
        return out

    @staticmethod
    def _adjacent(a: Token, b: Token) -> bool:
        return a.file == b.file and a.line == b.line and a.col + len(a.value) == b.col

    def _constraints(self) -> list[OrderConstraint]:
        out = []
        while not self.accept("}"):
            left, left_ann = self._ordered_name()
            op = self.peek()
            if op is None or op.value not in ("<", ">"):
                self.error("expected '<' or '>'")
            self.pos += 1
            right, right_ann = self._ordered_name()
            if left.value == right.value:
                raise ContractSyntaxError(f"{left.value} is ordered against itself", left.loc)
            if op.value == "<":
                c = OrderConstraint(left.value, right.value, (left_ann, right_ann))
            else:
                c = OrderConstraint(right.value, left.value, (right_ann, left_ann))
            self.locations.setdefault(f"{c.before}<{c.after}", left.loc)
            out.append(c)
            if not self.accept(","):
                self.expect("}")
                break
        return out

    def _ordered_name(self):
        name = self.ident("function name")
        annotations = []
        while self.accept("("):
            inner = []
            while not self.accept(")"):
                t = self.peek()
                if t is None:
                    self.error("unterminated annotation")
                inner.append(t.value)
                self.pos += 1
            annotations.append(" ".join(inner))
        return name, tuple(annotations)


def parse_contract(text: str, path: str = "<contract>") -> ISContract:
    return _ContractParser(text, path).parse()


def load_contract(path: str) -> ISContract:
    with open(path, encoding="utf-8") as fh:
        return parse_contract(fh.read(), path)


def render(c: ISContract) -> str:
    """Canonical contract text; parses back to an equal contract."""
    def braced(parts):
        return "{ " + ", ".join(parts) + " }" if parts else "{ }"

    def decls(items):
        return braced([f.render() for f in items])

    def orders(items):
        return braced([o.render() for o in items])

    lines = [f"module {c.module_name} {{",
             f"  entry_points: {decls(c.entry_points)}",
             f"  entry_order: {orders(c.entry_order)}",
             "  external_calls: {"]
    for i, g in enumerate(c.external_groups):
        sep = "," if i + 1 < len(c.external_groups) else ""
        lines.append(f"    {g.group_id}: {decls(g.decls)}{sep}")
    lines += ["  }", f"  external_call_order: {orders(c.external_order)}", "}"]
    return "\n".join(lines) + "\n"


def order_closure(constraints) -> frozenset[tuple[str, str]]:
    """Transitive closure of `before < after` pairs; CycleError if not a strict order."""
    succ: dict[str, set[str]] = {}
    for c in constraints:
        a, b = (c.before, c.after) if isinstance(c, OrderConstraint) else c
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set())
    closure = set()
    for start in succ:
        seen = set()
        stack = list(succ[start])
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(succ[v])
        closure.update((start, v) for v in seen)
    cyclic = {a for a, b in closure if a == b}
    if cyclic:
        raise CycleError(cyclic)
    return frozenset(closure)


def validate_contract(c: ISContract) -> list[Diagnostic]:
    """Well-formedness problems; empty when the contract is usable."""
    diags = []

    def report(message, subject, key=None):
        diags.append(Diagnostic(CONTRACT_RULE, message, c.loc_of(key or subject), subject))

    entries = c.entry_names
    seen = set()
    for name in entries:
        if name in seen:
            report(f"duplicate entry point {name}", name)
        seen.add(name)
    externals = set()
    owners: dict[str, str] = {}
    for g in c.external_groups:
        if not g.decls:
            report(f"external group {g.group_id} is empty", g.group_id)
        for f in g.decls:
            if f.name in owners or f.name in seen:
                report(f"function {f.name} is declared more than once", f.name)
            owners[f.name] = g.group_id
            externals.add(f.name)
    for section, orders, known, what in (
            ("entry_order", c.entry_order, seen, "entry point"),
            ("external_order", c.external_order, externals, "external function")):
        for o in orders:
            for name in (o.before, o.after):
                if name not in known:
                    report(f"unknown {what} {name} in {CANONICAL_KEYWORDS[section]}", name,
                           f"{o.before}<{o.after}")
        try:
            order_closure(orders)
        except CycleError as e:
            first = orders[0]
            report(f"{CANONICAL_KEYWORDS[section]} has a cycle through {{{', '.join(sorted(e.vertices))}}}",
                   ",".join(sorted(e.vertices)), f"{first.before}<{first.after}")
    return sorted(diags, key=Diagnostic.sort_key)


def all_function_names(c: ISContract):
    return chain(c.entry_names, (f.name for g in c.external_groups for f in g.decls))
