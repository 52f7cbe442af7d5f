"""Semantic model of one module: a `.h`/`.c` pair plus whatever they include."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..diagnostics import SourceLoc
from ..signature import CTypeText, FunSignature, normalize_type_tokens, signature_from_declarator
from . import nodes as n
from .ctype import CHAR, DOUBLE, INT, UNKNOWN, CType, array_of, pointer_to
from .lexer import FrontendError, ParseError
from .parser import Parser
from .preprocessor import IncludeRecord, Preprocessor, scan_includes

FLAG_KINDS = ("function_pointer", "pointer_arith", "pointer_cast", "pointer_literal",
              "extern", "address_taken")


@dataclass(frozen=True)
class GlobalVar:
    name: str
    type_text: CTypeText
    is_static: bool
    has_initializer: bool
    declared_in: str  # header | source
    loc: SourceLoc
    is_extern: bool = False


@dataclass(frozen=True)
class FunDeclSite:
    signature: FunSignature
    is_static: bool
    is_extern_kw: bool
    declared_in: str  # header | source | external
    is_definition: bool
    loc: SourceLoc

    @property
    def name(self) -> str:
        return self.signature.name

    @property
    def file_name(self) -> str:
        return os.path.basename(self.loc.file)


@dataclass(frozen=True)
class CallSite:
    caller: str
    callee: str
    args_arity: int
    loc: SourceLoc
    via_pointer: bool = False


@dataclass(frozen=True)
class ConstructFlag:
    kind: str
    loc: SourceLoc
    subject: str = ""
    detail: str = ""
    macro: str | None = None

    def __post_init__(self):
        if self.kind not in FLAG_KINDS:
            raise ValueError(f"unknown construct kind {self.kind!r}")


@dataclass(frozen=True)
class HeaderDef:
    kind: str  # function | initialization
    name: str
    loc: SourceLoc


@dataclass(frozen=True)
class BaseTypeUse:
    """Arithmetic type words spelled out in one declaration specifier list."""
    spelling: str
    loc: SourceLoc
    subject: str
    signature: FunSignature | None = None  # set when part of a function signature


@dataclass
class CModule:
    name: str
    header_path: str
    source_path: str
    includes: list[IncludeRecord] = field(default_factory=list)
    typedefs: list[tuple[str, CTypeText]] = field(default_factory=list)
    globals: list[GlobalVar] = field(default_factory=list)
    decls: list[FunDeclSite] = field(default_factory=list)
    defs: dict = field(default_factory=dict)  # name -> Cfg
    calls: list[CallSite] = field(default_factory=list)
    construct_flags: list[ConstructFlag] = field(default_factory=list)
    header_defs: list[HeaderDef] = field(default_factory=list)
    base_type_uses: list[BaseTypeUse] = field(default_factory=list)
    functions: dict = field(default_factory=dict)  # name -> FunctionDef
    tracked_globals: frozenset = frozenset()

    def flags(self, kind: str) -> list[ConstructFlag]:
        return [f for f in self.construct_flags if f.kind == kind]

    def decl_sites(self, name: str) -> list[FunDeclSite]:
        return [d for d in self.decls if d.name == name]

    def definition(self, name: str) -> FunDeclSite | None:
        for d in self.decls:
            if d.name == name and d.is_definition and d.declared_in != "external":
                return d
        return None

    def calls_from(self, caller: str) -> list[CallSite]:
        return [c for c in self.calls if c.caller == caller]

    @property
    def initialized_globals(self) -> frozenset:
        return frozenset(g.name for g in self.globals if g.has_initializer and not g.is_extern)


def _type_text(specs: n.DeclSpecs, d: n.Declarator) -> CTypeText:
    toks = [t for t in list(specs.tokens) + list(d.tokens) if t is not d.name_token]
    return CTypeText(normalize_type_tokens(toks) or "int")


def _int_literal(e):
    """The integer constant `e` boils down to, looking through signs and integer casts."""
    while True:
        if isinstance(e, n.Unary) and e.op in ("+", "-"):
            e = e.operand
        elif isinstance(e, n.Cast) and e.type_name.ctype.kind in ("scalar", "enum"):
            e = e.operand
        else:
            break
    if isinstance(e, n.Const) and e.is_integer:
        return e
    return None


def _root_object(e):
    """The named object an lvalue designates, if any (g, g[i], g.f)."""
    while True:
        if isinstance(e, n.Ident):
            return e
        if isinstance(e, n.Index) and not e.base.ctype.is_pointer:
            e = e.base
        elif isinstance(e, n.Member) and not e.arrow:
            e = e.base
        else:
            return None


class _Analyzer:
    """Resolves names, computes expression types and records flagged constructs."""

    def __init__(self, module: CModule, structs):
        self.m = module
        self.structs = structs
        self.scopes: list[dict[str, tuple[str, CType]]] = [{}]
        self.fn: str | None = None
        self.ret_type: CType | None = None
        self.module_files = {module.header_path, module.source_path}

    # -- helpers -----------------------------------------------------------

    def where(self, loc: SourceLoc) -> str:
        if loc.file == self.m.header_path:
            return "header"
        if loc.file == self.m.source_path:
            return "source"
        return "external"

    def flag(self, kind, loc, subject="", detail="", macro=None):
        self.m.construct_flags.append(ConstructFlag(kind, loc, subject, detail, macro))

    def lookup(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def bind(self, name, kind, ctype):
        self.scopes[-1][name] = (kind, ctype)

    def pointer_literal_into(self, target: CType, value, what: str):
        if value is None or not target.is_pointer:
            return
        lit = _int_literal(value)
        if lit is not None:
            self.flag("pointer_literal", lit.loc, lit.text, f"integer constant {what}", lit.macro)

    def initializer_literals(self, target: CType, init, what):
        if isinstance(init, n.InitList):
            element = target.of if target.is_array else UNKNOWN
            for _, item in init.items:
                self.initializer_literals(element, item, what)
        else:
            self.pointer_literal_into(target, init, what)

    def base_type_use(self, specs: n.DeclSpecs, subject: str, signature=None):
        if specs.raw_words:
            self.m.base_type_uses.append(BaseTypeUse(
                " ".join(t.value for t in specs.raw_words), specs.raw_words[0].loc,
                subject, signature))

    def declarator_flags(self, d: n.Declarator, what: str):
        if d.ctype.mentions_function_pointer():
            self.flag("function_pointer", d.loc, d.name or "", f"function pointer in {what}")

    def tag_defs(self, specs: n.DeclSpecs, in_module: bool):
        for tag in specs.tag_defs:
            for name, value, loc in tag.enumerators:
                self.bind(name, "enum", INT)
                if in_module and value is not None:
                    self.expr(value)
            if not in_module:
                continue
            for member in tag.members:
                self.tag_defs(member.specs, in_module)
                names = [i.declarator.name or "" for i in member.items]
                self.base_type_use(member.specs, ", ".join(names))
                for item in member.items:
                    self.declarator_flags(item.declarator, "member declaration")

    # -- file scope --------------------------------------------------------

    def external_declaration(self, item):
        where = self.where(item.loc)
        in_module = where != "external"
        if isinstance(item, n.FunctionDef):
            self.function_definition(item, where)
            return
        specs = item.specs
        self.tag_defs(specs, in_module)
        if specs.is_typedef:
            for i in item.items:
                d = i.declarator
                if in_module:
                    self.m.typedefs.append((d.name, _type_text(specs, d)))
                    self.declarator_flags(d, "typedef")
            return
        for i in item.items:
            d = i.declarator
            if d.ctype.is_function:
                self.bind(d.name, "function", d.ctype)
                self.m.decls.append(FunDeclSite(
                    signature_from_declarator(specs, d) if d.params is not None
                    else FunSignature(d.name, CTypeText("int", "return-type")),
                    specs.is_static, specs.is_extern, where, False, d.loc))
            else:
                self.bind(d.name, "global", d.ctype)
                if in_module:
                    self.m.globals.append(GlobalVar(
                        d.name, _type_text(specs, d), specs.is_static, i.init is not None,
                        where, d.loc, specs.is_extern))
            if not in_module:
                continue
            if specs.is_extern:
                kind = "function" if d.ctype.is_function else "variable"
                self.flag("extern", specs.storage_tokens[0].loc, d.name, kind)
            if where == "header" and i.init is not None:
                self.m.header_defs.append(HeaderDef("initialization", d.name, d.loc))
            self.declarator_flags(d, "declaration")
            if d.ctype.is_function:
                sig = signature_from_declarator(specs, d) if d.params is not None else None
                self.base_type_use(specs, d.name, sig)
                for p in d.params or ():
                    self.base_type_use(p.specs, p.declarator.name or "", sig)
            if i.init is not None:
                self.fn = None
                self.expr(i.init)
                self.initializer_literals(d.ctype, i.init, "initializes a pointer")
        if in_module and not any(i.declarator.ctype.is_function for i in item.items):
            names = ", ".join(i.declarator.name for i in item.items) or "<declaration>"
            self.base_type_use(specs, names)

    def function_definition(self, fdef: n.FunctionDef, where: str):
        d = fdef.declarator
        specs = fdef.specs
        self.bind(d.name, "function", d.ctype)
        self.m.decls.append(FunDeclSite(signature_from_declarator(specs, d), specs.is_static,
                                        specs.is_extern, where, True, d.loc))
        if where == "external":
            return
        if d.name in self.m.functions:
            raise ParseError(f"redefinition of function {d.name!r}", d.loc)
        self.m.functions[d.name] = fdef
        if where == "header":
            self.m.header_defs.append(HeaderDef("function", d.name, d.loc))
        if specs.is_extern:
            self.flag("extern", specs.storage_tokens[0].loc, d.name, "function")
        self.tag_defs(specs, True)
        self.declarator_flags(d, "definition")
        sig = signature_from_declarator(specs, d)
        self.base_type_use(specs, d.name, sig)
        self.fn = d.name
        self.ret_type = d.ctype.of
        self.scopes.append({})
        for p in d.params:
            self.base_type_use(p.specs, p.declarator.name, sig)
            self.bind(p.declarator.name, "local", p.declarator.ctype)
        self.stmt(fdef.body, new_scope=False)
        self.scopes.pop()
        self.fn = None
        self.ret_type = None

    # -- statements --------------------------------------------------------

    def local_declaration(self, decl: n.Declaration):
        specs = decl.specs
        self.tag_defs(specs, True)
        names = ", ".join(i.declarator.name or "" for i in decl.items)
        if not specs.is_typedef:
            self.base_type_use(specs, names)
        for i in decl.items:
            d = i.declarator
            if specs.is_typedef:
                self.declarator_flags(d, "typedef")
                continue
            if specs.is_extern:
                self.flag("extern", specs.storage_tokens[0].loc, d.name,
                          "function" if d.ctype.is_function else "variable")
            self.declarator_flags(d, "declaration")
            if d.ctype.is_function:
                self.bind(d.name, "function", d.ctype)
                continue
            if i.init is not None:
                self.expr(i.init)
                self.initializer_literals(d.ctype, i.init, "initializes a pointer")
            self.bind(d.name, "global" if specs.is_extern else "local", d.ctype)

    def stmt(self, s, new_scope=True):
        if s is None:
            return
        if isinstance(s, n.Compound):
            if new_scope:
                self.scopes.append({})
            for item in s.items:
                self.stmt(item)
            if new_scope:
                self.scopes.pop()
        elif isinstance(s, n.DeclStmt):
            self.local_declaration(s.decl)
        elif isinstance(s, n.ExprStmt):
            if s.expr is not None:
                self.expr(s.expr)
        elif isinstance(s, n.If):
            self.expr(s.cond)
            self.stmt(s.then)
            self.stmt(s.other)
        elif isinstance(s, (n.While, n.Switch)):
            self.expr(s.cond)
            self.stmt(s.body)
        elif isinstance(s, n.DoWhile):
            self.stmt(s.body)
            self.expr(s.cond)
        elif isinstance(s, n.For):
            self.scopes.append({})
            self.stmt(s.init)
            if s.cond is not None:
                self.expr(s.cond)
            if s.step is not None:
                self.expr(s.step)
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, n.Case):
            if s.value is not None:
                self.expr(s.value)
            self.stmt(s.stmt)
        elif isinstance(s, n.Return):
            if s.value is not None:
                self.expr(s.value)
                if self.ret_type is not None:
                    self.pointer_literal_into(self.ret_type, s.value, "returned as a pointer")

    # -- expressions -------------------------------------------------------

    def expr(self, e, ctx: str = "value") -> CType:
        t = self._expr(e, ctx)
        e.ctype = t
        return t

    def _expr(self, e, ctx):
        if isinstance(e, n.Ident):
            return self.ident(e, ctx)
        if isinstance(e, n.Const):
            return {"int": INT, "char": INT, "float": DOUBLE}[e.kind]
        if isinstance(e, n.StringLit):
            return array_of(CHAR)
        if isinstance(e, n.Unary):
            return self.unary(e)
        if isinstance(e, n.Postfix):
            t = self.expr(e.operand)
            if t.pointer_like():
                self.flag("pointer_arith", e.loc, "", f"{e.op} on a pointer")
            return t
        if isinstance(e, n.Binary):
            return self.binary(e)
        if isinstance(e, n.Assign):
            vt = self.expr(e.value)
            tt = self.expr(e.target, "lvalue")
            if e.op in ("+=", "-=") and tt.pointer_like():
                self.flag("pointer_arith", e.loc, "", f"{e.op} on a pointer")
            if e.op == "=":
                self.pointer_literal_into(tt, e.value, "assigned to a pointer")
            return tt if tt.kind != "unknown" else vt
        if isinstance(e, n.Conditional):
            self.expr(e.cond)
            a = self.expr(e.then)
            b = self.expr(e.other)
            return a if a.pointer_like() or b.kind == "unknown" else b
        if isinstance(e, n.Call):
            return self.call(e)
        if isinstance(e, n.Index):
            bt = self.expr(e.base, "object")
            it = self.expr(e.index)
            if bt.is_pointer:
                self.flag("pointer_arith", e.loc, "", "indexing through a pointer")
            if bt.pointer_like():
                return bt.target()
            return it.target() if it.pointer_like() else UNKNOWN
        if isinstance(e, n.Member):
            bt = self.expr(e.base, "value" if e.arrow else "object")
            if e.arrow:
                bt = bt.target()
            return self.structs.get(bt.name, {}).get(e.name, UNKNOWN) \
                if bt.kind in ("struct", "union") else UNKNOWN
        if isinstance(e, n.Cast):
            target = e.type_name.ctype
            src = self.expr(e.operand)
            if target.pointer_like() or src.pointer_like():
                self.flag("pointer_cast", e.loc, target.render(),
                          f"cast from {src.render()} to {target.render()}", e.macro)
            if target.pointer_like():
                lit = _int_literal(e.operand)
                if lit is not None:
                    self.flag("pointer_literal", lit.loc, lit.text,
                              "integer constant cast to a pointer", lit.macro or e.macro)
            return target
        if isinstance(e, n.SizeOf):
            return CType("scalar", "unsigned long")
        if isinstance(e, n.InitList):
            for _, item in e.items:
                self.expr(item)
            return UNKNOWN
        raise ParseError(f"unexpected expression {type(e).__name__}", e.loc)

    def ident(self, e: n.Ident, ctx):
        entry = self.lookup(e.name)
        if entry is None:
            e.binding = "unknown"
            return UNKNOWN
        kind, ctype = entry
        e.binding = kind
        if kind == "function" and ctx != "callee":
            self.flag("function_pointer", e.loc, e.name, "function designator used as a value")
        if kind == "global" and ctype.is_array and ctx == "value":
            self.flag("address_taken", e.loc, e.name, "array decays to a pointer")
        return ctype

    def unary(self, e: n.Unary):
        op = e.op
        if op == "&":
            t = self.expr(e.operand, "address")
            root = _root_object(e.operand)
            if root is not None and root.binding == "global":
                self.flag("address_taken", e.loc, root.name, "address of a file-scope variable")
            return pointer_to(t)
        t = self.expr(e.operand)
        if op == "*":
            return t if t.is_function else t.target()
        if op in ("++", "--"):
            if t.pointer_like():
                self.flag("pointer_arith", e.loc, "", f"{op} on a pointer")
            return t
        if op == "!":
            return INT
        return t

    def binary(self, e: n.Binary):
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        op = e.op
        if op in ("+", "-") and (lt.pointer_like() or rt.pointer_like()):
            self.flag("pointer_arith", e.loc, "", f"pointer operand of binary {op}")
            if lt.pointer_like() and rt.pointer_like():
                return INT
            p = lt if lt.pointer_like() else rt
            return pointer_to(p.target()) if not p.is_function else pointer_to(p)
        if op in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
            return INT
        if op == ",":
            return rt
        if DOUBLE in (lt, rt):
            return DOUBLE
        return lt if lt.kind != "unknown" else rt

    def call(self, e: n.Call):
        func = e.func
        direct = isinstance(func, n.Ident)
        ft = self.expr(func, "callee" if direct else "value")
        if direct and func.binding in ("function", "unknown"):
            callee, via_pointer = func.name, False
            fn_type = ft if ft.is_function else None
        else:
            callee = func.name if direct else "<indirect>"
            via_pointer = True
            self.flag("function_pointer", e.loc, callee, "call through a function pointer")
            fn_type = ft.of if ft.is_pointer and ft.of is not None and ft.of.is_function else None
        for i, arg in enumerate(e.args):
            self.expr(arg)
            if fn_type is not None and i < len(fn_type.params):
                self.pointer_literal_into(fn_type.params[i], arg, "passed as a pointer argument")
        if self.fn is not None:
            self.m.calls.append(CallSite(self.fn, callee, len(e.args), e.loc, via_pointer))
        if fn_type is not None:
            return fn_type.of
        return UNKNOWN


def _dedupe(items):
    seen = set()
    out = []
    for item in items:
        key = (type(item).__name__, item.loc, getattr(item, "name", None))
        if isinstance(item, n.Declaration):
            key = key + (tuple(i.declarator.name for i in item.items),)
        if key in seen:
            continue
        seen.add(key)
        out.append(item)
    return out


def _check_recursion(m: CModule):
    graph: dict[str, list[CallSite]] = {f: [] for f in m.functions}
    for c in m.calls:
        if not c.via_pointer and c.callee in graph:
            graph[c.caller].append(c)
    state: dict[str, int] = {}
    path: list[str] = []

    def visit(f):
        state[f] = 1
        path.append(f)
        for c in graph[f]:
            if state.get(c.callee) == 1:
                cycle = path[path.index(c.callee):] + [c.callee]
                raise FrontendError("recursion is not supported: " + " -> ".join(cycle), c.loc)
            if c.callee not in state:
                visit(c.callee)
        path.pop()
        state[f] = 2

    for f in sorted(graph):
        if f not in state:
            visit(f)


def _module_includes(h_path, c_path, processed: list[IncludeRecord]) -> list[IncludeRecord]:
    resolved = {(r.loc.file, r.loc.line): r.resolved_path for r in processed}
    out = []
    for path in (h_path, c_path):
        for r in scan_includes(path):
            out.append(IncludeRecord(r.directive_text, resolved.get((r.loc.file, r.loc.line)),
                                     r.is_header_suffix, r.loc))
    return out


def parse_module(h_path: str, c_path: str, include_dirs=(), defines=None,
                 allow_unresolved: bool = False, stubs=None) -> CModule:
    """Preprocess, parse and analyze a module given its header and source."""
    from .cfg import build_cfg

    h_path = os.path.normpath(h_path)
    c_path = os.path.normpath(c_path)
    for p in (h_path, c_path):
        if not os.path.isfile(p):
            raise FrontendError(f"no such file: {p}")
    pp = Preprocessor(include_dirs, defines, stubs=stubs, allow_unresolved=allow_unresolved)
    tokens = pp.run(h_path, c_path)
    tu = Parser(tokens).parse_translation_unit()

    name = os.path.splitext(os.path.basename(c_path))[0]
    m = CModule(name, h_path, c_path)
    m.includes = _module_includes(h_path, c_path, pp.includes)
    analyzer = _Analyzer(m, tu.structs)
    for item in _dedupe(tu.items):
        analyzer.external_declaration(item)
    _check_recursion(m)
    m.tracked_globals = frozenset(g.name for g in m.globals if not g.is_extern)
    for fname, fdef in m.functions.items():
        m.defs[fname] = build_cfg(fdef, set(m.functions), m.tracked_globals)
    m.construct_flags.sort(key=lambda f: (f.loc, f.kind, f.subject))
    return m
