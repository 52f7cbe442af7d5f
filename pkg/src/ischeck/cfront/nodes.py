"""Surface syntax tree for the supported C subset.

Nodes compare by identity: the semantic pass annotates them in place
(`Ident.binding`, `Expr.ctype`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import SourceLoc
from .ctype import UNKNOWN, CType
from .lexer import Token


@dataclass(eq=False)
class Node:
    loc: SourceLoc


# -- expressions -----------------------------------------------------------

@dataclass(eq=False)
class Expr(Node):
    ctype: CType = field(default=UNKNOWN, init=False, repr=False)


@dataclass(eq=False)
class Ident(Expr):
    name: str = ""
    binding: str = field(default="unknown", init=False)  # local|global|function|enum|unknown
    macro: str | None = None


@dataclass(eq=False)
class Const(Expr):
    text: str = ""
    kind: str = "int"  # int | float | char
    macro: str | None = None

    @property
    def is_integer(self) -> bool:
        return self.kind in ("int", "char")


@dataclass(eq=False)
class StringLit(Expr):
    text: str = ""


@dataclass(eq=False)
class Unary(Expr):
    op: str = ""  # & * + - ~ ! ++ -- (prefix)
    operand: Expr = None


@dataclass(eq=False)
class Postfix(Expr):
    op: str = ""  # ++ --
    operand: Expr = None


@dataclass(eq=False)
class Binary(Expr):
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass(eq=False)
class Assign(Expr):
    op: str = "="
    target: Expr = None
    value: Expr = None


@dataclass(eq=False)
class Conditional(Expr):
    cond: Expr = None
    then: Expr = None
    other: Expr = None


@dataclass(eq=False)
class Call(Expr):
    func: Expr = None
    args: list[Expr] = field(default_factory=list)

    @property
    def callee_name(self) -> str | None:
        return self.func.name if isinstance(self.func, Ident) else None


@dataclass(eq=False)
class Index(Expr):
    base: Expr = None
    index: Expr = None


@dataclass(eq=False)
class Member(Expr):
    base: Expr = None
    name: str = ""
    arrow: bool = False


@dataclass(eq=False)
class TypeName(Node):
    ctype: CType = UNKNOWN
    tokens: list[Token] = field(default_factory=list, repr=False)
    macro: str | None = None


@dataclass(eq=False)
class Cast(Expr):
    type_name: TypeName = None
    operand: Expr = None
    macro: str | None = None


@dataclass(eq=False)
class SizeOf(Expr):
    operand: Expr | None = None
    type_name: TypeName | None = None


@dataclass(eq=False)
class InitList(Expr):
    items: list[tuple[list, Expr]] = field(default_factory=list)  # (designators, value)


# -- declarations ----------------------------------------------------------

@dataclass(eq=False)
class DeclSpecs(Node):
    storage: list[str] = field(default_factory=list)
    storage_tokens: list[Token] = field(default_factory=list, repr=False)
    inline: bool = False
    base: CType = UNKNOWN
    tokens: list[Token] = field(default_factory=list, repr=False)  # type + qualifier tokens
    raw_words: list[Token] = field(default_factory=list, repr=False)  # char/int/... as spelled
    tag_defs: list["TagDef"] = field(default_factory=list)

    @property
    def is_typedef(self) -> bool:
        return "typedef" in self.storage

    @property
    def is_static(self) -> bool:
        return "static" in self.storage

    @property
    def is_extern(self) -> bool:
        return "extern" in self.storage


@dataclass(eq=False)
class TagDef(Node):
    """A struct/union/enum body defined inside some declaration specifiers."""
    kind: str = "struct"
    tag: str = ""
    members: list["Declaration"] = field(default_factory=list)
    enumerators: list[tuple[str, Expr | None, SourceLoc]] = field(default_factory=list)


@dataclass(eq=False)
class ParamDecl(Node):
    specs: DeclSpecs = None
    declarator: "Declarator" = None
    tokens: list[Token] = field(default_factory=list, repr=False)


@dataclass(eq=False)
class Declarator(Node):
    name: str | None = None
    name_token: Token | None = field(default=None, repr=False)
    ctype: CType = UNKNOWN
    tokens: list[Token] = field(default_factory=list, repr=False)
    # parameters of the function declarator that binds directly to the name
    params: list[ParamDecl] | None = None
    variadic: bool = False
    is_simple_function: bool = False  # pointers* name (params), nothing else
    array_declared: bool = False  # declared with [] syntax at the top level
    size_exprs: list[Expr] = field(default_factory=list, repr=False)


@dataclass(eq=False)
class InitDeclarator(Node):
    declarator: Declarator = None
    init: Expr | None = None


@dataclass(eq=False)
class Declaration(Node):
    specs: DeclSpecs = None
    items: list[InitDeclarator] = field(default_factory=list)


@dataclass(eq=False)
class FunctionDef(Node):
    specs: DeclSpecs = None
    declarator: Declarator = None
    body: "Compound" = None

    @property
    def name(self) -> str:
        return self.declarator.name


# -- statements ------------------------------------------------------------

@dataclass(eq=False)
class Stmt(Node):
    pass


@dataclass(eq=False)
class Compound(Stmt):
    items: list[Node] = field(default_factory=list)


@dataclass(eq=False)
class ExprStmt(Stmt):
    expr: Expr | None = None


@dataclass(eq=False)
class DeclStmt(Stmt):
    decl: Declaration = None


@dataclass(eq=False)
class If(Stmt):
    cond: Expr = None
    then: Stmt = None
    other: Stmt | None = None


@dataclass(eq=False)
class While(Stmt):
    cond: Expr = None
    body: Stmt = None


@dataclass(eq=False)
class DoWhile(Stmt):
    body: Stmt = None
    cond: Expr = None


@dataclass(eq=False)
class For(Stmt):
    init: Node | None = None  # DeclStmt or ExprStmt
    cond: Expr | None = None
    step: Expr | None = None
    body: Stmt = None


@dataclass(eq=False)
class Switch(Stmt):
    cond: Expr = None
    body: Stmt = None


@dataclass(eq=False)
class Case(Stmt):
    value: Expr | None = None  # None for default
    stmt: Stmt = None


@dataclass(eq=False)
class Break(Stmt):
    pass


@dataclass(eq=False)
class Continue(Stmt):
    pass


@dataclass(eq=False)
class Return(Stmt):
    value: Expr | None = None


@dataclass(eq=False)
class TranslationUnit:
    items: list[Node] = field(default_factory=list)
    structs: dict[str, dict[str, CType]] = field(default_factory=dict)


def children(node):
    """Direct sub-expressions of an expression, in evaluation order."""
    if isinstance(node, (Unary, Postfix)):
        return [node.operand]
    if isinstance(node, Binary):
        return [node.left, node.right]
    if isinstance(node, Assign):
        return [node.value, node.target]
    if isinstance(node, Conditional):
        return [node.cond, node.then, node.other]
    if isinstance(node, Call):
        return [*node.args, node.func]
    if isinstance(node, Index):
        return [node.base, node.index]
    if isinstance(node, Member):
        return [node.base]
    if isinstance(node, Cast):
        return [node.operand]
    if isinstance(node, SizeOf):
        return [node.operand] if node.operand is not None else []
    if isinstance(node, InitList):
        return [v for _, v in node.items]
    return []


def walk_expr(expr):
    """Pre-order traversal over an expression tree."""
    stack = [expr]
    while stack:
        e = stack.pop()
        if e is None:
            continue
        yield e
        stack.extend(reversed(children(e)))
