"""Recursive-descent parser for the embedded C99 subset.

Rejected with UnsupportedConstruct: goto and labels, setjmp/longjmp, variadic
function definitions, variable length arrays, compound literals, statement
expressions, K&R definitions and compiler extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import SourceLoc
from . import nodes as n
from .ctype import (CHAR, DOUBLE, INT, RAW_BASE_WORDS, UNKNOWN, VOID, CType, adjust_parameter,
                    array_of, function_returning, pointer_to)
from .lexer import UNSUPPORTED_KEYWORDS, ParseError, Token, UnsupportedConstruct

STORAGE = frozenset({"typedef", "extern", "static", "auto", "register"})
QUALIFIERS = frozenset({"const", "volatile", "restrict"})
SCALAR_WORDS = frozenset({"void", "char", "short", "int", "long", "float", "double",
                          "signed", "unsigned", "_Bool", "_Complex"})
TAG_WORDS = frozenset({"struct", "union", "enum"})

ASSIGN_OPS = frozenset({"=", "*=", "/=", "%=", "+=", "-=", "<<=", ">>=", "&=", "^=", "|="})
BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "<<": 8, ">>": 8, "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
UNSUPPORTED_CALLS = frozenset({"setjmp", "longjmp", "_setjmp", "_longjmp", "sigsetjmp",
                               "siglongjmp"})


@dataclass
class _Shape:
    """Declarator structure before the base type is known."""
    pointers: int = 0
    inner: "_Shape | None" = None
    name_token: Token | None = None
    suffixes: list = field(default_factory=list)  # ("array", size_text, expr) | ("func", params, variadic)

    def name_tok(self):
        if self.name_token is not None:
            return self.name_token
        return self.inner.name_tok() if self.inner else None

    def build(self, base: CType) -> CType:
        t = base
        for _ in range(self.pointers):
            t = pointer_to(t)
        for s in reversed(self.suffixes):
            if s[0] == "array":
                t = array_of(t, s[1])
            else:
                t = function_returning(t, [p.declarator.ctype for p in s[1]], s[2])
        return self.inner.build(t) if self.inner else t


class Parser:
    def __init__(self, tokens: list[Token], lenient_typedefs: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.lenient = lenient_typedefs
        # each scope maps name -> ("typedef", ctype) | ("enum", None) | ("var", None)
        self.scopes: list[dict[str, tuple]] = [{}]
        self.structs: dict[str, dict[str, CType]] = {}
        self._anon = 0
        self._switch_depth = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, value: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.value == value and t.kind in ("punct", "id")

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            self.fail("unexpected end of input")
        self.pos += 1
        return t

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t is None or t.value != value or t.kind not in ("punct", "id"):
            self.fail(f"expected {value!r}")
        self.pos += 1
        return t

    def accept(self, value: str) -> Token | None:
        if self.at(value):
            return self.next()
        return None

    def loc(self) -> SourceLoc:
        t = self.peek()
        if t is None:
            t = self.tokens[-1] if self.tokens else None
            return t.loc if t else SourceLoc("<input>")
        return t.loc

    def fail(self, message: str):
        t = self.peek()
        found = f", found {t.value!r}" if t is not None else ", found end of input"
        raise ParseError(message + found, self.loc())

    def expect_end(self):
        if self.peek() is not None:
            self.fail("unexpected trailing tokens")

    # -- scopes ------------------------------------------------------------

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def is_typedef_name(self, name: str) -> bool:
        entry = self.lookup(name)
        return entry is not None and entry[0] == "typedef"

    def declare(self, name: str, kind: str, ctype: CType | None = None):
        self.scopes[-1][name] = (kind, ctype)

    def push_scope(self):
        self.scopes.append({})

    def pop_scope(self):
        self.scopes.pop()

    def starts_type(self, offset: int = 0) -> bool:
        t = self.peek(offset)
        if t is None or t.kind != "id":
            return False
        v = t.value
        if v in SCALAR_WORDS or v in TAG_WORDS or v in QUALIFIERS:
            return True
        return self.is_typedef_name(v)

    def starts_declaration(self) -> bool:
        t = self.peek()
        if t is None or t.kind != "id":
            return False
        if t.value in STORAGE or t.value == "inline":
            return True
        if t.value in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(t.value, t.loc)
        if self.is_typedef_name(t.value):
            return not self.at(":", 1)
        return self.starts_type()

    # -- declarations ------------------------------------------------------

    def parse_decl_specs(self) -> n.DeclSpecs:
        specs = n.DeclSpecs(loc=self.loc())
        words: list[str] = []
        base: CType | None = None
        while True:
            t = self.peek()
            if t is None or t.kind != "id":
                break
            v = t.value
            if v in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(v, t.loc)
            if v in STORAGE:
                specs.storage.append(v)
                specs.storage_tokens.append(self.next())
            elif v == "inline":
                specs.inline = True
                specs.storage_tokens.append(self.next())
            elif v in QUALIFIERS:
                specs.tokens.append(self.next())
            elif v in SCALAR_WORDS:
                words.append(v)
                tok = self.next()
                specs.tokens.append(tok)
                if v in RAW_BASE_WORDS:
                    specs.raw_words.append(tok)
            elif v in TAG_WORDS:
                if base is not None or words:
                    self.fail("multiple types in declaration")
                base = self.parse_tag(specs)
            elif base is None and not words and self.is_typedef_name(v):
                tok = self.next()
                specs.tokens.append(tok)
                base = self.lookup(v)[1].with_typedef(v)
            elif base is None and not words and self.lenient and self._looks_like_type_name():
                tok = self.next()
                specs.tokens.append(tok)
                base = CType("unknown", v, typedef=v)
            else:
                break
        if base is None:
            if not words:
                if not specs.storage and not specs.tokens:
                    self.fail("expected a declaration")
                words = ["int"]  # implicit int, e.g. `static x;`
            base = VOID if words == ["void"] else CType("scalar", " ".join(words))
        specs.base = base
        return specs

    def _looks_like_type_name(self) -> bool:
        nxt = self.peek(1)
        if nxt is None:
            return False
        if nxt.kind == "id":
            return nxt.value not in STORAGE
        return nxt.value in ("*", ")", ",", "[")

    def parse_tag(self, specs: n.DeclSpecs) -> CType:
        kw = self.next()
        specs.tokens.append(kw)
        tag = None
        if self.peek() is not None and self.peek().kind == "id":
            tag_tok = self.next()
            specs.tokens.append(tag_tok)
            tag = tag_tok.value
        if self.at("{"):
            if tag is None:
                self._anon += 1
                tag = f"<anonymous {self._anon}>"
            tag_def = n.TagDef(loc=kw.loc, kind=kw.value, tag=tag)
            self.next()
            if kw.value == "enum":
                self._parse_enum_body(tag_def)
            else:
                self._parse_struct_body(tag_def)
            specs.tag_defs.append(tag_def)
        elif tag is None:
            self.fail(f"expected {kw.value} tag or body")
        kind = kw.value
        if kind == "enum":
            return CType("enum", tag)
        return CType(kind, tag)

    def _parse_struct_body(self, tag_def: n.TagDef):
        members: dict[str, CType] = {}
        while not self.accept("}"):
            specs = self.parse_decl_specs()
            decl = n.Declaration(loc=specs.loc, specs=specs)
            while not self.at(";"):
                if self.at(":"):
                    d = n.Declarator(loc=self.loc(), ctype=specs.base)
                else:
                    d = self.parse_declarator(specs.base)
                if self.accept(":"):
                    self.parse_conditional()
                if d.name:
                    members[d.name] = d.ctype
                decl.items.append(n.InitDeclarator(loc=d.loc, declarator=d))
                if not self.accept(","):
                    break
            self.expect(";")
            tag_def.members.append(decl)
        self.structs[tag_def.tag] = members

    def _parse_enum_body(self, tag_def: n.TagDef):
        while not self.accept("}"):
            t = self.next()
            if t.kind != "id":
                raise ParseError(f"expected enumerator, found {t.value!r}", t.loc)
            value = None
            if self.accept("="):
                value = self.parse_conditional()
            tag_def.enumerators.append((t.value, value, t.loc))
            self.declare(t.value, "enum")
            if not self.accept(","):
                self.expect("}")
                break

    def _parse_shape(self, abstract_ok: bool) -> _Shape:
        shape = _Shape()
        while self.at("*"):
            self.next()
            while self.peek() is not None and self.peek().value in QUALIFIERS:
                self.next()
            shape.pointers += 1
        t = self.peek()
        if t is not None and t.is_punct("(") and self._nested_declarator_follows(abstract_ok):
            self.next()
            shape.inner = self._parse_shape(abstract_ok)
            self.expect(")")
        elif t is not None and t.kind == "id" and t.value not in SCALAR_WORDS \
                and t.value not in QUALIFIERS and not (abstract_ok and self.is_typedef_name(t.value)):
            if t.value in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(t.value, t.loc)
            shape.name_token = self.next()
        elif not abstract_ok:
            self.fail("expected declarator")
        while True:
            if self.at("["):
                self.next()
                while self.peek() is not None and self.peek().value in QUALIFIERS | {"static"}:
                    self.next()
                if self.at("*"):
                    raise UnsupportedConstruct("variable length array", self.loc())
                size_expr = None
                start = self.pos
                if not self.at("]"):
                    size_expr = self.parse_assignment()
                size_text = " ".join(tok.value for tok in self.tokens[start:self.pos]) or None
                self.expect("]")
                shape.suffixes.append(("array", size_text, size_expr))
            elif self.at("("):
                params, variadic = self.parse_params()
                shape.suffixes.append(("func", params, variadic))
            else:
                break
        return shape

    def _nested_declarator_follows(self, abstract_ok: bool) -> bool:
        nxt = self.peek(1)
        if nxt is None:
            return False
        if nxt.is_punct("*") or nxt.is_punct("("):
            return True
        if abstract_ok:
            return nxt.is_punct("[")
        return nxt.kind == "id" and not self.starts_type(1)

    def parse_declarator(self, base: CType, abstract_ok: bool = False) -> n.Declarator:
        start = self.pos
        loc = self.loc()
        shape = self._parse_shape(abstract_ok)
        name_tok = shape.name_tok()
        decl = n.Declarator(loc=name_tok.loc if name_tok else loc,
                            name=name_tok.value if name_tok else None,
                            name_token=name_tok, ctype=shape.build(base),
                            tokens=self.tokens[start:self.pos])
        if shape.inner is None and shape.suffixes:
            first = shape.suffixes[0]
            if first[0] == "func":
                decl.params, decl.variadic = first[1], first[2]
                decl.is_simple_function = len(shape.suffixes) == 1
            else:
                decl.array_declared = True
        decl.size_exprs = [s[2] for s in self._all_suffixes(shape) if s[0] == "array" and s[2]]
        return decl

    def _all_suffixes(self, shape):
        while shape is not None:
            yield from shape.suffixes
            shape = shape.inner

    def parse_params(self):
        self.expect("(")
        if self.accept(")"):
            return [], False
        if self.at("void") and self.at(")", 1):
            self.next()
            self.next()
            return [], False
        params: list[n.ParamDecl] = []
        variadic = False
        self.push_scope()
        try:
            while True:
                if self.accept("..."):
                    variadic = True
                    break
                start = self.pos
                t = self.peek()
                if t is not None and t.kind == "id" and not self.starts_declaration() \
                        and not self.lenient:
                    raise ParseError(f"unknown type name or K&R parameter {t.value!r}", t.loc)
                specs = self.parse_decl_specs()
                d = self.parse_declarator(specs.base, abstract_ok=True)
                d.ctype = adjust_parameter(d.ctype)
                if d.name:
                    self.declare(d.name, "var")
                params.append(n.ParamDecl(loc=specs.loc, specs=specs, declarator=d,
                                          tokens=self.tokens[start:self.pos]))
                if not self.accept(","):
                    break
        finally:
            self.pop_scope()
        self.expect(")")
        return params, variadic

    def parse_type_name(self) -> n.TypeName:
        start = self.pos
        first = self.peek()
        specs = self.parse_decl_specs()
        if specs.storage:
            raise ParseError("storage class in type name", specs.loc)
        d = self.parse_declarator(specs.base, abstract_ok=True)
        if d.name:
            raise ParseError(f"unexpected identifier {d.name!r} in type name", d.loc)
        self._reject_vla(d)
        return n.TypeName(loc=first.loc, ctype=d.ctype, tokens=self.tokens[start:self.pos],
                          macro=first.macro)

    def parse_initializer(self) -> n.Expr:
        if not self.at("{"):
            return self.parse_assignment()
        lbrace = self.next()
        init = n.InitList(loc=lbrace.loc)
        while not self.accept("}"):
            designators = []
            while self.at(".") or self.at("["):
                if self.accept("."):
                    designators.append(("field", self.next().value))
                else:
                    self.next()
                    designators.append(("index", self.parse_conditional()))
                    self.expect("]")
            if designators:
                self.expect("=")
            init.items.append((designators, self.parse_initializer()))
            if not self.accept(","):
                self.expect("}")
                break
        return init

    def _reject_vla(self, d: n.Declarator):
        for size in d.size_exprs:
            for e in n.walk_expr(size):
                if isinstance(e, n.SizeOf):
                    continue
                if isinstance(e, n.Ident):
                    entry = self.lookup(e.name)
                    if entry is None or entry[0] != "enum":
                        raise UnsupportedConstruct("variable length array", e.loc)

    def parse_external(self) -> n.Node:
        """One file-scope declaration or function definition."""
        specs = self.parse_decl_specs()
        decl = n.Declaration(loc=specs.loc, specs=specs)
        if self.accept(";"):
            return decl
        d = self.parse_declarator(specs.base)
        if self.at("{"):
            return self._function_definition(specs, d)
        return self._finish_declaration(decl, d)

    def _function_definition(self, specs, d) -> n.FunctionDef:
        if not d.ctype.is_function or d.params is None:
            raise ParseError("function body on a non-function declarator", d.loc)
        if d.variadic:
            raise UnsupportedConstruct("variadic function definition", d.loc)
        if not d.is_simple_function:
            raise UnsupportedConstruct("complex function declarator", d.loc)
        self.declare(d.name, "var")
        self.push_scope()
        for p in d.params:
            if p.declarator.name is None:
                raise ParseError("unnamed parameter in function definition", p.loc)
            self._reject_vla(p.declarator)
            self.declare(p.declarator.name, "var")
        body = self.parse_compound(new_scope=False)
        self.pop_scope()
        return n.FunctionDef(loc=d.loc, specs=specs, declarator=d, body=body)

    def _finish_declaration(self, decl: n.Declaration, d: n.Declarator) -> n.Declaration:
        specs = decl.specs
        while True:
            self._reject_vla(d)
            if d.name:
                if specs.is_typedef:
                    self.declare(d.name, "typedef", d.ctype)
                else:
                    self.declare(d.name, "var")
            init = None
            if self.accept("="):
                if specs.is_typedef:
                    raise ParseError("typedef with initializer", d.loc)
                init = self.parse_initializer()
            decl.items.append(n.InitDeclarator(loc=d.loc, declarator=d, init=init))
            if not self.accept(","):
                break
            d = self.parse_declarator(specs.base)
        self.expect(";")
        return decl

    def parse_block_declaration(self) -> n.Declaration:
        specs = self.parse_decl_specs()
        decl = n.Declaration(loc=specs.loc, specs=specs)
        if self.accept(";"):
            return decl
        return self._finish_declaration(decl, self.parse_declarator(specs.base))

    def parse_translation_unit(self) -> n.TranslationUnit:
        tu = n.TranslationUnit(structs=self.structs)
        while self.peek() is not None:
            if self.accept(";"):
                continue
            tu.items.append(self.parse_external())
        return tu

    # -- statements --------------------------------------------------------

    def parse_compound(self, new_scope: bool = True) -> n.Compound:
        lbrace = self.expect("{")
        block = n.Compound(loc=lbrace.loc)
        if new_scope:
            self.push_scope()
        while not self.accept("}"):
            if self.peek() is None:
                self.fail("unterminated block")
            if self.starts_declaration():
                decl = self.parse_block_declaration()
                block.items.append(n.DeclStmt(loc=decl.loc, decl=decl))
            else:
                block.items.append(self.parse_statement())
        if new_scope:
            self.pop_scope()
        return block

    def parse_statement(self) -> n.Stmt:
        t = self.peek()
        if t is None:
            self.fail("expected statement")
        loc = t.loc
        v = t.value if t.kind in ("id", "punct") else None
        if v == "{":
            return self.parse_compound()
        if t.kind == "id":
            if v in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(v, loc)
            if v == "goto":
                raise UnsupportedConstruct("goto", loc)
            if v == "if":
                self.next()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                then = self.parse_statement()
                other = self.parse_statement() if self.accept("else") else None
                return n.If(loc=loc, cond=cond, then=then, other=other)
            if v == "while":
                self.next()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                return n.While(loc=loc, cond=cond, body=self.parse_statement())
            if v == "do":
                self.next()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                self.expect(";")
                return n.DoWhile(loc=loc, body=body, cond=cond)
            if v == "for":
                return self._parse_for()
            if v == "switch":
                self.next()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                self._switch_depth += 1
                body = self.parse_statement()
                self._switch_depth -= 1
                _check_case_placement(body, top=True)
                return n.Switch(loc=loc, cond=cond, body=body)
            if v in ("case", "default"):
                if self._switch_depth == 0:
                    raise ParseError(f"{v} label outside switch", loc)
                self.next()
                value = None
                if v == "case":
                    value = self.parse_conditional()
                self.expect(":")
                return n.Case(loc=loc, value=value, stmt=self.parse_statement())
            if v == "break":
                self.next()
                self.expect(";")
                return n.Break(loc=loc)
            if v == "continue":
                self.next()
                self.expect(";")
                return n.Continue(loc=loc)
            if v == "return":
                self.next()
                value = None if self.at(";") else self.parse_expression()
                self.expect(";")
                return n.Return(loc=loc, value=value)
            if self.at(":", 1) and v not in ("default",):
                raise UnsupportedConstruct("statement label", loc)
        if self.accept(";"):
            return n.ExprStmt(loc=loc)
        expr = self.parse_expression()
        self.expect(";")
        return n.ExprStmt(loc=loc, expr=expr)

    def _parse_for(self) -> n.For:
        loc = self.next().loc
        self.expect("(")
        self.push_scope()
        init = None
        if self.starts_declaration():
            decl = self.parse_block_declaration()
            init = n.DeclStmt(loc=decl.loc, decl=decl)
        elif not self.accept(";"):
            e = self.parse_expression()
            init = n.ExprStmt(loc=e.loc, expr=e)
            self.expect(";")
        cond = None if self.at(";") else self.parse_expression()
        self.expect(";")
        step = None if self.at(")") else self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        self.pop_scope()
        return n.For(loc=loc, init=init, cond=cond, step=step, body=body)

    # -- expressions -------------------------------------------------------

    def parse_expression(self) -> n.Expr:
        e = self.parse_assignment()
        while self.at(","):
            op = self.next()
            e = n.Binary(loc=op.loc, op=",", left=e, right=self.parse_assignment())
        return e

    def parse_assignment(self) -> n.Expr:
        lhs = self.parse_conditional()
        t = self.peek()
        if t is not None and t.kind == "punct" and t.value in ASSIGN_OPS:
            self.next()
            return n.Assign(loc=t.loc, op=t.value, target=lhs, value=self.parse_assignment())
        return lhs

    def parse_conditional(self) -> n.Expr:
        cond = self.parse_binary(1)
        if self.at("?"):
            q = self.next()
            then = self.parse_expression()
            self.expect(":")
            other = self.parse_conditional()
            return n.Conditional(loc=q.loc, cond=cond, then=then, other=other)
        return cond

    def parse_binary(self, min_prec: int) -> n.Expr:
        left = self.parse_cast()
        while True:
            t = self.peek()
            if t is None or t.kind != "punct":
                return left
            prec = BINARY_PREC.get(t.value)
            if prec is None or prec < min_prec:
                return left
            self.next()
            right = self.parse_binary(prec + 1)
            left = n.Binary(loc=t.loc, op=t.value, left=left, right=right)

    def parse_cast(self) -> n.Expr:
        if self.at("(") and self.starts_type(1):
            lparen = self.next()
            type_name = self.parse_type_name()
            self.expect(")")
            if self.at("{"):
                raise UnsupportedConstruct("compound literal", lparen.loc)
            return n.Cast(loc=lparen.loc, type_name=type_name, operand=self.parse_cast(),
                          macro=lparen.macro)
        return self.parse_unary()

    def parse_unary(self) -> n.Expr:
        t = self.peek()
        if t is None:
            self.fail("expected expression")
        if t.kind == "punct":
            if t.value in ("++", "--"):
                self.next()
                return n.Unary(loc=t.loc, op=t.value, operand=self.parse_unary())
            if t.value in ("&", "*", "+", "-", "~", "!"):
                self.next()
                return n.Unary(loc=t.loc, op=t.value, operand=self.parse_cast())
        if t.kind == "id" and t.value == "sizeof":
            self.next()
            if self.at("(") and self.starts_type(1):
                self.next()
                tn = self.parse_type_name()
                self.expect(")")
                return n.SizeOf(loc=t.loc, type_name=tn)
            return n.SizeOf(loc=t.loc, operand=self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> n.Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if t is None or t.kind != "punct":
                return e
            if t.value == "[":
                self.next()
                idx = self.parse_expression()
                self.expect("]")
                e = n.Index(loc=t.loc, base=e, index=idx)
            elif t.value == "(":
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.parse_assignment())
                    while self.accept(","):
                        args.append(self.parse_assignment())
                self.expect(")")
                if isinstance(e, n.Ident) and e.name in UNSUPPORTED_CALLS:
                    raise UnsupportedConstruct(e.name, e.loc)
                e = n.Call(loc=e.loc, func=e, args=args)
            elif t.value in (".", "->"):
                self.next()
                name = self.next()
                if name.kind != "id":
                    raise ParseError("expected member name", name.loc)
                e = n.Member(loc=t.loc, base=e, name=name.value, arrow=t.value == "->")
            elif t.value in ("++", "--"):
                self.next()
                e = n.Postfix(loc=t.loc, op=t.value, operand=e)
            else:
                return e

    def parse_primary(self) -> n.Expr:
        t = self.next()
        if t.kind == "id":
            if t.value in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(t.value, t.loc)
            if t.value in SCALAR_WORDS or t.value in STORAGE or t.value in TAG_WORDS:
                raise ParseError(f"unexpected keyword {t.value!r}", t.loc)
            return n.Ident(loc=t.loc, name=t.value, macro=t.macro)
        if t.kind == "num":
            is_float = ("." in t.value or ("e" in t.value.lower() and not
                        t.value.lower().startswith("0x"))) or (t.value.lower().startswith("0x")
                                                              and "p" in t.value.lower())
            return n.Const(loc=t.loc, text=t.value, kind="float" if is_float else "int",
                           macro=t.macro)
        if t.kind == "chr":
            return n.Const(loc=t.loc, text=t.value, kind="char", macro=t.macro)
        if t.kind == "str":
            text = t.value
            while self.peek() is not None and self.peek().kind == "str":
                text += self.next().value
            return n.StringLit(loc=t.loc, text=text)
        if t.is_punct("("):
            if self.at("{"):
                raise UnsupportedConstruct("statement expression", t.loc)
            e = self.parse_expression()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {t.value!r}", t.loc)


def _check_case_placement(stmt, top: bool):
    """Case labels must sit at the top level of their switch body."""
    if isinstance(stmt, n.Case):
        if not top:
            raise UnsupportedConstruct("case label nested inside a statement", stmt.loc)
        _check_case_placement(stmt.stmt, top=True)
        return
    if isinstance(stmt, n.Compound):
        for item in stmt.items:
            _check_case_placement(item, top=top)
        return
    if isinstance(stmt, n.Switch):
        return
    for child in _sub_statements(stmt):
        _check_case_placement(child, top=False)


def _sub_statements(stmt):
    if isinstance(stmt, n.If):
        return [s for s in (stmt.then, stmt.other) if s is not None]
    if isinstance(stmt, (n.While, n.DoWhile, n.For)):
        return [stmt.body]
    return []


def evaluate_constant(e: n.Expr) -> int:
    """Integer constant expression value, for #if and friends."""
    from .preprocessor import parse_int_literal

    if isinstance(e, n.Const):
        if e.kind == "char":
            body = e.text.lstrip("L")[1:-1]
            return ord(body.encode().decode("unicode_escape")) if body else 0
        if e.kind == "float":
            raise ParseError("floating constant in integer expression", e.loc)
        return parse_int_literal(e.text)
    if isinstance(e, n.Unary):
        v = evaluate_constant(e.operand)
        return {"-": -v, "+": v, "~": ~v, "!": int(not v)}[e.op] if e.op in "-+~!" else _bad(e)
    if isinstance(e, n.Binary):
        if e.op == "&&":
            return int(bool(evaluate_constant(e.left)) and bool(evaluate_constant(e.right)))
        if e.op == "||":
            return int(bool(evaluate_constant(e.left)) or bool(evaluate_constant(e.right)))
        a, b = evaluate_constant(e.left), evaluate_constant(e.right)
        if e.op in ("/", "%") and b == 0:
            raise ParseError("division by zero in constant expression", e.loc)
        ops = {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "/": lambda: int(a / b), "%": lambda: a - int(a / b) * b,
            "<<": lambda: a << b, ">>": lambda: a >> b, "&": lambda: a & b,
            "|": lambda: a | b, "^": lambda: a ^ b, "==": lambda: int(a == b),
            "!=": lambda: int(a != b), "<": lambda: int(a < b), ">": lambda: int(a > b),
            "<=": lambda: int(a <= b), ">=": lambda: int(a >= b), ",": lambda: b,
        }
        return ops[e.op]()
    if isinstance(e, n.Conditional):
        return evaluate_constant(e.then if evaluate_constant(e.cond) else e.other)
    if isinstance(e, n.Cast):
        return evaluate_constant(e.operand)
    return _bad(e)


def _bad(e):
    raise ParseError("not an integer constant expression", e.loc)


def parse_translation_unit(tokens: list[Token]) -> n.TranslationUnit:
    return Parser(tokens).parse_translation_unit()
