"""A small C preprocessor: includes, object/function-like macros, conditionals.

Token pasting and stringizing are outside the supported subset.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass

from ..diagnostics import SourceLoc
from .lexer import FrontendError, ParseError, Token, UnsupportedConstruct, tokenize_source

MAX_INCLUDE_DEPTH = 32
MAX_MACRO_DEPTH = 64

BUILTIN_DIR = "<builtin>"

# Minimal stand-ins for freestanding headers, so `<stdint.h>` and friends resolve.
BUILTIN_HEADERS = {
    "stdint.h": """
#ifndef __ISCHECK_STDINT_H
#define __ISCHECK_STDINT_H
typedef signed char int8_t;
typedef short int16_t;
typedef int int32_t;
typedef long long int64_t;
typedef unsigned char uint8_t;
typedef unsigned short uint16_t;
typedef unsigned int uint32_t;
typedef unsigned long long uint64_t;
typedef long intptr_t;
typedef unsigned long uintptr_t;
#endif
""",
    "stdbool.h": """
#ifndef __ISCHECK_STDBOOL_H
#define __ISCHECK_STDBOOL_H
#define bool _Bool
#define true 1
#define false 0
#endif
""",
    "stddef.h": """
#ifndef __ISCHECK_STDDEF_H
#define __ISCHECK_STDDEF_H
typedef unsigned long size_t;
typedef long ptrdiff_t;
#define NULL ((void *)0)
#endif
""",
}

_INCLUDE_RE = re.compile(r'^[ \t]*#[ \t]*include[ \t]*(<[^>\n]*>|"[^"\n]*"|\S+)', re.M)


@dataclass(frozen=True)
class IncludeRecord:
    directive_text: str
    resolved_path: str | None
    is_header_suffix: bool
    loc: SourceLoc

    def __post_init__(self):
        if not self.directive_text:
            raise ValueError("empty include directive")


@dataclass
class Macro:
    name: str
    params: list[str] | None
    body: list[Token]
    variadic: bool = False


def header_suffix(directive_text: str) -> bool:
    return directive_text.strip('<>"').endswith(".h")


def scan_includes(path: str, text: str | None = None) -> list[IncludeRecord]:
    """Every #include line of a file, active or not, as written."""
    from .lexer import strip_comments

    if text is None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    text = strip_comments(text, path)
    records = []
    for m in _INCLUDE_RE.finditer(text):
        line = text.count("\n", 0, m.start()) + 1
        col = m.start(1) - (text.rfind("\n", 0, m.start(1)) + 1) + 1
        directive = m.group(1)
        records.append(IncludeRecord(directive, None, header_suffix(directive),
                                     SourceLoc(path, line, col)))
    return records


def _lines(tokens):
    line = []
    for t in tokens:
        if t.bol and line:
            yield line
            line = []
        line.append(t)
    if line:
        yield line


def parse_int_literal(text: str) -> int:
    s = text.rstrip("uUlL")
    if s.lower().startswith("0x"):
        return int(s, 16)
    if s.lower().startswith("0b"):
        return int(s, 2)
    if len(s) > 1 and s.startswith("0"):
        return int(s, 8)
    return int(s)


class Preprocessor:
    def __init__(self, include_dirs=(), defines=None, stubs=None, allow_unresolved=False):
        self.include_dirs = [os.path.normpath(d) for d in include_dirs]
        self.stubs = dict(BUILTIN_HEADERS)
        self.stubs.update(stubs or {})
        self.allow_unresolved = allow_unresolved
        self.macros: dict[str, Macro] = {}
        self.includes: list[IncludeRecord] = []
        self._once: set[str] = set()
        for name, value in (defines or {}).items():
            body = tokenize_source("1" if value is None else str(value), "<command line>")
            self.macros[name] = Macro(name, None, body)

    # -- files -------------------------------------------------------------

    def run(self, *paths: str) -> list[Token]:
        out: list[Token] = []
        for path in paths:
            out.extend(self._process(os.path.normpath(path), depth=0))
        return out

    def _read(self, path: str) -> str:
        if path.startswith(BUILTIN_DIR + "/"):
            return self.stubs[path[len(BUILTIN_DIR) + 1:]]
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise FrontendError(f"cannot read {path}: {exc.strerror}") from None

    def _process(self, path: str, depth: int) -> list[Token]:
        if depth > MAX_INCLUDE_DEPTH:
            raise FrontendError(f"include depth exceeds {MAX_INCLUDE_DEPTH} at {path}")
        if path in self._once:
            return []
        tokens = tokenize_source(self._read(path), path)
        out: list[Token] = []
        pending: list[Token] = []
        conds: list[dict] = []

        def active():
            return all(c["active"] for c in conds)

        for line in _lines(tokens):
            if not line[0].is_punct("#"):
                if active():
                    pending.extend(line)
                continue
            out.extend(self.expand(pending))
            pending = []
            self._directive(path, line, conds, active, out, depth)
        out.extend(self.expand(pending))
        if conds:
            raise FrontendError("unterminated conditional directive", conds[-1]["loc"])
        return out

    def _directive(self, path, line, conds, active, out, depth):
        hash_tok = line[0]
        if len(line) == 1:
            return
        name_tok = line[1]
        name = name_tok.value
        args = line[2:]
        loc = hash_tok.loc

        if name in ("if", "ifdef", "ifndef"):
            if not active():
                conds.append({"active": False, "taken": True, "else": False, "loc": loc})
                return
            if name == "if":
                value = self.evaluate(args, loc)
            else:
                if not args or args[0].kind != "id":
                    raise ParseError(f"#{name} requires a macro name", loc)
                value = (args[0].value in self.macros) == (name == "ifdef")
            conds.append({"active": value, "taken": value, "else": False, "loc": loc})
            return
        if name in ("elif", "else", "endif"):
            if not conds:
                raise ParseError(f"#{name} without #if", loc)
            top = conds[-1]
            if name == "endif":
                conds.pop()
                return
            if top["else"]:
                raise ParseError(f"#{name} after #else", loc)
            parent_active = all(c["active"] for c in conds[:-1])
            if name == "else":
                top["else"] = True
                top["active"] = parent_active and not top["taken"]
            else:
                top["active"] = (parent_active and not top["taken"]
                                 and self.evaluate(args, loc))
            top["taken"] = top["taken"] or top["active"]
            return
        if not active():
            return

        if name == "include":
            self._include(path, line, loc, out, depth)
        elif name == "define":
            self._define(args, loc)
        elif name == "undef":
            if args:
                self.macros.pop(args[0].value, None)
        elif name == "pragma":
            if args and args[0].value == "once":
                self._once.add(path)
        elif name == "error":
            raise FrontendError("#error " + " ".join(t.value for t in args), loc)
        elif name in ("warning", "line", "ident"):
            pass
        else:
            raise ParseError(f"unknown directive #{name}", loc)

    def _include(self, path, line, loc, out, depth):
        args = line[2:]
        if args and args[0].kind == "str":
            directive = args[0].value
            target = directive[1:-1]
            search = [os.path.dirname(path) or "."] + self.include_dirs
        elif args and args[0].is_punct("<"):
            close = next((i for i, t in enumerate(args) if t.is_punct(">")), None)
            if close is None:
                raise ParseError("malformed #include", loc)
            target = "".join(t.value for t in args[1:close])
            directive = f"<{target}>"
            search = list(self.include_dirs)
        else:
            raise UnsupportedConstruct("computed #include", loc)

        resolved = None
        if not path.startswith(BUILTIN_DIR):
            for d in search:
                candidate = os.path.normpath(os.path.join(d, target))
                if os.path.isfile(candidate):
                    resolved = candidate
                    break
        if resolved is None and target in self.stubs:
            resolved = f"{BUILTIN_DIR}/{target}"
        self.includes.append(IncludeRecord(directive, resolved, header_suffix(directive), loc))
        if resolved is None:
            if self.allow_unresolved:
                return
            raise FrontendError(f"cannot resolve include {directive}", loc)
        out.extend(self._process(resolved, depth + 1))

    def _define(self, args, loc):
        if not args or args[0].kind != "id":
            raise ParseError("#define requires a macro name", loc)
        name_tok = args[0]
        rest = args[1:]
        params = None
        variadic = False
        # function-like only when '(' immediately follows the name
        if rest and rest[0].is_punct("(") and rest[0].line == name_tok.line \
                and rest[0].col == name_tok.col + len(name_tok.value):
            params = []
            i = 1
            while i < len(rest) and not rest[i].is_punct(")"):
                t = rest[i]
                if t.is_punct("..."):
                    variadic = True
                elif t.kind == "id":
                    params.append(t.value)
                elif not t.is_punct(","):
                    raise ParseError(f"bad macro parameter {t.value!r}", t.loc)
                i += 1
            if i == len(rest):
                raise ParseError("unterminated macro parameter list", loc)
            rest = rest[i + 1:]
        self.macros[name_tok.value] = Macro(name_tok.value, params, rest, variadic)

    # -- expansion ---------------------------------------------------------

    def expand(self, tokens: list[Token]) -> list[Token]:
        out: list[Token] = []
        work = deque(tokens)
        while work:
            t = work.popleft()
            if t.kind != "id" or t.value in t.hide:
                out.append(t)
                continue
            if t.value == "__LINE__":
                out.append(t.copy(kind="num", value=str(t.line)))
                continue
            macro = self.macros.get(t.value)
            if macro is None:
                out.append(t)
                continue
            if macro.params is None:
                body = self._substitute(macro, t, {}, t.hide | {macro.name})
            else:
                if not work or not work[0].is_punct("("):
                    out.append(t)
                    continue
                args, rparen = self._collect_args(work, t)
                hide = (t.hide & rparen.hide) | {macro.name}
                body = self._substitute(macro, t, self._bind(macro, args, t), hide)
            work.extendleft(reversed(body))
        return out

    def _collect_args(self, work, name_tok):
        work.popleft()  # (
        args: list[list[Token]] = [[]]
        depth = 0
        while work:
            t = work.popleft()
            if t.is_punct("(") :
                depth += 1
            elif t.is_punct(")"):
                if depth == 0:
                    return args, t
                depth -= 1
            elif t.is_punct(",") and depth == 0:
                args.append([])
                continue
            args[-1].append(t)
        raise ParseError(f"unterminated invocation of macro {name_tok.value}", name_tok.loc)

    def _bind(self, macro, args, name_tok):
        if args == [[]] and not macro.params:
            args = []
        n = len(macro.params)
        if macro.variadic:
            if len(args) < n:
                raise ParseError(f"macro {macro.name} expects at least {n} arguments",
                                 name_tok.loc)
            fixed, extra = args[:n], args[n:]
            va: list[Token] = []
            for i, a in enumerate(extra):
                if i:
                    va.append(Token("punct", ",", name_tok.file, name_tok.line, name_tok.col))
                va.extend(a)
            bound = dict(zip(macro.params, fixed))
            bound["__VA_ARGS__"] = va
            return bound
        if len(args) != n:
            raise ParseError(f"macro {macro.name} expects {n} arguments, got {len(args)}",
                             name_tok.loc)
        return dict(zip(macro.params, args))

    def _substitute(self, macro, at: Token, bound, hide) -> list[Token]:
        depth = at.depth + 1
        if depth > MAX_MACRO_DEPTH:
            raise FrontendError(f"macro expansion deeper than {MAX_MACRO_DEPTH}", at.loc)
        origin = at.macro or macro.name
        result = []
        for b in macro.body:
            if b.is_punct("#") or b.is_punct("##"):
                raise UnsupportedConstruct(
                    f"stringizing/token pasting in macro {macro.name}", at.loc)
            if b.kind == "id" and b.value in bound:
                for a in self.expand(bound[b.value]):
                    result.append(a.copy(hide=a.hide | hide, depth=depth, bol=False))
            else:
                result.append(b.copy(file=at.file, line=at.line, col=at.col, bol=False,
                                     hide=b.hide | hide, macro=origin, depth=depth))
        return result

    # -- #if ---------------------------------------------------------------

    def evaluate(self, tokens: list[Token], loc: SourceLoc) -> bool:
        from .parser import Parser, evaluate_constant

        resolved: list[Token] = []
        i = 0
        while i < len(tokens):
            t = tokens[i]
            if t.kind == "id" and t.value == "defined":
                if i + 1 < len(tokens) and tokens[i + 1].is_punct("("):
                    name = tokens[i + 2] if i + 2 < len(tokens) else None
                    i += 4
                else:
                    name = tokens[i + 1] if i + 1 < len(tokens) else None
                    i += 2
                if name is None or name.kind != "id":
                    raise ParseError("malformed defined()", loc)
                resolved.append(t.copy(kind="num", value="1" if name.value in self.macros else "0"))
                continue
            resolved.append(t)
            i += 1
        expanded = [t.copy(kind="num", value="0") if t.kind == "id" else t
                    for t in self.expand(resolved)]
        if not expanded:
            raise ParseError("#if with no expression", loc)
        parser = Parser(expanded)
        expr = parser.parse_expression()
        parser.expect_end()
        return bool(evaluate_constant(expr))


def preprocess(entry_file: str, include_dirs=(), defines=None, **options):
    """Expand one file. Returns the token stream and the processed include directives."""
    pp = Preprocessor(include_dirs, defines, **options)
    tokens = pp.run(entry_file)
    return tokens, pp.includes
