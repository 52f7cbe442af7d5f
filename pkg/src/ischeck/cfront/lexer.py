"""Tokenizer shared by the C front end and the contract language."""

from __future__ import annotations

import re

from ..diagnostics import SourceLoc


class FrontendError(Exception):
    """Input could not be turned into a module model."""

    def __init__(self, message: str, loc: SourceLoc | None = None):
        self.message = message
        self.loc = loc
        super().__init__(f"{loc}: {message}" if loc else message)


class ParseError(FrontendError):
    pass


class UnsupportedConstruct(FrontendError):
    """Valid C outside the subset this front end accepts."""

    def __init__(self, construct: str, loc: SourceLoc | None = None):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", loc)


KEYWORDS = frozenset("""
auto break case char const continue default do double else enum extern float
for goto if inline int long register restrict return short signed sizeof static
struct switch typedef union unsigned void volatile while _Bool _Complex _Imaginary
""".split())

# Spellings this front end refuses outright.
UNSUPPORTED_KEYWORDS = frozenset({
    "_Generic", "asm", "__asm__", "__asm", "__attribute__", "__extension__",
    "__typeof__", "typeof", "_Alignas", "_Alignof", "_Atomic", "_Noreturn",
    "_Static_assert", "_Thread_local", "__declspec",
})

_TOKEN_RE = re.compile(r"""
 (?P<ws>[ \t\f\v\r]+)
|(?P<cont>\\\r?\n)
|(?P<nl>\n)
|(?P<chr>L?'(?:[^'\\\n]|\\.)*')
|(?P<str>L?"(?:[^"\\\n]|\\.)*")
|(?P<num>\.?[0-9](?:[eEpP][+-]|[0-9A-Za-z_.])*)
|(?P<id>[A-Za-z_][A-Za-z0-9_]*)
|(?P<punct>\.\.\.|<<=|>>=|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[*/%+\-&^|]=|\#\#
   |[\[\](){}.,;:?~!<>=+\-*/%&^|\#])
""", re.X)


class Token:
    """One preprocessing token. `macro` names the outermost macro it came from."""

    __slots__ = ("kind", "value", "file", "line", "col", "bol", "hide", "macro", "depth")

    def __init__(self, kind, value, file, line, col, bol=False, hide=frozenset(),
                 macro=None, depth=0):
        self.kind = kind
        self.value = value
        self.file = file
        self.line = line
        self.col = col
        self.bol = bol
        self.hide = hide
        self.macro = macro
        self.depth = depth

    @property
    def loc(self) -> SourceLoc:
        return SourceLoc(self.file, self.line, self.col)

    def copy(self, **changes) -> "Token":
        t = Token(self.kind, self.value, self.file, self.line, self.col, self.bol,
                  self.hide, self.macro, self.depth)
        for k, v in changes.items():
            setattr(t, k, v)
        return t

    def is_punct(self, value: str) -> bool:
        return self.kind == "punct" and self.value == value

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def strip_comments(text: str, file: str = "<input>") -> str:
    """Blank out comments, keeping line and column positions intact."""
    out = []
    i, n = 0, len(text)
    line = 1
    while i < n:
        c = text[i]
        if c in "\"'":
            j = i + 1
            while j < n and text[j] != c and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            out.append(text[i:j + 1])
            i = j + 1
        elif text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            out.append(" " * (j - i))
            i = j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated comment", SourceLoc(file, line, 1))
            chunk = text[i:j + 2]
            out.append("".join("\n" if ch == "\n" else " " for ch in chunk))
            line += chunk.count("\n")
            i = j + 2
        else:
            if c == "\n":
                line += 1
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(text: str, file: str = "<input>", line: int = 1) -> list[Token]:
    """Tokenize comment-free text. Tokens starting a logical line get bol=True."""
    tokens: list[Token] = []
    pos = 0
    line_start = 0
    bol = True
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceLoc(file, line, pos - line_start + 1))
        kind = m.lastgroup
        if kind == "nl" or kind == "cont":
            line += 1
            line_start = m.end()
            if kind == "nl":
                bol = True
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), file, line, pos - line_start + 1, bol))
            bol = False
        pos = m.end()
    return tokens


def tokenize_source(text: str, file: str = "<input>") -> list[Token]:
    return tokenize(strip_comments(text, file), file)
