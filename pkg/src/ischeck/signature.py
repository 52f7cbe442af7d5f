"""Textual function signatures, compared token-for-token (typedefs unresolved)."""

from __future__ import annotations

import re
from dataclasses import dataclass

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_NO_SPACE_BEFORE = frozenset({")", "]", ",", "["})
_NO_SPACE_AFTER = frozenset({"(", "["})


def normalize_type_tokens(tokens) -> str:
    """Join token spellings with single spaces, tightening around brackets and stars."""
    out: list[str] = []
    prev = None
    for tok in tokens:
        v = tok if isinstance(tok, str) else tok.value
        if prev is not None and not (v in _NO_SPACE_BEFORE or prev in _NO_SPACE_AFTER
                                     or (v == "*" and prev == "*")):
            out.append(" ")
        out.append(v)
        prev = v
    return "".join(out)


def normalize_type_text(text: str) -> str:
    from .cfront.lexer import tokenize_source

    return normalize_type_tokens(tokenize_source(text))


@dataclass(frozen=True)
class CTypeText:
    text: str
    kind: str = "parameter-type"  # return-type | parameter-type

    def __post_init__(self):
        if not self.text or "\n" in self.text:
            raise ValueError(f"bad type text {self.text!r}")
        if self.kind not in ("return-type", "parameter-type"):
            raise ValueError(f"bad type text kind {self.kind!r}")

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class FunSignature:
    name: str
    return_type: CTypeText
    params: tuple[CTypeText, ...] = ()

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"not an identifier: {self.name!r}")
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def arity(self) -> int:
        return len(self.params)

    def render(self) -> str:
        params = ", ".join(p.text for p in self.params) or "void"
        ret = self.return_type.text
        sep = "" if ret.endswith("*") else " "
        return f"{ret}{sep}{self.name}({params})"

    def __str__(self) -> str:
        return self.render()


def signature_from_declarator(specs, declarator) -> FunSignature:
    """Signature text of a parsed function declarator; parameter names are dropped."""
    ret_tokens = list(specs.tokens)
    for tok in declarator.tokens:
        if tok is declarator.name_token:
            break
        ret_tokens.append(tok)
    params = []
    for p in declarator.params or ():
        name_tok = p.declarator.name_token
        toks = [t for t in p.tokens if t is not name_tok]
        params.append(CTypeText(normalize_type_tokens(toks), "parameter-type"))
    return FunSignature(declarator.name,
                        CTypeText(normalize_type_tokens(ret_tokens), "return-type"),
                        tuple(params))
