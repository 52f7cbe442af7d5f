"""Minimal C type model: enough to tell pointers, arrays and functions apart."""

from __future__ import annotations

from dataclasses import dataclass, field

# Arithmetic base types that DFR6 wants hidden behind typedefs.
RAW_BASE_WORDS = frozenset({"char", "short", "int", "long", "signed", "unsigned",
                            "float", "double"})


@dataclass(frozen=True)
class CType:
    kind: str  # void | scalar | pointer | array | function | struct | union | enum | unknown
    name: str = ""
    of: "CType | None" = None
    params: tuple["CType", ...] = ()
    variadic: bool = False
    size: str | None = None
    typedef: str | None = field(default=None, compare=False)

    @property
    def is_pointer(self) -> bool:
        return self.kind == "pointer"

    @property
    def is_array(self) -> bool:
        return self.kind == "array"

    @property
    def is_function(self) -> bool:
        return self.kind == "function"

    @property
    def is_aggregate(self) -> bool:
        return self.kind in ("array", "struct", "union")

    def pointer_like(self) -> bool:
        """Pointer-typed once arrays and functions decay."""
        return self.kind in ("pointer", "array", "function")

    def mentions_function_pointer(self) -> bool:
        t = self
        while t is not None:
            if t.kind == "pointer" and t.of is not None and t.of.kind == "function":
                return True
            if t.kind == "function":
                if any(p.kind == "function" or p.mentions_function_pointer() for p in t.params):
                    return True
            t = t.of
        return False

    def target(self) -> "CType":
        """Pointee or element type; unknown for anything else."""
        if self.kind in ("pointer", "array") and self.of is not None:
            return self.of
        return UNKNOWN

    def with_typedef(self, name: str) -> "CType":
        return CType(self.kind, self.name, self.of, self.params, self.variadic,
                     self.size, name)

    def render(self) -> str:
        if self.typedef:
            return self.typedef
        if self.kind in ("void", "scalar", "unknown"):
            return self.name or self.kind
        if self.kind in ("struct", "union", "enum"):
            return f"{self.kind} {self.name}"
        if self.kind == "pointer":
            return f"{self.of.render()} *"
        if self.kind == "array":
            return f"{self.of.render()}[{self.size or ''}]"
        params = ", ".join(p.render() for p in self.params) or "void"
        return f"{self.of.render()}({params})"


VOID = CType("void", "void")
INT = CType("scalar", "int")
CHAR = CType("scalar", "char")
DOUBLE = CType("scalar", "double")
UNKNOWN = CType("unknown")


def pointer_to(t: CType) -> CType:
    return CType("pointer", of=t)


def array_of(t: CType, size: str | None = None) -> CType:
    return CType("array", of=t, size=size)


def function_returning(ret: CType, params=(), variadic=False) -> CType:
    return CType("function", of=ret, params=tuple(params), variadic=variadic)


def adjust_parameter(t: CType) -> CType:
    """Function parameters of function type become function pointers."""
    if t.kind == "function":
        return pointer_to(t)
    return t
