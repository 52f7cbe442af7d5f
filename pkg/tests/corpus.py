"""Minimal violating / conforming modules, one pair per rule.

Every module is the small `m` module below with a few lines swapped. The
base module itself passes every task with no findings at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

TYPES_H = """\
#ifndef TYPES_H
#define TYPES_H
typedef unsigned short tU16;
typedef unsigned char tB;
#define NIL ((void *)0)
#endif
"""

EXT_H = """\
#ifndef EXT_H
#define EXT_H
#include "types.h"
void ext_open(void);
tU16 ext_read(void);
void ext_write(tU16 v);
void ext_other(void);
#endif
"""

CONTRACT = """\
module m {
  entry_points: { void m_init(void), void m_step(void) }
  entry_order: { m_init < m_step }
  external_calls: {
    ext.h: { void ext_open(void), tU16 ext_read(void), void ext_write(tU16 v) }
  }
  external_call_order: { ext_open < ext_read }
}
"""

HEADER = """\
#include "types.h"
void m_init(void);
void m_step(void);
"""

SOURCE = """\
#include "m.h"
#include "ext.h"

static tU16 level;

static tU16 clamp(tU16 v)
{
  if (v > 100) {
    return 100;
  }
  return v;
}

void m_init(void)
{
  ext_open();
  level = 0;
}

void m_step(void)
{
  tU16 r = ext_read();
  level = clamp(r + level);
  ext_write(level);
}
"""

# helper functions that are never called; dead code is still checked
HELPER_MARK = "static tU16 clamp"


@dataclass
class Case:
    rule: str
    kind: str  # violating | conforming
    header: str = HEADER
    source: str = SOURCE
    contract: str = CONTRACT
    # rules that the construct unavoidably also breaks
    also: frozenset = frozenset()
    null_macros: frozenset = frozenset()
    extra_files: dict = field(default_factory=dict)

    @property
    def id(self) -> str:
        return f"{self.rule}-{self.kind}"

    def write(self, root: Path) -> dict:
        root.mkdir(parents=True, exist_ok=True)
        files = {"types.h": TYPES_H, "ext.h": EXT_H, "m.h": self.header, "m.c": self.source,
                 "m.is": self.contract, **self.extra_files}
        for name, text in files.items():
            (root / name).write_text(text)
        return {"header": root / "m.h", "source": root / "m.c", "contract": root / "m.is"}


def _src(old, new, base=SOURCE):
    assert old in base, old
    return base.replace(old, new, 1)


def _helper(code):
    return _src(HELPER_MARK, code + "\n\n" + HELPER_MARK)


CASES = [
    # CFR1: only contracted external functions are called
    Case("CFR1", "violating", source=_src("  ext_write(level);", "  ext_write(level);\n  ext_other();")),
    Case("CFR1", "conforming", source=_src("  ext_write(level);", "  ext_write(level);\n  m_init();")),
    # CFR2: ext_open must come before ext_read
    Case("CFR2", "violating", source=_src("  ext_open();\n", "")),
    Case("CFR2", "conforming", source=_src("  ext_open();\n", "").replace(
        "  tU16 r = ext_read();", "  tU16 r;\n  ext_open();\n  r = ext_read();")),
    # CFR3: no function pointers, including a function name used as a value
    Case("CFR3", "violating", source=_src("  tU16 r = ext_read();",
                                         "  void (*fp)(void) = m_init;\n  tU16 r = ext_read();")),
    Case("CFR3", "conforming", source=_src("  tU16 r = ext_read();", "  tU16 r = ext_read();\n  m_init();")),
    # CFR4: the header holds declarations only. A header variable is also a DFR1 breach.
    Case("CFR4", "violating", header=HEADER + "static const tU16 LIMIT = 5;\n", also=frozenset({"DFR1"})),
    Case("CFR4", "conforming", header=HEADER + "enum { M_LIMIT = 5 };\n"),
    # CFR5: only .h files, even inside a disabled conditional
    Case("CFR5", "violating", source=_src('#include "ext.h"\n', '#include "ext.h"\n#if 0\n#include "util.c"\n#endif\n')),
    Case("CFR5", "conforming", source=_src('#include "ext.h"\n', '#include "ext.h"\n#include <stdint.h>\n')),
    # CFR6: entry points declared in the header, non-static
    Case("CFR6", "violating", header=HEADER.replace("void m_step(void);\n", "")),
    Case("CFR6", "conforming", source=_src('#include "ext.h"\n', '#include "ext.h"\nvoid m_step(void);\n')),
    # CFR7: entry points defined in the .c file
    Case("CFR7", "violating", source=SOURCE[:SOURCE.index("void m_step(void)\n{")]),
    Case("CFR7", "conforming"),
    # CFR8: non-entry functions are static
    Case("CFR8", "violating", source=_src("static tU16 clamp(", "tU16 clamp(")),
    Case("CFR8", "conforming", source=_src("static tU16 clamp(tU16 v)\n",
                                          "static tU16 clamp(tU16 v);\n\nstatic tU16 clamp(tU16 v)\n")),
    # CFR9: the header declares entry points only
    Case("CFR9", "violating", header=HEADER + "void m_reset(void);\n"),
    Case("CFR9", "conforming", header=HEADER + "/* void m_reset(void); */\n"),
    # CFR10: no extern, except on entry point declarations
    Case("CFR10", "violating", source=_src("static tU16 level;", "static tU16 level;\nextern tU16 other_level;")),
    Case("CFR10", "conforming", header=HEADER.replace("void m_init(void);", "extern void m_init(void);")),
    # CFR11: header signatures match the contract exactly
    Case("CFR11", "violating", header=HEADER.replace("void m_step(void);", "void m_step(tU16 v);"),
         source=_src("void m_step(void)\n", "void m_step(tU16 v)\n")),
    Case("CFR11", "conforming", header=HEADER.replace("void m_step(void);", "void  m_step ( void ) ;")),
    # DFR1: file-scope variables are static and in the .c file
    Case("DFR1", "violating", source=_src("static tU16 level;", "tU16 level;")),
    Case("DFR1", "conforming", source=_src("static tU16 level;", "static tU16 level;\nstatic tB seen = 0;")),
    # DFR2: no pointer arithmetic; array indexing is fine
    Case("DFR2", "violating", source=_helper("static tU16 second(const tU16 *p)\n{\n  return *(p + 1);\n}")),
    Case("DFR2", "conforming", source=_helper("static tU16 second(void)\n{\n  tU16 a[2] = {1, 2};\n  tU16 i = 1;\n  return a[i];\n}")),
    # DFR3: no casts to or from pointer types
    Case("DFR3", "violating", source=_helper("static tU16 addr(const tU16 *p)\n{\n  return (tU16)p;\n}")),
    Case("DFR3", "conforming", source=_helper("static tU16 narrow(tU16 v)\n{\n  return (tU16)(v + 1);\n}")),
    # DFR4: statics written before read, given the entry order
    Case("DFR4", "violating", source=_src("  level = 0;\n", "")),
    Case("DFR4", "conforming", source=_src("  level = 0;\n", "").replace("static tU16 level;", "static tU16 level = 0;")),
    # DFR5: no pointer literals; a configured null macro is accepted
    Case("DFR5", "violating", source=_helper("static void clear(void)\n{\n  tB *s = 0;\n}")),
    Case("DFR5", "conforming", source=_helper("static void clear(void)\n{\n  tB *s = NIL;\n}"),
         null_macros=frozenset({"NIL"})),
    # DFR6: typedefs instead of raw base types (advisory)
    Case("DFR6", "violating", source=_src("  tU16 r = ext_read();", "  int tmp = 0;\n  tU16 r = ext_read();")),
    Case("DFR6", "conforming", source=_src("  tU16 r = ext_read();", "  tU16 tmp = 0;\n  tU16 r = ext_read();")),
]

RULES = sorted({c.rule for c in CASES}, key=lambda r: (r[:3], int(r[3:])))
