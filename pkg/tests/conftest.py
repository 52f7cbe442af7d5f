import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"
TMON = FIXTURES / "tmon"
CONTRACTS = FIXTURES / "contracts"


def tmon_paths(variant):
    return {"header": str(TMON / f"tmon_{variant}.h"), "source": str(TMON / f"tmon_{variant}.c"),
            "contract": str(TMON / "tmon.is"), "include_dirs": [str(TMON)]}


@pytest.fixture(scope="session")
def tmon_contract():
    from ischeck.contract import load_contract
    return load_contract(str(TMON / "tmon.is"))


@pytest.fixture(scope="session")
def tmon_modules():
    from ischeck.cfront.model import parse_module
    out = {}
    for v in "ab":
        p = tmon_paths(v)
        out[v] = parse_module(p["header"], p["source"], p["include_dirs"])
    return out


def build_module(tmp_path, header, source, contract=None, extra=None, include_dirs=()):
    """Write a module to tmp_path and parse it (and its contract, if any)."""
    from ischeck.cfront.model import parse_module
    from ischeck.contract import parse_contract
    (tmp_path / "m.h").write_text(header)
    (tmp_path / "m.c").write_text(source)
    for name, text in (extra or {}).items():
        (tmp_path / name).write_text(text)
    m = parse_module(str(tmp_path / "m.h"), str(tmp_path / "m.c"),
                     [str(tmp_path), *include_dirs])
    c = parse_contract(contract, str(tmp_path / "m.is")) if contract is not None else None
    return m, c


# -- acceptance summary ------------------------------------------------------
# Tests marked ``acceptance(n)`` get one PASS/FAIL line each in the terminal
# summary; ``record_property("info", ...)`` adds a short note to the line.

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not mark.args:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        info = "; ".join(str(v) for k, v in item.user_properties if k == "info")
        _ACCEPTANCE[mark.args[0]] = (rep.passed, item.name, info)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, name, info = _ACCEPTANCE[n]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  ({info})" if info else ""))
