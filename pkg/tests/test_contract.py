import pytest
from hypothesis import given, settings, strategies as st

from conftest import CONTRACTS, TMON
from ischeck.contract import (
    ContractSyntaxError, CycleError, OrderConstraint, load_contract, order_closure,
    parse_contract, render, validate_contract,
)
from ischeck.signature import CTypeText, FunSignature, normalize_type_text


def sig(text):
    return parse_contract("module x { entry_points: { %s } }" % text).entry_points[0]


def test_tmon_contract_structure(tmon_contract):
    c = tmon_contract
    assert c.module_name == "tmon"
    assert [s.render() for s in c.entry_points] == ["void tmon_init(void)", "int tmon_step(void)"]
    assert [(o.before, o.after) for o in c.entry_order] == [("tmon_init", "tmon_step")]
    assert [g.group_id for g in c.external_groups] == ["sensors", "warnings"]
    assert sorted(c.external_functions()) == [
        "tmon_sens_create", "tmon_sens_read", "tmon_warn_create", "tmon_warn_write"]
    assert [(o.before, o.after) for o in c.external_order] == [
        ("tmon_sens_create", "tmon_sens_read"), ("tmon_warn_create", "tmon_warn_write")]
    assert validate_contract(c) == []


def test_annotations_kept_but_ignored(tmon_contract):
    o = tmon_contract.external_order[0]
    assert o.annotations == (("X",), ("X",))
    assert o == OrderConstraint("tmon_sens_create", "tmon_sens_read")
    assert "tmon_sens_create(X) < tmon_sens_read(X)" in render(tmon_contract)


@pytest.mark.parametrize("name", ["sfld.is", "sgmm.is"])
def test_case_study_contracts(name):
    c = load_contract(str(CONTRACTS / name))
    assert validate_contract(c) == []
    assert parse_contract(render(c)) == c


def test_sfld_shape():
    c = load_contract(str(CONTRACTS / "sfld.is"))
    assert c.keyword("entry_points") == "entry_functions"
    assert len(c.external_functions()) == 12
    assert len(c.external_order) == 4
    assert c.external_groups[0].group_id == "rtdb.h" and c.external_groups[0].is_header
    # `a > b` is stored as `b < a`
    assert OrderConstraint("Rtdb_createLevel", "Rtdb_readLevel") in c.external_order


def test_sgmm_shape():
    c = load_contract(str(CONTRACTS / "sgmm.is"))
    assert len(c.external_functions()) == 13
    assert c.entry_order == ()
    group, s = c.external_functions()["Util_registerEvent"]
    assert group.group_id == "util.h"
    assert s.render() == "void Util_registerEvent(void *, tU16)"
    assert c.external_functions()["Rtdb_LowValve_write"][1].params == (
        CTypeText("const tB"),)


def test_aliases_and_optional_colon():
    text = """module q {
      EntryPoint { void q_a(void), void q_b(void) }
      EntryOrder { q_a < q_b }
      ExtCalls { lib: { int lib_f(int) } }
      ExtOrder { }
    }"""
    c = parse_contract(text)
    assert c.entry_names == ["q_a", "q_b"]
    assert c.external_functions()["lib_f"][1].arity == 1
    assert parse_contract(render(c)) == c


def test_missing_sections_are_empty():
    c = parse_contract("module e { }")
    assert c.entry_points == () and c.external_groups == () and c.external_order == ()
    assert validate_contract(c) == []


def test_parameter_names_are_dropped():
    assert sig("void f(int x, char *name)") == sig("void f(int, char*)")
    assert sig("void f(void)").params == ()
    assert sig("void f()").params == ()


def test_signature_spelling_is_significant():
    assert sig("unsigned int f(void)") != sig("unsigned f(void)")
    assert sig("tU16 f(void)") != sig("unsigned short f(void)")
    assert sig("int  *  f ( const  char * s )") == sig("int *f(const char *)")


@pytest.mark.parametrize("text, fragment", [
    ("", "expected 'module'"),
    ("module m { bogus: { } }", "unknown section keyword"),
    ("module m { entry_points: { } entry_points: { } }", "duplicate section"),
    ("module m { external_calls: { lib: { } } }", "is empty"),
    ("module m { entry_order: { a < a } }", "ordered against itself"),
    ("module m { entry_points: { static void f(void) } }", "storage class"),
    ("module m { entry_points: { int x } }", "not a function declaration"),
    ("module m { entry_order: { a b } }", "expected '<' or '>'"),
    ("module m { entry_points: { void f(void) }", "expected"),
    ("module m { } trailing", "unexpected text"),
])
def test_syntax_errors(text, fragment):
    with pytest.raises(ContractSyntaxError) as info:
        parse_contract(text, "bad.is")
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_syntax_error_location():
    with pytest.raises(ContractSyntaxError) as info:
        parse_contract("module m {\n  entry_points: { void f(void) }\n  wrong: { }\n}", "bad.is")
    assert (info.value.line, info.value.column) == (3, 3)


def test_validation_findings():
    text = """module m {
      entry_points: { void a(void), void b(void), void a(void) }
      entry_order: { a < b, b < a, a < zz }
      external_calls: { lib: { void f(void), void g(void) }, other: { void f(void) } }
      external_order: { f < nope }
    }"""
    messages = [d.message for d in validate_contract(parse_contract(text))]
    assert any("duplicate entry point a" in m for m in messages)
    assert any("function f is declared more than once" in m for m in messages)
    assert any("unknown entry point zz" in m for m in messages)
    assert any("unknown external function nope" in m for m in messages)
    assert any("cycle" in m for m in messages)
    assert all(d.rule_id == "IS" for d in validate_contract(parse_contract(text)))


def test_order_closure():
    assert order_closure([("a", "b"), ("b", "c")]) == {("a", "b"), ("b", "c"), ("a", "c")}
    assert order_closure([]) == frozenset()
    with pytest.raises(CycleError) as info:
        order_closure([("a", "b"), ("b", "c"), ("c", "a")])
    assert info.value.vertices == {"a", "b", "c"}


def test_load_fixture_roundtrip():
    c = load_contract(str(TMON / "tmon.is"))
    again = parse_contract(render(c))
    assert again == c
    assert render(again) == render(c)


# -- properties -------------------------------------------------------------

names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in {"int", "char", "void", "long", "short", "float", "double", "signed",
                        "unsigned", "const", "static", "extern", "module", "if", "do", "for",
                        "auto", "case", "else", "enum", "goto", "while", "break", "union",
                        "struct", "switch", "return", "sizeof", "typedef", "default",
                        "inline", "register", "restrict", "volatile", "continue"})
types = st.sampled_from(["int", "void *", "const char *", "unsigned short", "tU16", "tB",
                         "long long", "struct s *", "int [4]", "double"])
ret_types = st.sampled_from(["void", "int", "tB", "const char *", "unsigned long"])


@st.composite
def contracts(draw):
    fn_names = draw(st.lists(names, min_size=1, max_size=8, unique=True))
    k = draw(st.integers(0, len(fn_names)))
    entries, externals = fn_names[:k], fn_names[k:]

    def decl(name):
        params = draw(st.lists(types, max_size=3))
        return f"{draw(ret_types)} {name}({', '.join(params) or 'void'})"

    def order(pool):
        pairs = [(a, b) for i, a in enumerate(pool) for b in pool[i + 1:]]
        chosen = draw(st.lists(st.sampled_from(pairs), max_size=4, unique=True)) if pairs else []
        return ", ".join(f"{a} < {b}" if draw(st.booleans()) else f"{b} > {a}" for a, b in chosen)

    groups = []
    rest = list(externals)
    gid = 0
    while rest:
        take = draw(st.integers(1, len(rest)))
        gname = f"grp{gid}" + (".h" if draw(st.booleans()) else "")
        groups.append(f"{gname}: {{ {', '.join(decl(n) for n in rest[:take])} }}")
        rest = rest[take:]
        gid += 1
    return (f"module m {{ entry_points: {{ {', '.join(decl(n) for n in entries)} }} "
            f"entry_order: {{ {order(entries)} }} external_calls: {{ {', '.join(groups)} }} "
            f"external_call_order: {{ {order(externals)} }} }}")


@settings(max_examples=150, deadline=None)
@given(contracts())
def test_render_parse_roundtrip(text):
    c = parse_contract(text)
    assert validate_contract(c) == []
    rendered = render(c)
    assert parse_contract(rendered) == c
    assert render(parse_contract(rendered)) == rendered


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["int", "*", "const", "(", ")", "[", "4", "]", "char", ",",
                                 "unsigned", "tU16"]), min_size=1, max_size=10),
       st.lists(st.sampled_from([" ", "  ", "\t", ""]), min_size=10, max_size=10))
def test_type_normalization_idempotent(tokens, gaps):
    text = "".join(t + (g or " ") for t, g in zip(tokens, gaps))
    once = normalize_type_text(text)
    assert "\n" not in once and "  " not in once
    assert normalize_type_text(once) == once


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=10))
def test_closure_is_a_strict_order(pairs):
    pairs = [(f"v{a}", f"v{b}") for a, b in pairs if a < b]  # acyclic by construction
    cl = order_closure(pairs)
    assert set(pairs) <= cl
    assert all(a != b for a, b in cl)
    for a, b in cl:
        for c, d in cl:
            if b == c:
                assert (a, d) in cl


def test_fun_signature_validation():
    with pytest.raises(ValueError):
        FunSignature("1bad", CTypeText("int", "return-type"))
    with pytest.raises(ValueError):
        CTypeText("")
    with pytest.raises(ValueError):
        OrderConstraint("a", "a")
