import re

from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import build_module
from modgen import generate
from ischeck.dataflow import check_init_before_read, compute_effects
from ischeck.oracle import enumerate_init_oracle

HDR = "void m_init(void);\nvoid m_step(void);\n"
CONTRACT = """module m {
  entry_points: { void m_init(void), void m_step(void) }
  entry_order: { m_init < m_step }
}"""
UNORDERED = CONTRACT.replace("m_init < m_step", "")


def check(tmp_path, source, contract=CONTRACT):
    m, c = build_module(tmp_path, HDR, '#include "m.h"\n' + source, contract)
    return m, c, check_init_before_read(m, c)


def subjects(result):
    return sorted({(d.subject, d.message.split(" in ")[1].split()[0]) for d in result.violations
                   if "may be read" in d.message})


def test_tmon_effects(tmon_modules):
    eff = compute_effects(tmon_modules["a"])
    assert eff["tmon_init"].must_write == {"timer"}
    assert eff["tmon_init"].may_read_before_write == frozenset()
    assert eff["tmon_step"].must_write == {"timer"}
    assert eff["tmon_step"].may_read_before_write == {"timer"}


def test_tmon_verdicts(tmon_modules, tmon_contract):
    assert check_init_before_read(tmon_modules["a"], tmon_contract).status == "pass"
    r = check_init_before_read(tmon_modules["b"], tmon_contract)
    assert sorted(d.message.split()[5] for d in r.violations) == ["get_tmon_timer", "tmon_step"]


def test_empty_function(tmp_path):
    m, _, _ = check(tmp_path, "void m_init(void) { }\nvoid m_step(void) { }\n")
    assert compute_effects(m)["m_init"].must_write == frozenset()
    assert compute_effects(m)["m_init"].may_read_before_write == frozenset()


def test_explicit_initializer(tmp_path):
    src = "static int x = 0;\nstatic int y;\nvoid m_init(void) { }\nvoid m_step(void) { y = x; }\n"
    assert check(tmp_path, src)[2].status == "pass"


def test_order_matters(tmp_path):
    src = "static int x;\nvoid m_init(void) { x = 1; }\nvoid m_step(void) { int v = x; }\n"
    assert check(tmp_path, src)[2].status == "pass"
    assert subjects(check(tmp_path, src, UNORDERED)[2]) == [("x", "m_step")]


def test_read_then_write_same_statement(tmp_path):
    src = "static int g;\nvoid m_init(void) { g = g + 1; }\nvoid m_step(void) { }\n"
    m, _, r = check(tmp_path, src)
    assert compute_effects(m)["m_init"].may_read_before_write == {"g"}
    assert compute_effects(m)["m_init"].must_write == {"g"}
    assert subjects(r) == [("g", "m_init")]


def test_branch_write_is_not_must(tmp_path):
    src = ("static int g;\nvoid m_init(void) { int k = 0; if (k) { g = 1; } }\n"
           "void m_step(void) { int v = g; }\n")
    m, _, r = check(tmp_path, src)
    assert compute_effects(m)["m_init"].must_write == frozenset()
    assert subjects(r) == [("g", "m_step")]
    both = src.replace("if (k) { g = 1; }", "if (k) { g = 1; } else { g = 2; }")
    assert check(tmp_path, both)[2].status == "pass"


def test_loop_writes_are_not_must(tmp_path):
    for loop in ["while (k) { g = 1; }", "for (k = 0; k < 3; k++) { g = 1; }"]:
        src = (f"static int g;\nvoid m_init(void) {{ int k = 0; {loop} }}\n"
               "void m_step(void) { int v = g; }\n")
        m, _, r = check(tmp_path, src)
        assert compute_effects(m)["m_init"].must_write == frozenset()
        assert r.status == "fail"


def test_local_callee_is_spliced(tmp_path):
    src = ("static int g;\nstatic void set(void) { g = 1; }\nstatic int get(void) { return g; }\n"
           "void m_init(void) { set(); }\nvoid m_step(void) { int v = get(); }\n")
    m, _, r = check(tmp_path, src, UNORDERED)
    eff = compute_effects(m)
    assert eff["m_init"].must_write == {"g"}
    assert eff["m_step"].may_read_before_write == {"g"}
    assert r.status == "fail"
    assert check(tmp_path, src)[2].status == "pass"
    inside = src.replace("void m_step(void) { int v = get(); }", "void m_step(void) { set(); int v = get(); }")
    assert check(tmp_path, inside, UNORDERED)[2].status == "pass"


def test_element_write_is_not_a_write(tmp_path):
    src = ("static int a[2];\nvoid m_init(void) { a[0] = 1; }\n"
           "void m_step(void) { int v = a[0]; }\n")
    r = check(tmp_path, src)[2]
    assert ("a", "m_step") in subjects(r)


def test_address_taken_is_a_violation(tmp_path):
    src = "static int g = 0;\nvoid m_init(void) { int *p = &g; }\nvoid m_step(void) { }\n"
    r = check(tmp_path, src)[2]
    assert r.status == "fail" and "address of g" in r.violations[0].message


def test_non_contract_public_function_is_checked(tmp_path):
    src = ("static int g;\nvoid m_init(void) { g = 1; }\nvoid m_step(void) { }\n"
           "int m_peek(void) { return g; }\n")
    assert subjects(check(tmp_path, src)[2]) == [("g", "m_peek")]


# -- properties on generated modules ----------------------------------------

def _parse(tmp, seed):
    from ischeck.cfront.model import parse_module
    from ischeck.contract import load_contract
    g = generate(seed)
    p = g.write(tmp)
    return g, parse_module(str(p["header"]), str(p["source"]), [str(tmp)]), load_contract(str(p["contract"]))


def _rewrite(tmp, g, source):
    from ischeck.cfront.model import parse_module
    (tmp / "g.c").write_text(source)
    return parse_module(str(tmp / "g.h"), str(tmp / "g.c"), [str(tmp)])


def _by_var(result):
    return sorted((d.subject, str(d.loc), d.message) for d in result.violations)


SETTINGS = settings(max_examples=40, deadline=None,
                    suppress_health_check=[HealthCheck.function_scoped_fixture])


@SETTINGS
@given(st.integers(0, 10_000))
def test_initializer_monotonicity(tmp_path_factory, seed):
    tmp = tmp_path_factory.mktemp("mono")
    g, m, c = _parse(tmp, seed)
    before = _by_var(check_init_before_read(m, c))
    for var in sorted({v for v, _, _ in before}):
        src = re.sub(rf"static tI {var};", f"static tI {var} = 0;", g.source)
        after = _by_var(check_init_before_read(_rewrite(tmp, g, src), c))
        assert after == [x for x in before if x[0] != var]


@SETTINGS
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_effects_ignore_definition_order(tmp_path_factory, seed, rnd):
    tmp = tmp_path_factory.mktemp("order")
    g, m, c = _parse(tmp, seed)
    head, *defs = re.split(r"\n(?=void e\d)", g.source)
    rnd.shuffle(defs)
    shuffled = _rewrite(tmp, g, head + "\n" + "\n".join(defs))
    strip = lambda eff: {k: (v.must_write, v.may_read_before_write) for k, v in eff.items()}
    assert strip(compute_effects(m)) == strip(compute_effects(shuffled))
    assert compute_effects(m) == compute_effects(m)


@SETTINGS
@given(st.integers(0, 10_000))
def test_static_pass_implies_oracle_pass(tmp_path_factory, seed):
    tmp = tmp_path_factory.mktemp("t9")
    _, m, c = _parse(tmp, seed)
    if check_init_before_read(m, c).status == "pass":
        assert not enumerate_init_oracle(m, c).violation
