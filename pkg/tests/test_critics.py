import sys
import time

import pytest

from ischeck.critics import (
    GATE_FAILED, CriticConfigError, CriticSpec, load_critics, parse_critics, run_critic, run_critics,
)

PY = sys.executable
PATHS = {"source": "m.c", "header": "m.h", "contract": "m.is"}


def script(code, **kw):
    return CriticSpec(kw.pop("name", "c"), (PY, "-c", code, "{source}"), **kw)


def test_exit_code_pass_and_fail():
    assert run_critic(script("pass"), PATHS).status == "pass"
    out = run_critic(script("import sys; sys.exit(3)"), PATHS)
    assert out.status == "fail" and out.reason == "exit code 3"
    assert run_critic(script("import sys; sys.exit(3)", pass_exit_codes=frozenset({0, 3})),
                      PATHS).status == "pass"


def test_placeholders_are_substituted():
    out = run_critic(script("import sys; print(sys.argv[1])"), PATHS)
    assert out.raw_excerpt.strip() == "m.c"


def test_patterns_and_counters():
    wp = script("print('Proved goals:   86 / 86')", pass_pattern=r"Proved goals:\s+(\d+) / \1\b",
                counters={"proven": r"Proved goals:\s+(\d+)", "total": r"Proved goals:\s+\d+ / (\d+)"})
    out = run_critic(wp, PATHS)
    assert out.status == "pass" and out.detail == {"proven": 86, "total": 86}
    partial = script("print('Proved goals:   80 / 86')", pass_pattern=wp.pass_pattern,
                     counters=wp.counters)
    out = run_critic(partial, PATHS)
    assert out.status == "fail" and out.detail == {"proven": 80, "total": 86}
    misra = script("print('\\n'.join(['[misra-c2012-10.3] required'] * 6 + ['x advisory']))",
                   fail_pattern=r"\brequired\b",
                   counters={"required": r"\brequired\b", "advisory": r"\badvisory\b"})
    out = run_critic(misra, PATHS)
    assert out.status == "fail" and out.reason == "fail pattern matched"
    assert out.detail == {"required": 6, "advisory": 1}


def test_counter_without_numeric_group_counts_matches():
    spec = script("print('a required\\nb required\\nc advisory')",
                  counters={"required": r"(\w) required", "missing": r"nothing"})
    assert run_critic(spec, PATHS).detail == {"required": 2}


def test_timeout_and_missing_command():
    out = run_critic(script("import time; time.sleep(5)", timeout=0.3), PATHS)
    assert out.status == "error" and "timed out" in out.reason
    out = run_critic(CriticSpec("x", ("/no/such/tool", "{source}")), PATHS)
    assert out.status == "error" and "command not found" in out.reason


def test_gate_failure_skips_the_rest():
    specs = [script("import sys; sys.exit(1)", name="compile"), script("pass", name="wp"),
             script("pass", name="misra")]
    outs = run_critics(specs, PATHS)
    assert [(o.critic_name, o.status) for o in outs] == [
        ("compile", "fail"), ("wp", "skipped"), ("misra", "skipped")]
    assert all(o.reason == GATE_FAILED for o in outs[1:])


def test_gate_pass_runs_rest_concurrently_in_order():
    slow = "import time; time.sleep(0.4)"
    specs = [script("pass", name="compile")] + [script(slow, name=f"s{i}") for i in range(4)]
    started = time.perf_counter()
    outs = run_critics(specs, PATHS)
    assert time.perf_counter() - started < 1.2
    assert [o.critic_name for o in outs] == ["compile", "s0", "s1", "s2", "s3"]
    assert all(o.status == "pass" for o in outs)
    assert run_critics([], PATHS) == []


def test_config_file(tmp_path):
    cfg = tmp_path / "critics.toml"
    cfg.write_text(f"""
[[critic]]
name = "compile"
command = ["{PY}", "-c", "pass", "{{source}}"]

[[critic]]
name = "misra"
command = "cppcheck --addon=misra {{source}}"
pass_exit_codes = [0, 1]
fail_pattern = "required"
timeout = 30
required = false
[critic.counters]
required = "(\\\\d+) required"
""")
    specs = load_critics(cfg)
    assert [s.name for s in specs] == ["compile", "misra"]
    assert specs[1].command == ("cppcheck", "--addon=misra", "{source}")
    assert specs[1].pass_exit_codes == {0, 1} and not specs[1].required
    assert specs[1].counters == {"required": r"(\d+) required"}
    assert specs[0].timeout == 60


@pytest.mark.parametrize("text, fragment", [
    ('[[critic]]\nname = "a"\ncommand = []', "empty command"),
    ('[[critic]]\nname = "a"\ncommand = "x"\ntimeout = 0', "timeout"),
    ('[[critic]]\nname = "a"\ncommand = "x"\nbogus = 1', "unknown critic field"),
    ('[[critic]]\nname = "a"\ncommand = "x"\npass_pattern = "("', "bad pattern"),
    ('[[critic]]\nname = "a"\ncommand = "x"\n[[critic]]\nname = "a"\ncommand = "y"', "unique"),
    ("[[critic]\n", "invalid critics file"),
])
def test_config_errors(text, fragment):
    with pytest.raises(CriticConfigError, match=fragment):
        parse_critics(text)


def test_unknown_placeholder():
    with pytest.raises(CriticConfigError, match="placeholder"):
        CriticSpec("x", ("tool", "{object}")).argv(PATHS)
