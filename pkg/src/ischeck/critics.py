"""External critics: config loading and gated execution.

A critics file is TOML with one ``[[critic]]`` table per critic, run in file
order. The first critic is the gate; when it does not pass, every other
critic is reported as skipped.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .report import CriticOutcome

GATE_FAILED = "gate failed"


class CriticConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CriticSpec:
    name: str
    command: tuple[str, ...]  # argv template with {source}, {header}, {contract}
    pass_exit_codes: frozenset = frozenset({0})
    pass_pattern: str | None = None
    fail_pattern: str | None = None
    counters: dict = field(default_factory=dict, hash=False)  # name -> regex, see _counts
    timeout: float = 60.0
    required: bool = True

    def __post_init__(self):
        if not self.name:
            raise CriticConfigError("critic needs a name")
        if not self.command:
            raise CriticConfigError(f"critic {self.name}: empty command")
        if self.timeout <= 0:
            raise CriticConfigError(f"critic {self.name}: timeout must be positive")
        for pat in [self.pass_pattern, self.fail_pattern, *self.counters.values()]:
            if pat is None:
                continue
            try:
                re.compile(pat)
            except re.error as e:
                raise CriticConfigError(f"critic {self.name}: bad pattern {pat!r}: {e}") from e

    def argv(self, paths: dict) -> list[str]:
        try:
            return [part.format(**paths) for part in self.command]
        except (KeyError, IndexError) as e:
            raise CriticConfigError(f"critic {self.name}: unknown placeholder {e}") from e


_KEYS = {"name", "command", "pass_exit_codes", "pass_pattern", "fail_pattern", "counters",
         "timeout", "required"}


def spec_from_table(t: dict) -> CriticSpec:
    unknown = set(t) - _KEYS
    if unknown:
        raise CriticConfigError(f"unknown critic field(s): {', '.join(sorted(unknown))}")
    cmd = t.get("command")
    if isinstance(cmd, str):
        cmd = shlex.split(cmd)
    if not isinstance(cmd, list) or not all(isinstance(x, str) for x in cmd):
        raise CriticConfigError(f"critic {t.get('name')!r}: command must be a string or list")
    return CriticSpec(
        name=str(t.get("name", "")),
        command=tuple(cmd),
        pass_exit_codes=frozenset(t.get("pass_exit_codes", [0])),
        pass_pattern=t.get("pass_pattern"),
        fail_pattern=t.get("fail_pattern"),
        counters=dict(t.get("counters", {})),
        timeout=float(t.get("timeout", 60)),
        required=bool(t.get("required", True)),
    )


def parse_critics(text: str) -> list[CriticSpec]:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise CriticConfigError(f"invalid critics file: {e}") from e
    specs = [spec_from_table(t) for t in data.get("critic", [])]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise CriticConfigError("critic names must be unique")
    return specs


def load_critics(path) -> list[CriticSpec]:
    with open(path, encoding="utf-8") as f:
        return parse_critics(f.read())


def _counts(spec: CriticSpec, output: str) -> dict:
    """A counter takes the number its first group captures; otherwise it counts matches."""
    detail = {}
    for name, pat in spec.counters.items():
        rx = re.compile(pat, re.MULTILINE)
        m = rx.search(output)
        if m is None:
            continue
        if m.groups() and m.group(1) is not None and m.group(1).isdigit():
            detail[name] = int(m.group(1))
        else:
            detail[name] = sum(1 for _ in rx.finditer(output))
    return detail


def run_critic(spec: CriticSpec, paths: dict) -> CriticOutcome:
    started = time.perf_counter()

    def outcome(status, output="", reason="", detail=None):
        return CriticOutcome(spec.name, status, detail or {}, output,
                             time.perf_counter() - started, spec.required, reason)

    argv = spec.argv(paths)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=spec.timeout)
    except FileNotFoundError:
        return outcome("error", reason=f"command not found: {argv[0]}")
    except subprocess.TimeoutExpired:
        return outcome("error", reason=f"timed out after {spec.timeout:g}s")
    except OSError as e:
        return outcome("error", reason=str(e))
    output = proc.stdout + proc.stderr
    ok = proc.returncode in spec.pass_exit_codes
    reason = "" if ok else f"exit code {proc.returncode}"
    if ok and spec.pass_pattern and not re.search(spec.pass_pattern, output, re.MULTILINE):
        ok, reason = False, "pass pattern not found"
    if ok and spec.fail_pattern and re.search(spec.fail_pattern, output, re.MULTILINE):
        ok, reason = False, "fail pattern matched"
    return outcome("pass" if ok else "fail", output, reason, _counts(spec, output))


def run_critics(specs, paths: dict, max_workers: int | None = None) -> list[CriticOutcome]:
    """Run the gate critic, then the rest concurrently; results keep config order."""
    specs = list(specs)
    if not specs:
        return []
    gate = run_critic(specs[0], paths)
    rest = specs[1:]
    if gate.status != "pass":
        return [gate] + [CriticOutcome(s.name, "skipped", required=s.required, reason=GATE_FAILED)
                         for s in rest]
    if not rest:
        return [gate]
    with ThreadPoolExecutor(max_workers=max_workers or len(rest)) as pool:
        outcomes = list(pool.map(lambda s: run_critic(s, paths), rest))
    return [gate] + outcomes
