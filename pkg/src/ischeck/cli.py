"""Command-line entry point: check one .h/.c module against its .is contract."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from .cfront.lexer import FrontendError
from .contract import ContractSyntaxError, load_contract, validate_contract
from .critics import CriticConfigError, load_critics, run_critics
from .diagnostics import ALL_TASKS, CONTRACT_TASKS, task_sort_key
from .report import Report, aggregate, render
from .rules import RuleConfig, run_tasks

EXIT_CODES = {"verified": 0, "not-verified": 1, "error": 2}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    header_path: str
    source_path: str
    contract_path: str | None = None
    include_dirs: list = field(default_factory=list)
    defines: dict = field(default_factory=dict)
    tasks: tuple = ALL_TASKS
    format: str = "text"
    strict_advisory: bool = False
    critics_config_path: str | None = None
    null_macros: tuple = ()
    typedef_allowlist: tuple = ()
    allow_unresolved_includes: bool = False
    canonical: bool = False

    def validate(self):
        unknown = set(self.tasks) - set(ALL_TASKS)
        if unknown:
            raise UsageError(f"unknown task(s): {', '.join(sorted(unknown))}")
        if not self.tasks:
            raise UsageError("no tasks selected")
        needed = [("header", self.header_path), ("source", self.source_path)]
        if self.contract_path is not None:
            needed.append(("contract", self.contract_path))
        if self.critics_config_path is not None:
            needed.append(("critics config", self.critics_config_path))
        for what, path in needed:
            if not path:
                raise UsageError(f"missing {what} path")
            if not os.path.isfile(path):
                raise UsageError(f"{what} file not found: {path}")


def parse_define(text: str) -> tuple[str, str]:
    name, _, value = text.partition("=")
    if not name.isidentifier():
        raise UsageError(f"bad -D argument: {text!r}")
    return name, value if "=" in text else "1"


def run_check(cfg: RunConfig) -> tuple[Report, int]:
    """Parse inputs, run tasks and critics, aggregate. Raises UsageError on bad input."""
    cfg.validate()
    contract = None
    if cfg.contract_path is not None:
        try:
            contract = load_contract(cfg.contract_path)
        except ContractSyntaxError as e:
            raise UsageError(f"{e.loc}: {e}") from e
        problems = validate_contract(contract)
        if problems:
            raise UsageError("invalid contract:\n" + "\n".join(str(d) for d in problems))
    critic_specs = []
    if cfg.critics_config_path:
        try:
            critic_specs = load_critics(cfg.critics_config_path)
        except CriticConfigError as e:
            raise UsageError(str(e)) from e
    try:
        module = _parse(cfg)
    except FrontendError as e:
        raise UsageError(str(e)) from e
    rcfg = RuleConfig(frozenset(cfg.null_macros), frozenset(cfg.typedef_allowlist),
                      cfg.strict_advisory)
    results = run_tasks(module, contract, cfg.tasks, rcfg)
    paths = {"source": cfg.source_path, "header": cfg.header_path,
             "contract": cfg.contract_path or ""}
    critics = run_critics(critic_specs, paths)
    report = aggregate(results, critics, module_name=module.name,
                       contract_path=cfg.contract_path)
    return report, EXIT_CODES[report.verdict]


def _parse(cfg: RunConfig):
    from .cfront.model import parse_module
    return parse_module(cfg.header_path, cfg.source_path, cfg.include_dirs, cfg.defines,
                        allow_unresolved=cfg.allow_unresolved_includes)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ischeck",
        description="Check a C module (.h/.c pair) against its interface contract (.is).")
    p.add_argument("--contract", metavar="PATH", help=".is contract; tasks "
                   + ", ".join(sorted(CONTRACT_TASKS, key=task_sort_key)) + " are skipped without it")
    p.add_argument("--header", metavar="PATH", required=True, help="module .h file")
    p.add_argument("--source", metavar="PATH", required=True, help="module .c file")
    p.add_argument("--task", action="append", default=[], metavar="Tn",
                   help="run only this task (repeatable)")
    p.add_argument("--all", action="store_true", help="run every task (the default)")
    p.add_argument("-I", dest="include_dirs", action="append", default=[], metavar="DIR")
    p.add_argument("-D", dest="defines", action="append", default=[], metavar="SYM[=VAL]")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--strict-advisory", action="store_true",
                   help="typedef-usage (DFR6) findings count as violations")
    p.add_argument("--critics", metavar="FILE", help="TOML file listing external critics")
    p.add_argument("--canonical", action="store_true",
                   help="omit timestamp and durations so identical runs render identically")
    p.add_argument("--null-macro", action="append", default=[], metavar="NAME",
                   help="macro accepted as a null pointer constant (repeatable)")
    p.add_argument("--typedef-allow", action="append", default=[], metavar="TYPE",
                   help="raw type exempt from the typedef check (repeatable)")
    p.add_argument("--allow-unresolved-includes", action="store_true",
                   help="skip #include files that cannot be found instead of failing")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def config_from_args(args) -> RunConfig:
    tasks = ALL_TASKS if args.all or not args.task else tuple(t.upper() for t in args.task)
    return RunConfig(
        header_path=args.header, source_path=args.source, contract_path=args.contract,
        include_dirs=args.include_dirs, defines=dict(parse_define(d) for d in args.defines),
        tasks=tasks, format=args.format, strict_advisory=args.strict_advisory,
        critics_config_path=args.critics, null_macros=tuple(args.null_macro),
        typedef_allowlist=tuple(args.typedef_allow),
        allow_unresolved_includes=args.allow_unresolved_includes, canonical=args.canonical)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_CODES["error"]
    try:
        cfg = config_from_args(args)
        report, status = run_check(cfg)
    except (UsageError, OSError) as e:
        print(f"ischeck: error: {e}", file=sys.stderr)
        return EXIT_CODES["error"]
    sys.stdout.buffer.write(render(report, cfg.format, canonical=cfg.canonical))
    sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
