"""Command line: ``regulus repl FILE``, ``regulus run SCRIPT``, ``regulus selftest``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .acceptance import run_all
from .parser import ParseError
from .session import Session, SessionError, run_command
from .twolocal import DEFAULT_SEED

__all__ = ["main", "build_parser"]

_ERRORS = (ParseError, SessionError, ValueError, TypeError)


def _error_text(exc: Exception, line: str) -> str:
    if isinstance(exc, ParseError):
        return f"error: {exc}\n{exc.render(line)}"
    return f"error: {exc}"


def _print(report, machine: bool, out) -> None:
    text = report.render(machine)
    if text:
        print(text, file=out)


def cmd_repl(args, out=None, inp=None) -> int:
    out, inp = out or sys.stdout, inp or sys.stdin
    session = Session(base_dir=Path.cwd())
    try:
        _print(run_command(session, f"load-algebra {args.file}"), args.machine, out)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    interactive = inp.isatty()
    while True:
        if interactive:
            print("regulus> ", end="", file=out, flush=True)
        line = inp.readline()
        if not line:
            break
        line = line.rstrip("\n")
        if line.strip() in ("quit", "exit"):
            break
        try:
            report = run_command(session, line)
        except _ERRORS as exc:
            print(_error_text(exc, line), file=out)
            continue
        if report is not None:
            _print(report, args.machine, out)
    return 0


def cmd_run(args, out=None) -> int:
    out = out or sys.stdout
    path = Path(args.script)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return 2
    session = Session(base_dir=path.parent)
    status = 0
    for number, line in enumerate(lines, 1):
        try:
            report = run_command(session, line)
        except _ERRORS as exc:
            print(f"{path}:{number}: {_error_text(exc, line)}", file=sys.stderr)
            return 1
        if report is None:
            continue
        if not args.machine:
            print(f"> {line.strip()}", file=out)
        _print(report, args.machine, out)
        if not report.ok:
            status = 1
    return status


def cmd_selftest(args, out=None) -> int:
    out = out or sys.stdout
    results = run_all(args.seed)
    for r in results:
        print(r.machine() if args.machine else r.line(), file=out)
    passed = sum(r.ok for r in results)
    if not args.machine:
        print(f"{passed}/{len(results)} criteria passed", file=out)
    return 0 if passed == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regulus", description="Exact derivations and 2-local derivations on regular algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    repl = sub.add_parser("repl", help="interactive session over an algebra file")
    repl.add_argument("file", help="algebra description: 'atoms K', K weights, 'vars v1 v2 ...'")
    repl.add_argument("--machine", action="store_true", help="tab-separated records instead of text")
    repl.set_defaults(handler=cmd_repl)

    run = sub.add_parser("run", help="execute a script of session lines")
    run.add_argument("script")
    run.add_argument("--machine", action="store_true", help="tab-separated records instead of text")
    run.set_defaults(handler=cmd_run)

    selftest = sub.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument("--seed", type=int, default=DEFAULT_SEED)
    selftest.add_argument("--machine", action="store_true", help="tab-separated records instead of text")
    selftest.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
