"""Command line interface.

One subcommand, ``detect``, runs the full pipeline over a log file and
prints alerts. Every flag can also be supplied through an environment
variable named ``STRATALOG_<FLAG>`` (dashes as underscores, e.g.
``STRATALOG_FACTS_OUT``); an explicit flag always wins over the
environment.

Exit codes: 0 for a clean run (with or without alerts), 1 for any error
(usage, unreadable input, bad rules, evaluation failure), 2 when the rule
program is inconsistent over the extracted facts (a constraint fired).
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Mapping, Optional, Sequence

from .engine import Inconsistent
from .ingest import DEFAULT_BASE_YEAR
from .report import (
    RunConfig,
    StageError,
    detect,
    group_alerts,
    load_entries,
    render_alerts,
    render_grouped,
    render_inconsistent,
)

ENV_PREFIX = "STRATALOG_"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONSISTENT = 2

_TRUTHY = {"1", "true", "yes", "on"}


class _Parser(argparse.ArgumentParser):
    # usage problems share exit code 1 with runtime errors; 2 is reserved
    # for the inconsistent-program result
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser(env: Mapping[str, str]) -> argparse.ArgumentParser:
    def setting(name: str) -> Optional[str]:
        return env.get(ENV_PREFIX + name)

    parser = _Parser(
        prog="stratalog",
        description="Detect anomalies in system logs with explainable logic rules.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "detect", help="run detection over a log file",
        description="Parse a log file, extract facts, evaluate the detection "
                    "rules, and print alerts with derivations.")
    p.add_argument("input", help="path to the log file")
    p.add_argument("--format", choices=("csv", "syslog"),
                   default=setting("FORMAT") or "csv",
                   help="input format: structured CSV export or raw syslog lines")
    p.add_argument("--year", type=int,
                   default=setting("YEAR") or DEFAULT_BASE_YEAR,
                   help="base year for timestamps (log lines carry none); "
                        f"default {DEFAULT_BASE_YEAR}")
    p.add_argument("--rules", metavar="PATH", default=setting("RULES"),
                   help="rule file to run instead of the bundled program")
    p.add_argument("--extra-facts", metavar="PATH", default=setting("EXTRA_FACTS"),
                   help="supplemental facts file (e.g. dormant_account facts)")
    p.add_argument("--set", dest="overrides", action="append", metavar="NAME=VALUE",
                   default=None,
                   help="override a #const threshold; repeatable")
    p.add_argument("--facts-out", metavar="PATH", default=setting("FACTS_OUT"),
                   help="also write the extracted facts to this file")
    p.add_argument("--emit-rules", metavar="PATH", default=setting("EMIT_RULES"),
                   help="also write the effective rule program to this file")
    p.add_argument("--output", choices=("text", "json"),
                   default=setting("OUTPUT") or "text",
                   help="report format: readable text or json-lines")
    group_default = (setting("GROUP") or "").strip().lower() in _TRUTHY
    p.add_argument("--group", action="store_true", default=group_default,
                   help="collapse alerts sharing kind and entities into summaries")
    return parser


def _parse_overrides(pairs: Sequence[str], parser: argparse.ArgumentParser) -> dict[str, int]:
    overrides: dict[str, int] = {}
    for pair in pairs:
        name, sep, raw = pair.partition("=")
        name = name.strip()
        if not sep or not name:
            parser.error(f"--set expects NAME=VALUE, got {pair!r}")
        try:
            overrides[name] = int(raw.strip())
        except ValueError:
            parser.error(f"--set {name}: value must be an integer, got {raw.strip()!r}")
    return overrides


def main(argv: Optional[Sequence[str]] = None,
         env: Optional[Mapping[str, str]] = None) -> int:
    environment = os.environ if env is None else env
    parser = build_parser(environment)
    args = parser.parse_args(argv)

    raw_pairs = args.overrides
    if raw_pairs is None:
        env_pairs = (environment.get(ENV_PREFIX + "SET") or "").strip()
        raw_pairs = [p for p in env_pairs.split(",") if p.strip()] if env_pairs else []
    overrides = _parse_overrides(raw_pairs, parser)

    try:
        year = int(args.year)
    except (TypeError, ValueError):
        parser.error(f"--year must be an integer, got {args.year!r}")

    try:
        config = RunConfig(
            input_path=args.input,
            input_format=args.format,
            base_year=year,
            overrides=overrides,
            rules_path=args.rules,
            extra_facts_path=args.extra_facts,
            facts_out=args.facts_out,
            emit_rules=args.emit_rules,
            output=args.output,
            group=args.group,
        )
    except ValueError as exc:
        parser.error(str(exc))

    try:
        entries, ingest_result = load_entries(config)
        result = detect(entries, config)
    except StageError as exc:
        print(f"error in {exc.stage} stage: {exc.message}", file=sys.stderr)
        return EXIT_ERROR

    if ingest_result.skipped:
        print(f"note: skipped {ingest_result.skipped} unparseable line(s)",
              file=sys.stderr)

    if isinstance(result, Inconsistent):
        sys.stdout.write(render_inconsistent(result, config.output))
        return EXIT_INCONSISTENT

    if config.group:
        sys.stdout.write(render_grouped(group_alerts(result), config.output))
    else:
        sys.stdout.write(render_alerts(result, config.output))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
