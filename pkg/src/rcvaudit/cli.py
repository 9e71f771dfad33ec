"""``rcvaudit audit <file|dir>``: batch auditing from the shell.

Exit codes: 0 no flaw found, 1 at least one flaw flagged, 2 bad usage or
config, 3 parse error, 4 I/O error.  For a directory, any skipped file makes
the exit code 3 or 4 (4 wins when both kinds occur).

``RCVAUDIT_OUTPUT_DIR`` sets where reports go when neither ``--json`` nor
``--summary`` is given.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .ingest import CVRParseError
from .report import (
    DEFAULT_CONFIG,
    AuditReport,
    ConfigError,
    audit_corpus,
    audit_file,
    load_config,
    with_budget,
)

EXIT_CLEAN = 0
EXIT_FLAWS = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_IO = 4

OUTPUT_DIR_ENV = "RCVAUDIT_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcvaudit", description="Audit ranked-choice elections for voting-theory flaws.")
    sub = parser.add_subparsers(dest="command", required=True)
    audit = sub.add_parser("audit", help="audit one canonical CSV file or a directory of them")
    audit.add_argument("target", type=Path, help="CSV file or directory of CSV files")
    audit.add_argument("--policy", type=Path, help="key=value config file")
    audit.add_argument("--budget", type=int, help="re-tabulations per detector target")
    audit.add_argument("--strict-compromise", action="store_true", help="shift every eligible ballot")
    audit.add_argument("--no-writein-elim", action="store_true", help="keep write-in candidates")
    audit.add_argument("--json", type=Path, help="write the JSON report(s) here")
    audit.add_argument("--summary", type=Path, help="write the corpus summary CSV here")
    return parser


def _line(report: AuditReport) -> str:
    failed = ",".join(k.value for k in report.failed) or "none"
    share = report.share_display or "na"
    return f"{report.election_id}: winner={report.winner} share={share} flaws={failed}"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    try:
        config = load_config(args.policy) if args.policy else DEFAULT_CONFIG
        if args.budget is not None:
            config = with_budget(config, args.budget)
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=err)
        return EXIT_IO
    if args.strict_compromise:
        config = replace(config, strict_compromise=True)
    if args.no_writein_elim:
        config = replace(config, sanitation=replace(config.sanitation, write_in_rule="keep"))

    default_dir = os.environ.get(OUTPUT_DIR_ENV)
    use_default = default_dir and args.json is None and args.summary is None
    target: Path = args.target

    try:
        if target.is_dir():
            summary = audit_corpus(target, config)
            for report in summary.reports:
                print(_line(report))
            for e in summary.errors:
                print(f"skipped {e.message}", file=err)
            json_out = args.json or (Path(default_dir) / "reports.json" if use_default else None)
            csv_out = args.summary or (Path(default_dir) / "summary.csv" if use_default else None)
            if json_out:
                _write(json_out, summary.to_json())
            if csv_out:
                _write(csv_out, summary.to_csv())
            if any(e.kind == "io" for e in summary.errors):
                return EXIT_IO
            if summary.errors:
                return EXIT_PARSE
            return EXIT_FLAWS if any(r.failed for r in summary.reports) else EXIT_CLEAN

        report = audit_file(target, config)
        print(_line(report))
        json_out = args.json or (Path(default_dir) / f"{report.election_id}.json" if use_default else None)
        if json_out:
            _write(json_out, report.to_json())
        if args.summary:
            print("warning: --summary applies to directories only", file=err)
        return EXIT_FLAWS if report.failed else EXIT_CLEAN
    except CVRParseError as exc:
        print(f"parse error: {exc}", file=err)
        return EXIT_PARSE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
