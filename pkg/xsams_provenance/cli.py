#!/usr/bin/env python
"""
Command-line interface for xsams-provenance.

Provides commands for:
- Validating documents against the provenance rules
- Extracting BibTeX from document sources
- Merging spectroscopic and collisional documents
- Querying a simulated node
- Operating the Query Store
"""

import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence

from .bibtex import doc_to_bibtex
from .errors import MissingRequiredField, UnknownOriginKind, XmlSyntax, XsamsError
from .model import parse_timestamp

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE_FAILURE = 2
EXIT_USAGE = 64
EXIT_NO_INPUT = 66

PARSE_FAILURES = (XmlSyntax, MissingRequiredField, UnknownOriginKind)

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: error: {message}")


def timestamp(text: str) -> datetime:
    try:
        return parse_timestamp(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _clock(args) -> datetime:
    return args.now or datetime.now().astimezone()


def _load(path: str, recover: bool = False):
    from .xml_io import load

    doc, diagnostics = load(path, recover=recover)
    for (line, column), message in diagnostics.warnings:
        logger.warning(f"{path}:{line}:{column}: {message}")
    return doc


def _emit(content: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(content, encoding="utf-8")
    else:
        sys.stdout.write(content)


def _match_keys(values: List[str]) -> List[str]:
    return [key.strip() for value in values for key in value.split(",") if key.strip()]


def cmd_validate(args) -> int:
    """Validate a document; 0 valid, 1 errors present, 2 parse failure."""
    from .validator import explain, validate

    try:
        doc = _load(args.file, recover=args.recover)
    except PARSE_FAILURES as e:
        print(f"{args.file}: {e}", file=sys.stderr)
        return EXIT_PARSE_FAILURE
    report = validate(doc)
    print(explain(report))
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_bibtex(args) -> int:
    doc = _load(args.file, recover=args.recover)
    _emit(doc_to_bibtex(doc, include_self=not args.no_self), args.out)
    return EXIT_OK


def cmd_merge(args) -> int:
    from .merge import MatchSpec, ToolConfig, merge
    from .xml_io import serialize

    match_keys = _match_keys(args.match_on)
    if not match_keys:
        raise UsageError("merge: --match-on needs at least one quantum number")
    merged = merge(
        _load(args.spectroscopic),
        _load(args.collisional),
        MatchSpec(match_keys=tuple(match_keys)),
        ToolConfig(name=args.tool_name, homepage_url=args.tool_homepage, comment=args.comment),
        _clock(args),
    )
    _emit(serialize(merged).decode("utf-8"), args.out)
    return EXIT_OK


def cmd_query(args) -> int:
    from .node import LocalNode
    from .xml_io import serialize

    node = LocalNode.from_files(args.node, args.holdings)
    doc = node.execute(args.query, _clock(args))
    _emit(serialize(doc).decode("utf-8"), args.out)
    return EXIT_OK


def _store_config(args):
    from .config import load_config

    config = load_config()
    updates = {}
    if args.journal:
        updates["journal_path"] = Path(args.journal)
    if getattr(args, "node", None):
        updates["node_config_path"] = Path(args.node)
        updates["node_holdings_path"] = Path(args.holdings)
    return config.model_copy(update=updates)


def _store(args):
    from . import store_manager

    store_manager.configure(_store_config(args))
    return store_manager.get_store()


def cmd_store_serve(args) -> int:
    from .server import run_server

    config = _store_config(args)
    updates = {k: v for k, v in (("host", args.host), ("port", args.port), ("transport", args.transport)) if v}
    run_server(config.model_copy(update=updates))
    return EXIT_OK


def cmd_store_register(args) -> int:
    from .xml_io import parse

    raw = Path(args.file).read_bytes()
    doc, _ = parse(raw, recover=args.recover)
    record = _store(args).register(doc, raw=raw)
    print(json.dumps(record.model_dump(mode="json"), indent=2))
    return EXIT_OK


def cmd_store_resolve(args) -> int:
    store = _store(args)
    if args.format == "html":
        _emit(store.landing_page(args.identifier), args.out)
    elif args.format == "xsams":
        _emit(store.document_bytes(args.identifier).decode("utf-8"), args.out)
    else:
        _emit(json.dumps(store.landing_record(args.identifier), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_store_reexecute(args) -> int:
    from .xml_io import serialize

    fresh, match = _store(args).reexecute(args.identifier, now=_clock(args))
    _emit(serialize(fresh).decode("utf-8"), args.out)
    print(f"digest match: {'yes' if match else 'no'}", file=sys.stderr)
    return EXIT_OK if match else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="xsams-provenance",
        description="Provenance toolkit for XSAMS documents",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s validate basecol.xml
  %(prog)s bibtex merged.xml --no-self
  %(prog)s merge --spectroscopic cdms.xml --collisional basecol.xml --match-on J --out merged.xml
  %(prog)s query --node cdms.json --holdings cdms.xml --query "select * where ((MoleculeStoichiometricFormula = 'CO'))"
  %(prog)s store register basecol.xml
        """,
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING)",
    )
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    validate_parser = subparsers.add_parser("validate", help="Validate a document")
    validate_parser.add_argument("file")
    validate_parser.add_argument("--recover", action="store_true", help="Recover from malformed XML")

    bibtex_parser = subparsers.add_parser("bibtex", help="Print document sources as BibTeX")
    bibtex_parser.add_argument("file")
    bibtex_parser.add_argument("--no-self", action="store_true", help="Omit node self-references")
    bibtex_parser.add_argument("--recover", action="store_true", help="Recover from malformed XML")
    bibtex_parser.add_argument("--out", help="Output file (default: stdout)")

    merge_parser = subparsers.add_parser("merge", help="Merge spectroscopic and collisional documents")
    merge_parser.add_argument("--spectroscopic", required=True)
    merge_parser.add_argument("--collisional", required=True)
    merge_parser.add_argument(
        "--match-on", action="append", required=True, help="Quantum numbers to match (repeatable or comma separated)"
    )
    merge_parser.add_argument("--tool-name", default="SpectCol")
    merge_parser.add_argument(
        "--tool-homepage", default="http://www.vamdc.org/activities/research/software/spectcol/"
    )
    merge_parser.add_argument("--comment")
    merge_parser.add_argument("--now", type=timestamp, help="Fixed extraction timestamp")
    merge_parser.add_argument("--out", help="Output file (default: stdout)")

    query_parser = subparsers.add_parser("query", help="Query a simulated node")
    query_parser.add_argument("--node", required=True, help="Node configuration (JSON)")
    query_parser.add_argument("--holdings", required=True, help="Node holdings (XSAMS)")
    query_parser.add_argument("--query", required=True)
    query_parser.add_argument("--now", type=timestamp, help="Fixed extraction timestamp")
    query_parser.add_argument("--out", help="Output file (default: stdout)")

    store_parser = subparsers.add_parser("store", help="Query Store operations")
    store_parser.add_argument("--journal", help="Journal file (default: QS_JOURNAL_PATH)")
    store_commands = store_parser.add_subparsers(dest="store_command", help="Store commands")

    serve_parser = store_commands.add_parser("serve", help="Run the Query Store service")
    serve_parser.add_argument("--host")
    serve_parser.add_argument("--port", type=int)
    serve_parser.add_argument("--transport", choices=["http", "stdio"])
    serve_parser.add_argument("--node", help="Node configuration served at /tap/sync")
    serve_parser.add_argument("--holdings", help="Holdings of the served node")

    register_parser = store_commands.add_parser("register", help="Register an extraction")
    register_parser.add_argument("file")
    register_parser.add_argument("--recover", action="store_true")

    resolve_parser = store_commands.add_parser("resolve", help="Resolve an identifier")
    resolve_parser.add_argument("identifier")
    resolve_parser.add_argument("--format", choices=["json", "html", "xsams"], default="json")
    resolve_parser.add_argument("--out", help="Output file (default: stdout)")

    reexecute_parser = store_commands.add_parser("reexecute", help="Re-execute an extraction")
    reexecute_parser.add_argument("identifier")
    reexecute_parser.add_argument("--node", help="Node configuration to re-execute against")
    reexecute_parser.add_argument("--holdings", help="Holdings of that node")
    reexecute_parser.add_argument("--now", type=timestamp, help="Fixed extraction timestamp")
    reexecute_parser.add_argument("--out", help="Output file (default: stdout)")

    return parser


COMMANDS = {
    "validate": cmd_validate,
    "bibtex": cmd_bibtex,
    "merge": cmd_merge,
    "query": cmd_query,
}

STORE_COMMANDS = {
    "serve": cmd_store_serve,
    "register": cmd_store_register,
    "resolve": cmd_store_resolve,
    "reexecute": cmd_store_reexecute,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
        if args.command == "store":
            if not args.store_command:
                raise UsageError("store: a subcommand is required (serve, register, resolve, reexecute)")
            if bool(getattr(args, "node", None)) != bool(getattr(args, "holdings", None)):
                raise UsageError("--node and --holdings must be given together")
            handler = STORE_COMMANDS[args.store_command]
        else:
            handler = COMMANDS[args.command]
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=args.log_level.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    try:
        return handler(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NO_INPUT
    except XsamsError as e:
        print(f"Error: {e.code}: {e}", file=sys.stderr)
        return EXIT_INVALID


def main():
    """Main CLI entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
