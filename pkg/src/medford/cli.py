"""``medford`` command line: validate, export, bag, verify-bag.

Exit codes: 0 success, 1 diagnostics or bag mismatches, 2 usage or I/O
errors.  Human-readable text goes to stderr; export and JSON diagnostics
go to stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .bag import BagError, NotABag, plan_bag, verify_bag, write_bag
from .diagnostics import report, to_json_lines
from .export import to_canonical_export
from .parser import check, parse, source_name_for
from .schema import Registry, SchemaFormatError, builtin_vocabulary, load_schema

SCHEMA_ENV = "MEDFORD_SCHEMA"

OK, PROBLEMS, FAILURE = 0, 1, 2


class CliError(Exception):
    pass


def _err(text: str) -> None:
    sys.stderr.write(text if text.endswith("\n") else text + "\n")


def _registry(path: str | None) -> Registry:
    path = path or os.environ.get(SCHEMA_ENV) or None
    if path is None:
        return builtin_vocabulary()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read schema {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise CliError(f"schema {path} is not UTF-8") from exc
    try:
        return load_schema(text)
    except SchemaFormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise CliError(f"{path} is not valid UTF-8 (byte {exc.start})") from exc


def _validate_one(path: str, registry: Registry):
    try:
        text = _read(path)
    except CliError as exc:
        return path, None, str(exc)
    return path, check(text, source_name_for(path), registry), None


def cmd_validate(args) -> int:
    registry = _registry(args.schema)
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda p: _validate_one(p, registry), args.files))

    code = OK
    many = len(args.files) > 1
    for path, result, error in results:
        if error is not None:
            _err(error)
            code = FAILURE
            continue
        diags = result.diagnostics
        if args.json_diagnostics:
            sys.stdout.write(to_json_lines(diags))
        text, _ = report(diags)
        if text:
            _err(f"{path}:\n{text}" if many else text)
        if diags and code == OK:
            code = PROBLEMS
    return code


def cmd_export(args) -> int:
    result = parse(_read(args.file), source_name_for(args.file))
    if result.diagnostics:
        _err(report(result.diagnostics)[0])
    out = to_canonical_export(result.document)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(out)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(out)
    return OK


def cmd_bag(args) -> int:
    registry = _registry(args.schema)
    text = _read(args.file)
    result = check(text, source_name_for(args.file), registry)
    if result.diagnostics:
        _err(report(result.diagnostics)[0])
        _err("not compiled: the file must validate before it can be bagged")
        return PROBLEMS
    base = args.base_dir or str(Path(args.file).parent)
    try:
        plan = plan_bag(result.document, base, mfd_text=text)
        out = write_bag(plan, args.out)
    except BagError as exc:
        raise CliError(str(exc)) from exc
    _err(f"wrote bag {out} ({len(plan.payload)} payload files, {len(plan.fetch)} fetch entries)")
    return OK


def cmd_verify_bag(args) -> int:
    try:
        mismatches = verify_bag(args.bag)
    except NotABag as exc:
        raise CliError(f"not a bag: {exc}") from exc
    except OSError as exc:
        raise CliError(str(exc)) from exc
    for m in mismatches:
        _err(str(m))
    if mismatches:
        _err(f"{len(mismatches)} mismatches")
        return PROBLEMS
    _err(f"{args.bag}: ok")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medford", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    schema_help = f"schema overlay file (default: ${SCHEMA_ENV}, then built-in vocabulary)"

    p = sub.add_parser("validate", help="check one or more .mfd files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--schema", help=schema_help)
    p.add_argument("--json-diagnostics", action="store_true",
                   help="also write one JSON object per diagnostic to stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="write the canonical JSON export")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bag", help="validate FILE and compile it into a BagIt bag")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--out", required=True, help="bag directory to create (absent or empty)")
    p.add_argument("--base-dir", help="directory Path values are relative to (default: FILE's directory)")
    p.add_argument("--schema", help=schema_help)
    p.set_defaults(func=cmd_bag)

    p = sub.add_parser("verify-bag", help="re-check a bag's payload against its manifest")
    p.add_argument("bag", metavar="DIR")
    p.set_defaults(func=cmd_verify_bag)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _err(f"medford: {exc}")
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
