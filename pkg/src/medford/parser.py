from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .diagnostics import Diagnostic, sort_diagnostics
from .document import Document, assemble
from .lexer import scan
from .macros import collect, expand_statements
from .schema import Registry
from .validator import validate_document


@dataclass
class ParseResult:
    document: Document
    diagnostics: list[Diagnostic]


def parse(text: str, source_name: str = "") -> ParseResult:
    """Scan, expand macros and assemble ``text``; diagnostics are line-sorted."""
    diags: list[Diagnostic] = []
    statements = scan(text, diags)
    table, statements = collect(statements, diags)
    statements = expand_statements(statements, table, diags)
    doc, assembly_diags = assemble(statements, source_name, table)
    diags.extend(assembly_diags)
    return ParseResult(doc, sort_diagnostics(diags))


def source_name_for(path: str | Path) -> str:
    path = Path(path)
    return path.stem if path.suffix == ".mfd" else path.name


def parse_file(path: str | Path) -> ParseResult:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), source_name_for(path))


def check(text: str, source_name: str = "", registry: Registry | None = None) -> ParseResult:
    """Parse and validate; the result holds every diagnostic from both stages."""
    result = parse(text, source_name)
    diags = result.diagnostics + validate_document(result.document, registry)
    return ParseResult(result.document, sort_diagnostics(diags))
