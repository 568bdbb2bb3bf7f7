"""MEDFORD metadata files: parse, validate, export and compile to BagIt."""

from .diagnostics import Category, Diagnostic, TagPath, render, report
from .document import Attribute, Block, Document, serialize, split_tag_token
from .parser import ParseResult, check, parse, parse_file
from .schema import Registry, builtin_vocabulary, load_schema
from .validator import validate_document

__version__ = "0.1.0"

__all__ = [
    "Attribute", "Block", "Category", "Diagnostic", "Document", "ParseResult",
    "Registry", "TagPath", "builtin_vocabulary", "check", "load_schema", "parse",
    "parse_file", "render", "report", "serialize", "split_tag_token",
    "validate_document",
]
