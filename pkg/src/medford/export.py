"""Canonical JSON export of a Document.

The export is byte-deterministic: fixed key order, two-space indent,
non-ASCII text kept as-is, trailing newline.
"""

from __future__ import annotations

import json

from .document import Attribute, Block, Document
from .macros import MacroDef, MacroTable

FORMAT = "medford-export"
VERSION = 1


class ExportFormatError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def to_canonical_export(doc: Document) -> str:
    obj = {
        "format": FORMAT,
        "version": VERSION,
        "source": doc.source_name,
        "macros": [
            {"name": name, "body": m.body, "line": m.defined_at}
            for name, m in doc.macro_table.entries.items()
        ],
        "blocks": [
            {
                "major": b.major,
                "desc": b.desc,
                "line": b.head_line,
                "attributes": [[a.minor, a.value, a.line] for a in b.attributes],
            }
            for b in doc.blocks
        ],
    }
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def _expect(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise ExportFormatError(where, message)


def _keys(obj, keys: tuple[str, ...], where: str) -> None:
    _expect(isinstance(obj, dict), where, "expected an object")
    for k in keys:
        _expect(k in obj, where, f"missing key {k!r}")


def _str(obj: dict, key: str, where: str) -> str:
    _expect(isinstance(obj[key], str), f"{where}.{key}", "expected a string")
    return obj[key]


def _int(value, where: str) -> int:
    _expect(isinstance(value, int) and not isinstance(value, bool), where, "expected an integer")
    return value


def from_canonical_export(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExportFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None

    _keys(obj, ("format", "version", "source", "macros", "blocks"), "export")
    _expect(obj["format"] == FORMAT, "export.format", f"expected {FORMAT!r}")
    _expect(obj["version"] == VERSION, "export.version", f"unsupported version {obj['version']!r}")
    _expect(isinstance(obj["macros"], list), "export.macros", "expected a list")
    _expect(isinstance(obj["blocks"], list), "export.blocks", "expected a list")

    table = MacroTable()
    for i, m in enumerate(obj["macros"]):
        where = f"macros[{i}]"
        _keys(m, ("name", "body", "line"), where)
        table.entries[_str(m, "name", where)] = MacroDef(
            _str(m, "body", where), _int(m["line"], f"{where}.line"))

    blocks = []
    for i, b in enumerate(obj["blocks"]):
        where = f"blocks[{i}]"
        _keys(b, ("major", "desc", "line", "attributes"), where)
        _expect(isinstance(b["attributes"], list), f"{where}.attributes", "expected a list")
        attrs = []
        for j, a in enumerate(b["attributes"]):
            aw = f"{where}.attributes[{j}]"
            _expect(isinstance(a, list) and len(a) == 3, aw, "expected [minor, value, line]")
            _expect(isinstance(a[0], str) and isinstance(a[1], str), aw, "minor and value must be strings")
            attrs.append(Attribute(a[0], a[1], _int(a[2], aw)))
        blocks.append(Block(_str(b, "major", where), _str(b, "desc", where),
                            _int(b["line"], f"{where}.line"), attrs))

    _expect(isinstance(obj["source"], str), "export.source", "expected a string")
    return Document(obj["source"], blocks, table)
