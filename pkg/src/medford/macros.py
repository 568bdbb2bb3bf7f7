"""Backtick macros: ```@name body`` defines, ```@name`` anywhere in a body uses."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagnostics import Category, Diagnostic
from .lexer import Statement, StatementKind

NAME = re.compile(r"[A-Za-z0-9_]+")
INVOCATION = re.compile(r"`@([A-Za-z0-9_]+)")


@dataclass(frozen=True, slots=True)
class MacroDef:
    body: str
    defined_at: int


@dataclass
class MacroTable:
    entries: dict[str, MacroDef] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __getitem__(self, name: str) -> MacroDef:
        return self.entries[name]

    @classmethod
    def from_bodies(cls, bodies: dict[str, str]) -> "MacroTable":
        return cls({name: MacroDef(body, 0) for name, body in bodies.items()})


class MacroError(ValueError):
    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class UndefinedMacro(MacroError):
    pass


class MacroCycle(MacroError):
    pass


def collect(statements: list[Statement], diagnostics: list[Diagnostic] | None = None
            ) -> tuple[MacroTable, list[Statement]]:
    """Move macro definitions out of ``statements`` into a table.

    The first definition of a name wins; later ones are reported.
    """
    sink = diagnostics if diagnostics is not None else []
    table = MacroTable()
    rest = []
    for st in statements:
        if st.kind is not StatementKind.MACRO_DEFINITION:
            rest.append(st)
            continue
        if not NAME.fullmatch(st.head_token):
            sink.append(Diagnostic(
                st.start_line, st.path, Category.SYNTAX,
                "a macro name must be one word of letters, digits or underscores",
            ))
            continue
        if st.head_token in table:
            first = table[st.head_token].defined_at
            sink.append(Diagnostic(
                st.start_line, st.path, Category.SYNTAX,
                f"multiple uses of the same macro name (first defined on line {first})",
            ))
            continue
        table.entries[st.head_token] = MacroDef(st.body, st.start_line)
    return table, rest


def find_cycle(names: list[str], table: MacroTable) -> str | None:
    """First macro found to reach itself, searching from ``names``."""
    acyclic: set[str] = set()

    def visit(name: str, path: list[str]) -> str | None:
        if name in path:
            return name
        if name not in table or name in acyclic:
            return None
        path.append(name)
        for ref in INVOCATION.findall(table[name].body):
            hit = visit(ref, path)
            if hit is not None:
                return hit
        path.pop()
        acyclic.add(name)
        return None

    for name in names:
        hit = visit(name, [])
        if hit is not None:
            return hit
    return None


def expand(body: str, table: MacroTable) -> str:
    """Substitute every macro use in ``body``, re-scanning until none remain.

    Raises UndefinedMacro for an unknown name and MacroCycle when the text
    still holds uses after ``len(table) + 1`` passes.
    """
    def lookup(m: re.Match) -> str:
        name = m.group(1)
        if name not in table:
            raise UndefinedMacro(name, f"undefined macro `@{name}")
        return table[name].body

    def cycle(entry: str) -> MacroCycle:
        return MacroCycle(entry, f"macro `@{entry} expands into itself")

    pending = INVOCATION.findall(body)
    # refuse cycles up front so a self-doubling body never gets expanded
    entry = find_cycle(pending, table)
    if entry is not None:
        raise cycle(entry)
    passes = 0
    while pending:
        if passes > len(table):
            raise cycle(find_cycle(pending, table) or pending[0])
        body = INVOCATION.sub(lookup, body)
        passes += 1
        pending = INVOCATION.findall(body)
    return body


def expand_statements(statements: list[Statement], table: MacroTable,
                      diagnostics: list[Diagnostic] | None = None) -> list[Statement]:
    """Expand macros in every tag statement body.

    A statement whose expansion fails keeps its original body and the
    failure is reported against its first line.
    """
    sink = diagnostics if diagnostics is not None else []
    out = []
    for st in statements:
        if "`@" not in st.body:
            out.append(st)
            continue
        try:
            body = expand(st.body, table)
        except MacroError as exc:
            sink.append(Diagnostic(st.start_line, st.path, Category.SYNTAX, str(exc)))
            out.append(st)
            continue
        out.append(Statement(st.kind, st.head_token, body, st.start_line, st.end_line))
    return out

