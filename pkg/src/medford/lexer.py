"""Split MEDFORD source text into logical statements.

Only three tokens are reserved: ``@`` in column 1 opens a tag, ``#`` starts
a comment and ``$$`` delimits a math span in which ``#`` is literal.  Lines
that do not start a statement continue the one before them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .diagnostics import Category, Diagnostic, TagPath

MATH = "$$"
COMMENT = "#"
TAG = "@"
MACRO = "`@"

_WS = re.compile(r"\s")


class StatementKind(Enum):
    TAG = "tag"
    MACRO_DEFINITION = "macro"


@dataclass(frozen=True, slots=True)
class RawLine:
    text: str
    line_no: int


@dataclass(frozen=True, slots=True)
class Statement:
    kind: StatementKind
    head_token: str
    body: str
    start_line: int
    end_line: int

    @property
    def path(self) -> TagPath:
        if self.kind is StatementKind.MACRO_DEFINITION:
            return TagPath("macro", self.head_token)
        return loose_path(self.head_token)


class UnterminatedMathSpan(ValueError):
    """A line holds an odd number of ``$$`` markers."""

    def __init__(self, stripped: str):
        super().__init__("math span opened with $$ is not closed on the same line")
        self.stripped = stripped


def loose_path(token: str) -> TagPath:
    """Best-effort TagPath for labelling diagnostics; never fails."""
    major, sep, minor = token.partition("-")
    return TagPath(major, minor if sep else None)


def _strip(line: str) -> tuple[str, bool]:
    in_math = False
    i = 0
    n = len(line)
    while i < n:
        if line.startswith(MATH, i):
            in_math = not in_math
            i += 2
            continue
        if line[i] == COMMENT and not in_math:
            line = line[:i]
            break
        i += 1
    return line.rstrip(), in_math


def strip_comment(line: str) -> str:
    """Drop the comment from one physical line and trim trailing whitespace.

    >>> strip_comment("@Software R # my tool")
    '@Software R'
    >>> strip_comment("@Note x $$a # b$$ tail # gone")
    '@Note x $$a # b$$ tail'

    Raises UnterminatedMathSpan if a ``$$`` is left open; the exception
    carries the stripped text so callers can keep going.
    """
    stripped, open_math = _strip(line)
    if open_math:
        raise UnterminatedMathSpan(stripped)
    return stripped


def raw_lines(file_text: str) -> list[RawLine]:
    if file_text.startswith("\ufeff"):
        file_text = file_text[1:]
    lines = file_text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [RawLine(t.rstrip("\r"), i) for i, t in enumerate(lines, start=1)]


def _head(text: str) -> tuple[str, str]:
    m = _WS.search(text)
    if m is None:
        return text, ""
    return text[: m.start()], text[m.start():].strip()


def scan(file_text: str, diagnostics: list[Diagnostic] | None = None) -> list[Statement]:
    """Return the statements of ``file_text`` in file order.

    Problems are appended to ``diagnostics`` when given; scanning always
    continues past them.
    """
    sink = diagnostics if diagnostics is not None else []
    statements: list[Statement] = []
    # the open statement is kept mutable until the next one starts
    kind = token = None
    parts: list[str] = []
    start = end = 0

    def close():
        if kind is not None:
            statements.append(Statement(kind, token, " ".join(parts), start, end))

    for raw in raw_lines(file_text):
        try:
            text = strip_comment(raw.text)
        except UnterminatedMathSpan as exc:
            text = exc.stripped
            if raw.text.startswith(TAG):
                where = loose_path(_head(raw.text[1:])[0])
            elif raw.text.startswith(MACRO):
                where = TagPath("macro", _head(raw.text[2:])[0])
            else:
                where = loose_path(token) if kind is StatementKind.TAG else (
                    TagPath("macro", token) if kind is not None else None)
            sink.append(Diagnostic(raw.line_no, where, Category.SYNTAX, str(exc)))
        if not text.strip():
            continue

        if text.startswith(MACRO):
            close()
            kind = StatementKind.MACRO_DEFINITION
            token, body = _head(text[2:])
        elif text.startswith(TAG):
            close()
            kind = StatementKind.TAG
            token, body = _head(text[1:])
        elif kind is None:
            sink.append(Diagnostic(
                raw.line_no, None, Category.SYNTAX,
                "text appears before the first @ tag",
            ))
            continue
        else:
            parts.append(text.strip())
            end = raw.line_no
            continue
        parts = [body] if body else []
        start = end = raw.line_no

    close()
    return statements
