"""Diagnostic records and their human-legible rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Category(Enum):
    SYNTAX = "syntax"
    VALIDATION = "validation"
    MISSING_DATA = "missing data"


_VERBS = {
    Category.SYNTAX: "is invalid",
    Category.VALIDATION: "is of the wrong type",
    Category.MISSING_DATA: "has incomplete information",
}


@dataclass(frozen=True, slots=True)
class TagPath:
    """A major tag and optional minor tag, e.g. ``Contributor`` / ``ORCID``."""

    major: str
    minor: str | None = None

    def __str__(self) -> str:
        if self.minor is None:
            return "@" + self.major
        return f"@{self.major}-{self.minor}"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    line: int
    path: TagPath | None
    category: Category
    message: str

    def render(self) -> str:
        return render(self)

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "major": self.path.major if self.path else None,
            "minor": self.path.minor if self.path else None,
            "category": self.category.value,
            "message": self.message,
        }


def render(d: Diagnostic) -> str:
    """Format one diagnostic as ``Line N : @Major-minor <verb>: <message>.``"""
    subject = str(d.path) if d.path is not None else "(untagged text)"
    message = d.message.rstrip(".")
    return f"Line {d.line} : {subject} {_VERBS[d.category]}: {message}."


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    # sorted() is stable, so discovery order is kept within a line
    return sorted(diags, key=lambda d: d.line)


def summarize(diags: Iterable[Diagnostic]) -> dict[Category, int]:
    counts = {c: 0 for c in Category}
    for d in diags:
        counts[d.category] += 1
    return counts


def report(diags: list[Diagnostic]) -> tuple[str, dict[Category, int]]:
    """Render diagnostics one per line followed by a summary line.

    An empty list gives an empty report and zero counts.
    """
    counts = summarize(diags)
    if not diags:
        return "", counts
    total = len(diags)
    noun = "problem" if total == 1 else "problems"
    summary = (
        f"{total} {noun} ({counts[Category.SYNTAX]} syntax, "
        f"{counts[Category.VALIDATION]} validation, "
        f"{counts[Category.MISSING_DATA]} missing data)"
    )
    lines = [render(d) for d in diags]
    lines.append(summary)
    return "\n".join(lines) + "\n", counts


def to_json_lines(diags: Iterable[Diagnostic]) -> str:
    return "".join(json.dumps(d.to_dict(), ensure_ascii=False) + "\n" for d in diags)
