"""Blocks of major/minor tags assembled from expanded statements."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Category, Diagnostic, TagPath
from .lexer import Statement, StatementKind
from .macros import MacroTable

DESC = "desc"


class TagError(ValueError):
    pass


def split_tag_token(token: str) -> TagPath:
    """Split a tag token at its first hyphen.

    >>> split_tag_token("Code_Ref-Type")
    TagPath(major='Code_Ref', minor='Type')
    """
    if not token:
        raise TagError("the tag name is empty")
    major, sep, minor = token.partition("-")
    if not major:
        raise TagError("a minor tag needs a major tag before the hyphen")
    if sep and not minor:
        raise TagError("the minor tag after the hyphen is empty")
    return TagPath(major, minor if sep else None)


@dataclass(frozen=True, slots=True)
class Attribute:
    minor: str
    value: str
    line: int


@dataclass
class Block:
    major: str
    desc: str
    head_line: int
    attributes: list[Attribute] = field(default_factory=list)

    def values(self, minor: str) -> list[Attribute]:
        return [a for a in self.attributes if a.minor == minor]

    def first(self, minor: str) -> str | None:
        for a in self.attributes:
            if a.minor == minor:
                return a.value
        return None

    def content(self) -> tuple:
        return self.major, self.desc, tuple((a.minor, a.value) for a in self.attributes)


@dataclass
class Document:
    source_name: str
    blocks: list[Block] = field(default_factory=list)
    macro_table: MacroTable = field(default_factory=MacroTable)

    def content(self) -> tuple:
        """Blocks without line numbers, for comparing documents across serializations."""
        return tuple(b.content() for b in self.blocks)


def assemble(statements: list[Statement], source_name: str = "",
             macro_table: MacroTable | None = None) -> tuple[Document, list[Diagnostic]]:
    """Build a Document from macro-expanded tag statements.

    A minor only attaches to the block opened immediately before it with
    the same major; anything else is dropped and reported.
    """
    doc = Document(source_name, [], macro_table or MacroTable())
    diags: list[Diagnostic] = []
    current: Block | None = None
    for st in statements:
        if st.kind is not StatementKind.TAG:
            continue
        try:
            path = split_tag_token(st.head_token)
        except TagError as exc:
            diags.append(Diagnostic(st.start_line, st.path, Category.SYNTAX, str(exc)))
            continue
        if path.minor is None:
            current = Block(path.major, st.body, st.start_line)
            doc.blocks.append(current)
        elif path.minor == DESC:
            diags.append(Diagnostic(
                st.start_line, path, Category.SYNTAX,
                f"desc is reserved for the value on the @{path.major} line",
            ))
        elif current is None or current.major != path.major:
            diags.append(Diagnostic(
                st.start_line, path, Category.MISSING_DATA,
                f"minor tag must follow its @{path.major} major tag",
            ))
        else:
            current.attributes.append(Attribute(path.minor, st.body, st.start_line))
    return doc, diags


def _line(tag: str, value: str) -> str:
    return f"@{tag} {value}" if value else f"@{tag}"


def serialize(doc: Document) -> str:
    """Canonical MEDFORD text: one statement per line, blocks in order."""
    out = []
    for block in doc.blocks:
        out.append(_line(block.major, block.desc))
        for a in block.attributes:
            out.append(_line(f"{block.major}-{a.minor}", a.value))
    return "".join(line + "\n" for line in out)
