"""Data-driven tag vocabulary.

The vocabulary lives in plain text so it can be extended without touching
the parser.  Each line is either a field::

    Major.minor = Type[,required][,repeatable]

or a conditional rule::

    rule Major: minor = value -> other_minor : Type | message

``#`` starts a comment.  ``desc`` names the value on the major line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from importlib import resources

from .document import DESC


class FieldType(Enum):
    FREE_TEXT = "FreeText"
    DATE_OR_DATETIME = "DateOrDateTime"
    ORCID = "Orcid"
    EMAIL = "Email"
    LATITUDE = "Latitude"
    LONGITUDE = "Longitude"
    URI = "Uri"
    LOCAL_PATH = "LocalPath"


@dataclass(frozen=True, slots=True)
class FieldSpec:
    type: FieldType = FieldType.FREE_TEXT
    required: bool = False
    repeatable: bool = False


UNTYPED = FieldSpec(FieldType.FREE_TEXT, required=False, repeatable=True)


@dataclass(frozen=True, slots=True)
class ConditionalRule:
    """If any ``when_minor`` value equals ``when_value`` (case-insensitive),
    some ``require_minor`` value must validate as ``require_type``."""

    when_minor: str
    when_value: str
    require_minor: str
    require_type: FieldType
    message: str

    @property
    def key(self) -> tuple[str, str, str]:
        return self.when_minor, self.when_value.casefold(), self.require_minor

    def triggered_by(self, values: list[str]) -> bool:
        want = self.when_value.strip().casefold()
        return any(v.strip().casefold() == want for v in values)


def is_unstructured(minor: str) -> bool:
    return minor == "Unstructured" or minor.endswith("-Unstructured")


@dataclass(frozen=True)
class TagSchema:
    major: str
    fields: dict[str, FieldSpec] = field(default_factory=dict)
    rules: tuple[ConditionalRule, ...] = ()

    def field(self, minor: str) -> FieldSpec:
        if is_unstructured(minor):
            spec = self.fields.get(minor, UNTYPED)
            return replace(spec, type=FieldType.FREE_TEXT)
        return self.fields.get(minor, UNTYPED)

    @property
    def desc(self) -> FieldSpec:
        return self.field(DESC)


class SchemaFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_RULE = re.compile(
    r"rule\s+(?P<major>[^\s:.]+)\s*:\s*(?P<when>\S+)\s*=\s*(?P<value>.+?)\s*->\s*"
    r"(?P<req>\S+)\s*:\s*(?P<type>\w+)\s*\|\s*(?P<msg>.+)"
)
_FIELD = re.compile(r"(?P<major>[^\s.=]+)\.(?P<minor>[^\s=]+)\s*=\s*(?P<opts>.+)")
_TYPES = {t.value: t for t in FieldType}
_FLAGS = {"required", "repeatable"}


def _field_type(name: str, line: int) -> FieldType:
    try:
        return _TYPES[name]
    except KeyError:
        known = ", ".join(_TYPES)
        raise SchemaFormatError(line, f"unknown field type {name!r} (expected one of {known})") from None


def _check_major(major: str, line: int) -> None:
    if "-" in major:
        raise SchemaFormatError(line, f"major tag {major!r} may not contain a hyphen")


class Registry:
    """Lookup of TagSchema by major; unknown majors get an empty schema."""

    def __init__(self, schemas: dict[str, TagSchema] | None = None):
        self._schemas = dict(schemas or {})

    def __contains__(self, major: str) -> bool:
        return major in self._schemas

    def majors(self) -> list[str]:
        return list(self._schemas)

    def lookup(self, major: str) -> TagSchema:
        return self._schemas.get(major) or TagSchema(major)

    def overlay(self, definition_text: str) -> "Registry":
        """New registry with the entries of ``definition_text`` shadowing ours."""
        fields: dict[str, dict[str, FieldSpec]] = {
            m: dict(s.fields) for m, s in self._schemas.items()
        }
        rules: dict[str, dict[tuple, ConditionalRule]] = {
            m: {r.key: r for r in s.rules} for m, s in self._schemas.items()
        }
        for n, raw in enumerate(definition_text.splitlines(), start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if text.startswith("rule") and text[4:5].isspace():
                m = _RULE.fullmatch(text)
                if m is None:
                    raise SchemaFormatError(
                        n, "expected 'rule Major: minor = value -> minor : Type | message'")
                _check_major(m["major"], n)
                rule = ConditionalRule(m["when"], m["value"], m["req"],
                                       _field_type(m["type"], n), m["msg"].strip())
                rules.setdefault(m["major"], {})[rule.key] = rule
                fields.setdefault(m["major"], {})
                continue
            m = _FIELD.fullmatch(text)
            if m is None:
                raise SchemaFormatError(n, "expected 'Major.minor = Type[,required][,repeatable]'")
            _check_major(m["major"], n)
            opts = [o.strip() for o in m["opts"].split(",")]
            ftype = _field_type(opts[0], n)
            bad = [o for o in opts[1:] if o not in _FLAGS]
            if bad:
                raise SchemaFormatError(n, f"unknown flag {bad[0]!r}")
            fields.setdefault(m["major"], {})[m["minor"]] = FieldSpec(
                ftype, "required" in opts[1:], "repeatable" in opts[1:])
        return Registry({
            major: TagSchema(major, fields[major], tuple(rules.get(major, {}).values()))
            for major in fields
        })


@lru_cache(maxsize=1)
def builtin_vocabulary() -> Registry:
    text = resources.files(__package__).joinpath("builtin.schema").read_text(encoding="utf-8")
    return Registry().overlay(text)


def load_schema(definition_text: str, base: Registry | None = None) -> Registry:
    """Overlay ``definition_text`` on ``base`` (the built-in vocabulary by default)."""
    return (base if base is not None else builtin_vocabulary()).overlay(definition_text)
