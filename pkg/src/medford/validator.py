"""Content checks for an assembled Document against a Registry."""

from __future__ import annotations

import datetime as dt
import re
from collections import Counter
from pathlib import PurePosixPath

from .diagnostics import Category, Diagnostic, TagPath, sort_diagnostics
from .document import DESC, Block, Document
from .schema import FieldType, Registry, TagSchema, builtin_vocabulary

TEMPLATE_TOKEN = "[..]"

_DATE = re.compile(r"(\d{4})-(\d{2})-(\d{2})")
_DATETIME = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(?:\.\d+)?"
    r"(?:Z|[+-](\d{2}):(\d{2}))?"
)
_ORCID = re.compile(r"\d{4}-\d{4}-\d{4}-\d{3}[\dX]")
_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)")
_URI = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:\S+")
_LABEL = re.compile(r"[^\s@.]+")


def _calendar(y: str, m: str, d: str) -> bool:
    try:
        dt.date(int(y), int(m), int(d))
    except ValueError:
        return False
    return True


def _as_date(value: str) -> bool:
    m = _DATE.fullmatch(value)
    return m is not None and _calendar(*m.groups())


def _as_datetime(value: str) -> bool:
    m = _DATETIME.fullmatch(value)
    if m is None or not _calendar(*m.group(1, 2, 3)):
        return False
    hh, mm, ss = int(m[4]), int(m[5]), int(m[6])
    if hh > 23 or mm > 59 or ss > 59:
        return False
    if m[7] is not None and (int(m[7]) > 23 or int(m[8]) > 59):
        return False
    return True


def check_date(value: str) -> bool:
    """True for ``YYYY-MM-DD`` or ``YYYY-MM-DDThh:mm:ss[.frac][zone]``."""
    value = value.strip()
    return _as_date(value) or _as_datetime(value)


def orcid_check_digit(base_digits: str) -> str:
    """ISO 7064 MOD 11-2 check character for the 15 base digits."""
    total = 0
    for ch in base_digits:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    return "X" if result == 10 else str(result)


def check_orcid(value: str) -> bool:
    value = value.strip()
    if not _ORCID.fullmatch(value):
        return False
    digits = value.replace("-", "")
    return orcid_check_digit(digits[:15]) == digits[15]


def check_email(value: str) -> bool:
    value = value.strip()
    if value.count("@") != 1:
        return False
    local, domain = value.split("@")
    if not local or any(c.isspace() for c in local):
        return False
    labels = domain.split(".")
    return len(labels) >= 2 and all(_LABEL.fullmatch(lab) for lab in labels)


def _bounded(value: str, limit: float) -> bool:
    value = value.strip()
    if not _DECIMAL.fullmatch(value):
        return False
    return -limit <= float(value) <= limit


def check_latitude(value: str) -> bool:
    return _bounded(value, 90)


def check_longitude(value: str) -> bool:
    return _bounded(value, 180)


def check_uri(value: str) -> bool:
    return _URI.fullmatch(value.strip()) is not None


def check_local_path(value: str) -> bool:
    value = value.strip()
    if not value or "\\" in value or "\n" in value or "\r" in value:
        return False
    p = PurePosixPath(value)
    return not p.is_absolute() and ".." not in p.parts and p.name not in ("", ".")


CHECKS = {
    FieldType.DATE_OR_DATETIME: (check_date, "invalid date format"),
    FieldType.ORCID: (check_orcid, "invalid ORCID identifier"),
    FieldType.EMAIL: (check_email, "invalid email address"),
    FieldType.LATITUDE: (check_latitude, "latitude must be a decimal number between -90 and 90"),
    FieldType.LONGITUDE: (check_longitude, "longitude must be a decimal number between -180 and 180"),
    FieldType.URI: (check_uri, "invalid URI"),
    FieldType.LOCAL_PATH: (check_local_path, "path must be relative and stay inside the bag"),
}


def conforms(value: str, ftype: FieldType) -> bool:
    if ftype is FieldType.FREE_TEXT:
        return True
    return CHECKS[ftype][0](value)


def has_template_token(value: str) -> bool:
    return TEMPLATE_TOKEN in value


def detect_template_tokens(doc: Document) -> list[Diagnostic]:
    """One diagnostic per desc or attribute value still holding ``[..]``."""
    out = []
    for block in doc.blocks:
        if has_template_token(block.desc):
            out.append(_placeholder(block.head_line, TagPath(block.major, DESC)))
        for a in block.attributes:
            if has_template_token(a.value):
                out.append(_placeholder(a.line, TagPath(block.major, a.minor)))
    return out


def _placeholder(line: int, path: TagPath) -> Diagnostic:
    return Diagnostic(line, path, Category.VALIDATION,
                      f"template placeholder {TEMPLATE_TOKEN} must be filled in before validation")


def _type_check(value: str, ftype: FieldType, line: int, path: TagPath) -> Diagnostic | None:
    if ftype is FieldType.FREE_TEXT or not value or has_template_token(value):
        return None
    check, message = CHECKS[ftype]
    # alternatives (date / datetime) are merged inside the check, so one
    # failing value yields one diagnostic
    if check(value):
        return None
    return Diagnostic(line, path, Category.VALIDATION, message)


def _check_block(block: Block, schema: TagSchema) -> list[Diagnostic]:
    diags = []
    head = block.head_line
    desc_spec = schema.desc
    if desc_spec.required and not block.desc.strip():
        diags.append(Diagnostic(head, TagPath(block.major, DESC), Category.MISSING_DATA,
                                f"@{block.major} needs a value on its own line"))
    d = _type_check(block.desc, desc_spec.type, head, TagPath(block.major, DESC))
    if d:
        diags.append(d)

    seen = Counter()
    for a in block.attributes:
        spec = schema.field(a.minor)
        path = TagPath(block.major, a.minor)
        seen[a.minor] += 1
        if seen[a.minor] == 2 and not spec.repeatable:
            diags.append(Diagnostic(a.line, path, Category.SYNTAX,
                                    f"may appear only once per @{block.major} block"))
        d = _type_check(a.value, spec.type, a.line, path)
        if d:
            diags.append(d)

    for minor, spec in schema.fields.items():
        if minor == DESC or not spec.required:
            continue
        if not any(a.value.strip() for a in block.values(minor)):
            diags.append(Diagnostic(head, TagPath(block.major), Category.MISSING_DATA,
                                    f"missing required @{block.major}-{minor}"))

    for rule in schema.rules:
        if not rule.triggered_by([a.value for a in block.values(rule.when_minor)]):
            continue
        if not any(conforms(a.value, rule.require_type) and a.value.strip()
                   for a in block.values(rule.require_minor)):
            diags.append(Diagnostic(head, TagPath(block.major), Category.MISSING_DATA,
                                    rule.message))
    return diags


def validate_document(doc: Document, registry: Registry | None = None) -> list[Diagnostic]:
    """Every content problem in ``doc``, sorted by line then discovery order.

    Majors and minors the registry does not know are never reported.
    """
    registry = registry if registry is not None else builtin_vocabulary()
    diags = detect_template_tokens(doc)
    for block in doc.blocks:
        diags.extend(_check_block(block, registry.lookup(block.major)))
    return sort_diagnostics(diags)
