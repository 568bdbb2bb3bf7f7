"""Compile a validated Document into a BagIt bag.

Primary and Copy resources are copied into the payload and listed in
``manifest-sha512.txt``; Ref resources only get a line in ``fetch.txt``.
The MEDFORD file itself sits at the payload root.
"""

from __future__ import annotations

import hashlib
import os
import re
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path, PurePosixPath

from .diagnostics import Category, Diagnostic, TagPath
from .document import Block, Document, serialize

BAGIT_TXT = "BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"
MANIFEST = "manifest-sha512.txt"
FETCH = "fetch.txt"
UNKNOWN_LENGTH = "-"
_CHUNK = 1 << 20


class Kind(Enum):
    DATA = "Data"
    CODE = "Code"
    PAPER = "Paper"


class Role(Enum):
    PRIMARY = "Primary"
    COPY = "Copy"
    REF = "Ref"


LOCATOR = {Role.PRIMARY: "Path", Role.COPY: "Path", Role.REF: "URI"}


class BagError(Exception):
    pass


class UnreadableFile(BagError):
    pass


class UnsafePath(BagError):
    pass


class DuplicateBagPath(BagError):
    pass


class BagIoError(BagError):
    pass


class NotABag(BagError):
    pass


@dataclass(frozen=True)
class ProvenanceEntry:
    kind: Kind
    role: Role
    desc: str
    locator: str
    source_block: Block


@dataclass(frozen=True, slots=True)
class PayloadEntry:
    source_path: Path | None
    bag_path: str
    sha512: str
    content: bytes | None = None


@dataclass(frozen=True, slots=True)
class FetchEntry:
    uri: str
    bag_path: str
    length: str = UNKNOWN_LENGTH


@dataclass(frozen=True)
class BagPlan:
    mfd_bag_path: str
    payload: list[PayloadEntry]
    fetch: list[FetchEntry]


@dataclass(frozen=True, slots=True)
class Mismatch:
    kind: str  # "missing", "extra" or "digest"
    path: str

    def __str__(self) -> str:
        return {
            "missing": f"{self.path}: listed in the manifest but not in the payload",
            "extra": f"{self.path}: in the payload but not listed in the manifest",
            "digest": f"{self.path}: checksum does not match the manifest",
        }[self.kind]


def provenance_role(major: str) -> tuple[Kind, Role] | None:
    kind, sep, role = major.partition("_")
    if not sep:
        return None
    try:
        return Kind(kind), Role(role)
    except ValueError:
        return None


def extract_provenance(doc: Document, diagnostics: list[Diagnostic] | None = None
                       ) -> list[ProvenanceEntry]:
    sink = diagnostics if diagnostics is not None else []
    entries = []
    for block in doc.blocks:
        kr = provenance_role(block.major)
        if kr is None:
            continue
        kind, role = kr
        minor = LOCATOR[role]
        locator = (block.first(minor) or "").strip()
        if not locator:
            sink.append(Diagnostic(block.head_line, TagPath(block.major), Category.MISSING_DATA,
                                   f"missing required @{block.major}-{minor}"))
            continue
        entries.append(ProvenanceEntry(kind, role, block.desc, locator, block))
    return entries


def sha512_file(path: Path) -> str:
    h = hashlib.sha512()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(_CHUNK), b""):
            h.update(chunk)
    return h.hexdigest()


def payload_path(locator: str) -> str:
    """``data/``-relative bag path for a local file; rejects escapes."""
    norm = locator.strip().replace("\\", "/")
    p = PurePosixPath(norm)
    if p.is_absolute() or re.match(r"[A-Za-z]:", norm) or ".." in p.parts:
        raise UnsafePath(f"{locator}: path must be relative and may not contain '..'")
    parts = [part for part in p.parts if part not in ("", ".")]
    if not parts:
        raise UnsafePath(f"{locator}: empty path")
    return "data/" + "/".join(parts)


def _ref_name(entry: ProvenanceEntry) -> str:
    name = entry.desc.strip() or entry.locator.rstrip("/").rsplit("/", 1)[-1]
    name = re.sub(r"[^A-Za-z0-9._-]+", "_", name).lstrip(".")
    return name or "ref"


def plan_bag(doc: Document, base_dir: str | Path, mfd_text: str | None = None,
             workers: int | None = None) -> BagPlan:
    """Work out what goes in the bag and hash every payload file.

    ``mfd_text`` is the MEDFORD file content to carry; the canonical
    serialization of ``doc`` is used when it is omitted.
    """
    diags: list[Diagnostic] = []
    entries = extract_provenance(doc, diags)
    if diags:
        raise BagError("; ".join(d.render() for d in diags))

    base = Path(base_dir).resolve()
    name = doc.source_name or "metadata"
    mfd_bag_path = f"data/{name}.mfd"
    mfd_bytes = (mfd_text if mfd_text is not None else serialize(doc)).encode("utf-8")

    taken = {mfd_bag_path: "the MEDFORD file"}

    def claim(bag_path: str, what: str) -> None:
        if bag_path in taken:
            raise DuplicateBagPath(f"{what} and {taken[bag_path]} both map to {bag_path}")
        taken[bag_path] = what

    local: list[tuple[Path, str]] = []
    fetch: list[FetchEntry] = []
    for e in entries:
        if e.role is Role.REF:
            bag_path = f"data/ref/{_ref_name(e)}"
            claim(bag_path, e.locator)
            fetch.append(FetchEntry(e.locator, bag_path))
            continue
        bag_path = payload_path(e.locator)
        claim(bag_path, e.locator)
        source = (base / bag_path[len("data/"):]).resolve()
        if not source.is_relative_to(base):
            raise UnsafePath(f"{e.locator}: resolves outside {base}")
        if not source.is_file() or not os.access(source, os.R_OK):
            raise UnreadableFile(f"{source}: not a readable file")
        local.append((source, bag_path))

    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            digests = list(pool.map(sha512_file, [src for src, _ in local]))
    except OSError as exc:
        raise UnreadableFile(str(exc)) from exc

    payload = [PayloadEntry(None, mfd_bag_path, hashlib.sha512(mfd_bytes).hexdigest(), mfd_bytes)]
    payload += [PayloadEntry(src, bp, dg) for (src, bp), dg in zip(local, digests)]
    return BagPlan(mfd_bag_path, payload, fetch)


def _encode_path(path: str) -> str:
    # RFC 8493 2.1.3: only CR, LF and % need escaping in tag files
    return path.replace("%", "%25").replace("\r", "%0D").replace("\n", "%0A")


def _decode_path(path: str) -> str:
    return path.replace("%0A", "\n").replace("%0D", "\r").replace("%25", "%")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_bag(plan: BagPlan, out_dir: str | Path) -> Path:
    """Write the bag to ``out_dir``, which must be absent or empty.

    The bag is built in a sibling temporary directory and moved into place,
    so a failure never leaves a half-written bag behind.
    """
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise BagIoError(f"{out}: output directory exists and is not empty")
    parent = out.absolute().parent
    try:
        parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=parent))
    except OSError as exc:
        raise BagIoError(f"{parent}: {exc.strerror or exc}") from exc

    current = tmp
    try:
        _write_text(tmp / "bagit.txt", BAGIT_TXT)
        for entry in plan.payload:
            current = tmp / entry.bag_path
            current.parent.mkdir(parents=True, exist_ok=True)
            if entry.content is not None:
                current.write_bytes(entry.content)
            else:
                shutil.copyfile(entry.source_path, current)
        current = tmp / MANIFEST
        _write_text(current, "".join(
            f"{e.sha512}  {_encode_path(e.bag_path)}\n"
            for e in sorted(plan.payload, key=lambda e: e.bag_path)))
        if plan.fetch:
            current = tmp / FETCH
            _write_text(current, "".join(
                f"{f.uri} {f.length} {_encode_path(f.bag_path)}\n" for f in plan.fetch))
        if out.exists():
            out.rmdir()
        current = out
        os.replace(tmp, out)
    except OSError as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise BagIoError(f"{current}: {exc.strerror or exc}") from exc
    return out


def read_manifest(bag_dir: Path) -> dict[str, str]:
    manifest = bag_dir / MANIFEST
    if not manifest.is_file():
        raise NotABag(f"{bag_dir}: no {MANIFEST}")
    entries = {}
    for n, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        digest, sep, path = line.partition(" ")
        if not sep:
            raise NotABag(f"{manifest}: malformed line {n}")
        entries[_decode_path(path.lstrip(" "))] = digest.lower()
    return entries


def verify_bag(bag_dir: str | Path, workers: int | None = None) -> list[Mismatch]:
    """Re-hash the payload against the manifest; an empty list means the bag is intact."""
    bag = Path(bag_dir)
    if not (bag / "bagit.txt").is_file():
        raise NotABag(f"{bag}: no bagit.txt")
    expected = read_manifest(bag)
    data = bag / "data"
    on_disk = set()
    if data.is_dir():
        on_disk = {p.relative_to(bag).as_posix() for p in data.rglob("*") if p.is_file()}

    mismatches = [Mismatch("missing", p) for p in sorted(expected) if p not in on_disk]
    present = sorted(p for p in expected if p in on_disk)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        digests = list(pool.map(lambda p: sha512_file(bag / p), present))
    mismatches += [Mismatch("digest", p) for p, d in zip(present, digests) if d != expected[p]]
    mismatches += [Mismatch("extra", p) for p in sorted(on_disk - set(expected))]
    return mismatches
