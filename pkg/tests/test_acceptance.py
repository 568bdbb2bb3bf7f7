"""Exit criteria.  Each test carries a ``criterion`` marker and the run ends
with one PASS/FAIL line per criterion in the terminal summary."""

from __future__ import annotations

import datetime as dt
import random
import shutil
import signal
import string
import subprocess
from contextlib import contextmanager
from pathlib import Path

import pytest

from medford.bag import plan_bag, verify_bag, write_bag
from medford.cli import main
from medford.diagnostics import Category
from medford.document import Attribute, Block, Document, serialize
from medford.export import from_canonical_export, to_canonical_export
from medford.lexer import scan
from medford.macros import MacroCycle, MacroTable, collect, expand
from medford.parser import check, parse
from medford.validator import check_orcid

from conftest import FIXTURES


def read(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def shape(doc: Document):
    return [(b.major, b.desc, [(a.minor, a.value) for a in b.attributes]) for b in doc.blocks]


@contextmanager
def deadline(seconds: int):
    def fail(*_):
        raise TimeoutError(f"did not finish within {seconds}s")
    old = signal.signal(signal.SIGALRM, fail)
    signal.alarm(seconds)
    try:
        yield
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, old)


# 1 ---------------------------------------------------------------------------

GOLDEN = {
    "contributor.mfd": [
        ("Contributor", "Hollie M. Putnam", [
            ("ORCID", "0000-0003-2322-3269"), ("Role", "Corresponding Author"),
            ("Email", "hputnam@uri.edu")]),
    ],
    "software.mfd": [
        ("Software", "R", [
            ("Version", '4.0.4 ("Lost Library Book")'),
            ("Notes", "Packages used include dplyr, stringr, and genefilter.")]),
        ("Software", "DESeq2", [
            ("Version", "1.28.1"), ("Notes", "Used as a package in R."),
            ("Notes", "Installed through BioCManager.")]),
    ],
    "species_template.mfd": [
        ("Species", "Pocillopora damicornis", [
            ("Loc", "Sabago Isthmus, Panama"), ("ReefCollection", "[..]"),
            ("Cultured", "University of Miami Coral Resource Facility"),
            ("CultureCollection", "[..]")]),
    ],
    "species_filled.mfd": [
        ("Species", "Pocillopora damicornis", [
            ("Loc", "Sabago Isthmus, Panama"), ("ReefCollection", "06/12/20"),
            ("Cultured", "University of Miami Coral Resource Facility"),
            ("CultureCollection", "06/21/20")]),
    ],
    "rnaseq.mfd": [
        ("Method", "Illumina HiSeq2500", [
            ("Type", "Sequencing"), ("Company", "Dovetail Genomics, Santa Cruz, CA, USA"),
            ("Sample", "Healthy"), ("Note", "Chicago libraries, more sensitive to DNA size")]),
        ("Code_Ref", "HiRise", [("Type", "Assembly of genome scaffolds")]),
        ("Code_Ref", "BLAST", [
            ("Type", "Identify and remove scaffolds of non-coral origin"),
            ("Note", "Searched against databases from Symbiodiniaceae, Bacteria, and viruses")]),
    ],
    "image.mfd": [
        ("Image", "05-01-19_Image3", [
            ("Date", "2019-05-01T19:20:30.45"), ("Site", "LTER 4"), ("Habitat", "Outer 10m"),
            ("Pole", "3-4"), ("Quadrant", "4"), ("Coral", "Acropora"), ("Coverage", "6.2")]),
        ("Taxonomy", "Cnidaria", [("Type", "Phylum")]),
        ("Taxonomy", "Anthozoa", [("Type", "Class"), ("Parent", "Cnidaria")]),
        ("Region", "LTER 1 polygon including LTER 0 on north shore", [
            ("NorthernCoord", "-17.47"), ("SouthernCoord", "-17.49")]),
    ],
    "code_ref.mfd": [
        ("Code_Ref", "MEDFORD Source Repo", [
            ("Version", "1.0"), ("URI", "https://github.com/TuftsBCB/medford"),
            ("Type", "GitHub"), ("Language", "Python"), ("OS", "Linux MacOS")]),
    ],
}


@pytest.mark.criterion("1. golden corpus parses exactly")
@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_corpus(name):
    result = parse(read(name), name)
    assert result.diagnostics == []
    assert shape(result.document) == GOLDEN[name]


@pytest.mark.criterion("1. golden corpus parses exactly")
def test_golden_software_notes_order():
    doc = parse(read("software.mfd")).document
    software = [b for b in doc.blocks if b.major == "Software"]
    assert len(software) == 2
    assert [a.value for a in software[1].values("Notes")] == [
        "Used as a package in R.", "Installed through BioCManager."]


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion("2. reference error messages reproduced byte-for-byte")
def test_error_rendering():
    contributor = "@Contributor Hollie M. Putnam\n@Contributor-Role Corresponding Author\n"
    (d,) = check(contributor).diagnostics
    assert d.render().encode() == (
        b"Line 1 : @Contributor has incomplete information: "
        b"Corresponding Authors must have a provided validated email.")

    dated = ("@Freeform lines 1-6 are padding\n" + "@Freeform-Note pad\n" * 5
             + "@Date yesterday\n@Date-Note sampling day\n")
    (d,) = check(dated).diagnostics
    assert d.render().encode() == b"Line 7 : @Date-desc is of the wrong type: invalid date format."


# 3 ---------------------------------------------------------------------------

_ORACLE_FORMATS = ["%Y-%m-%d", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M:%S.%f",
                   "%Y-%m-%dT%H:%M:%S%z", "%Y-%m-%dT%H:%M:%S.%f%z"]


def strptime_accepts(value: str) -> bool:
    for fmt in _ORACLE_FORMATS:
        try:
            dt.datetime.strptime(value, fmt)
            return True
        except ValueError:
            pass
    return False


def invalid_dates(rng: random.Random, n: int) -> list[str]:
    junk = string.ascii_letters + string.digits + "-:/.T +"
    out: list[str] = []
    while len(out) < n:
        y, m, d = rng.randint(1000, 2999), rng.randint(0, 40), rng.randint(0, 40)
        candidates = [
            f"{y}-{m:02d}-{d:02d}",
            f"{m:02d}-{d:02d}-{y % 100:02d}",
            f"{d:02d}/{m:02d}/{y}",
            f"{y}-{m:02d}-{d:02d}T{rng.randint(0, 30):02d}:{rng.randint(0, 70):02d}:00",
            f"{y}{m:02d}{d:02d}",
            "".join(rng.choice(junk) for _ in range(rng.randint(1, 20))).strip(),
        ]
        value = rng.choice(candidates)
        if value and not strptime_accepts(value):
            out.append(value)
    return out


@pytest.mark.criterion("3. failing both date formats gives exactly one diagnostic")
def test_date_consolidation():
    values = invalid_dates(random.Random(3), 100)
    assert len(values) == 100
    for value in values:
        diags = check(f"@Date {value}\n@Date-Note n\n").diagnostics
        assert len(diags) == 1, (value, diags)
        assert diags[0].category is Category.VALIDATION
        assert diags[0].render() == "Line 1 : @Date-desc is of the wrong type: invalid date format."


# 4 ---------------------------------------------------------------------------

def orcid_oracle(value: str) -> bool:
    """ISO 7064 MOD 11-2 by definition: weighted sum including the check is 1 mod 11."""
    if len(value) != 19 or [value[i] for i in (4, 9, 14)] != ["-"] * 3:
        return False
    chars = value.replace("-", "")
    if not chars[:15].isdigit() or chars[15] not in "0123456789X":
        return False
    digits = [10 if c == "X" else int(c) for c in chars]
    return sum(v * 2 ** i for i, v in enumerate(reversed(digits))) % 11 == 1


def brute_force_check(base: str) -> str:
    (c,) = [c for c in "0123456789X" if orcid_oracle(f"{base[:4]}-{base[4:8]}-{base[8:12]}-{base[12:]}{c}")]
    return c


@pytest.mark.criterion("4. ORCID check agrees with independent oracle")
def test_orcid_oracle_equivalence():
    assert orcid_oracle("0000-0003-2322-3269")
    assert check_orcid("0000-0003-2322-3269")
    rng = random.Random(4)
    agree = 0
    for _ in range(1000):
        base = "".join(rng.choice(string.digits) for _ in range(15))
        good = brute_force_check(base)
        check_char = good if rng.random() < 0.5 else rng.choice([c for c in "0123456789X" if c != good])
        value = f"{base[:4]}-{base[4:8]}-{base[8:12]}-{base[12:]}{check_char}"
        agree += orcid_oracle(value) == check_orcid(value)
    assert agree == 1000


# 5 ---------------------------------------------------------------------------

def sha512_tool(path: Path) -> str:
    if shutil.which("sha512sum"):
        cmd = ["sha512sum", str(path)]
    elif shutil.which("openssl"):
        cmd = ["openssl", "dgst", "-sha512", "-r", str(path)]
    else:
        pytest.skip("no external sha512 tool")
    return subprocess.run(cmd, check=True, capture_output=True, text=True).stdout.split()[0]


@pytest.mark.criterion("5. bag round trip with independent digests")
@pytest.mark.parametrize("n_files", [0, 1, 10])
def test_bag_round_trip(tmp_path, n_files):
    rng = random.Random(n_files)
    base = tmp_path / "src"
    base.mkdir()
    lines = []
    for i in range(n_files):
        rel = f"sub{i % 3}/file{i}.bin"
        (base / rel).parent.mkdir(parents=True, exist_ok=True)
        (base / rel).write_bytes(rng.randbytes(rng.randint(0, 5000)))
        role = "Primary" if i % 2 else "Copy"
        lines += [f"@Data_{role} file {i}", f"@Data_{role}-Path {rel}"]
    lines += ["@Paper_Ref companion paper", "@Paper_Ref-URI https://doi.org/10.1000/xyz"]
    text = "\n".join(lines) + "\n"
    result = check(text, "study")
    assert result.diagnostics == []

    plan = plan_bag(result.document, base, mfd_text=text)
    bag = write_bag(plan, tmp_path / "bag")
    assert verify_bag(bag) == []

    manifest = (bag / "manifest-sha512.txt").read_text().splitlines()
    assert len(manifest) == n_files + 1
    for line in manifest:
        digest, path = line.split("  ")
        assert digest == sha512_tool(bag / path)
    assert "ref/" not in "\n".join(manifest)
    assert (bag / "fetch.txt").read_text() == (
        "https://doi.org/10.1000/xyz - data/ref/companion_paper\n")


# 6 ---------------------------------------------------------------------------

def random_document(rng: random.Random, index: int) -> Document:
    ident = string.ascii_letters + string.digits + "_"
    text = string.ascii_letters + string.digits + " ,.;:()[]@#$`'\"-/\\é漢🐠"

    def word(k=8):
        return "".join(rng.choice(ident) for _ in range(rng.randint(1, k)))

    def value():
        return "".join(rng.choice(text) for _ in range(rng.randint(0, 30)))

    blocks = []
    for line in range(rng.randint(1, 50)):
        attrs = [Attribute(word() + rng.choice(["", "-Unstructured"]), value(), rng.randint(1, 999))
                 for _ in range(rng.randint(0, 6))]
        blocks.append(Block(f"{word()}{line}", value(), line + 1, attrs))
    return Document(f"doc{index}", blocks)


@pytest.mark.criterion("6. export round trip preserves bytes and order")
def test_order_preservation():
    rng = random.Random(6)
    for i in range(200):
        doc = random_document(rng, i)
        first = to_canonical_export(doc)
        back = from_canonical_export(first)
        assert to_canonical_export(back).encode() == first.encode()
        assert [b.major for b in back.blocks] == [b.major for b in doc.blocks]
        assert back == doc


# 7 ---------------------------------------------------------------------------

def random_acyclic_table(rng: random.Random) -> dict[str, str]:
    names = [f"m{i}" for i in range(rng.randint(1, 8))]
    bodies = {}
    for i, name in enumerate(names):
        words = ["word", "x", "Drive,", "Zip"]
        # references only point to later names, so the graph is acyclic
        refs = [f"`@{n}" for n in names[i + 1:] if rng.random() < 0.4]
        parts = words[: rng.randint(0, 4)] + refs
        rng.shuffle(parts)
        bodies[name] = " ".join(parts)
    return bodies


def naive_fixpoint(body: str, bodies: dict[str, str]) -> str:
    import re
    while True:
        new = re.sub(r"`@([A-Za-z0-9_]+)", lambda m: bodies[m.group(1)], body)
        if new == body:
            return body
        body = new


@pytest.mark.criterion("7. macro idempotence, duplicates and cycles")
def test_macro_idempotence():
    rng = random.Random(7)
    for _ in range(200):
        bodies = random_acyclic_table(rng)
        table = MacroTable.from_bodies(bodies)
        body = " ".join(f"`@{n}" for n in rng.sample(sorted(bodies), rng.randint(1, len(bodies))))
        once = expand(body, table)
        assert expand(once, table) == once
        assert once == naive_fixpoint(body, bodies)


@pytest.mark.criterion("7. macro idempotence, duplicates and cycles")
def test_macro_duplicates_name_both_lines():
    rng = random.Random(70)
    for _ in range(50):
        first = rng.randint(1, 20)
        second = first + rng.randint(1, 20)
        lines = ["@Freeform pad"] * second
        lines[first - 1] = "`@dup first body"
        lines[second - 1] = "`@dup second body"
        diags = []
        collect(scan("\n".join(lines) + "\n"), diags)
        (d,) = diags
        assert d.category is Category.SYNTAX
        assert d.line == second
        assert f"line {first}" in d.message
        assert d.render().startswith(f"Line {second} : @macro-dup is invalid: multiple uses of the same macro name")


@pytest.mark.criterion("7. macro idempotence, duplicates and cycles")
@pytest.mark.parametrize("bodies, entry", [
    ({"a": "x `@b", "b": "y `@a"}, "a"),
    ({"a": "`@b", "b": "`@c", "c": "z `@a `@a"}, "a"),
])
def test_macro_cycles_terminate(bodies, entry):
    with deadline(5):
        with pytest.raises(MacroCycle) as info:
            expand("start `@a", MacroTable.from_bodies(bodies))
    assert info.value.name == entry
    text = "".join(f"`@{n} {b}\n" for n, b in bodies.items()) + "@Freeform x\n@Freeform-Note `@a\n"
    with deadline(5):
        result = parse(text)
    (d,) = result.diagnostics
    assert d.category is Category.SYNTAX and d.line == len(bodies) + 2


# 8 ---------------------------------------------------------------------------

@pytest.mark.criterion("8. template tokens block validation")
def test_template_tokens(capsys):
    diags = check(read("species_template.mfd")).diagnostics
    assert [(d.line, d.path.minor) for d in diags] == [(3, "ReefCollection"), (6, "CultureCollection")]
    assert main(["validate", str(FIXTURES / "species_template.mfd")]) == 1
    assert main(["validate", str(FIXTURES / "species_filled.mfd")]) == 0
    capsys.readouterr()


# 9 ---------------------------------------------------------------------------

NOVEL = """\
@Reef_Survey Moorea transect 4
@Reef_Survey-Diver J. Doe
@Reef_Survey-Visibility 15 m
@Reef_Survey-Visibility-Unstructured murky after noon
@Gerät Unterwasserkamera
@Gerät-Höhe 3 m $$\\pm 0.5$$
"""


@pytest.mark.criterion("9. novel tags validate and round-trip unchanged")
def test_extensibility():
    result = check(NOVEL, "novel")
    assert result.diagnostics == []
    exported = to_canonical_export(result.document)
    back = from_canonical_export(exported)
    assert to_canonical_export(back).encode() == exported.encode()
    assert serialize(back).encode() == NOVEL.encode()
