"""Unicode Character Database ingestion and character block construction.

Parses the UCD range-list files (``Scripts.txt`` and a general-category file
in the same ``codepoint(..range) ; value`` format), applies the supercategory
grouping plus a small set of manual reassignments, and groups the encodable
codepoints into (script, supercategory) blocks.  Blocks larger than the size
of the Latin letters-and-marks block are split into consecutive sub-blocks so
no block token ever addresses more positions than there are index tokens.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

from .errors import UCDConfigError, UCDParseError

# Supercategory tags in their canonical (block ordering) order.
SUPERCATEGORIES = ("LM", "PS", "N", "Z", "C")

_SUPERCAT_RANK = {tag: i for i, tag in enumerate(SUPERCATEGORIES)}

_FILTERED_CATEGORIES = frozenset({"Cn", "Co", "Cs"})

_KNOWN_CATEGORIES = frozenset({
    "Lu", "Ll", "Lt", "Lm", "Lo", "Mn", "Mc", "Me",
    "Nd", "Nl", "No",
    "Pc", "Pd", "Ps", "Pe", "Pi", "Pf", "Po",
    "Sm", "Sc", "Sk", "So",
    "Zs", "Zl", "Zp",
    "Cc", "Cf", "Co", "Cs", "Cn",
})

# Newline and tab behave like separators for grouping purposes even though
# Unicode files them under Cc.
_SUPERCAT_OVERRIDES = {0x000A: "Z", 0x0009: "Z"}

# The katakana-hiragana prolonged sound marks attach to whichever kana script
# precedes them; the tatweel only ever appears inside Arabic text.
_SCRIPT_OVERRIDES = {0x30FC: "Inherited", 0xFF70: "Inherited", 0x0640: "Arabic"}


def supercategory_of(general_category: str) -> str | None:
    """Map a two-letter UCD general category onto a supercategory tag.

    Letters and marks fold into ``LM``, punctuation and symbols into ``PS``,
    numbers into ``N``, separators into ``Z``, and the kept control-ish
    categories (Cc, Cf) into ``C``.  Returns None for the filtered categories
    Cn, Co and Cs, which have no encoding.
    """
    if general_category not in _KNOWN_CATEGORIES:
        raise ValueError(f"unknown general category {general_category!r}")
    if general_category in _FILTERED_CATEGORIES:
        return None
    head = general_category[0]
    if head in ("L", "M"):
        return "LM"
    if head in ("P", "S"):
        return "PS"
    if head == "N":
        return "N"
    if head == "Z":
        return "Z"
    return "C"  # Cc, Cf


@dataclass(frozen=True, slots=True)
class CharRecord:
    """Resolved properties of one codepoint after reassignment and filtering."""

    codepoint: int
    script: str
    supercategory: str | None  # None iff filtered
    filtered: bool


class CharRecordList(list):
    """A plain list of CharRecord that remembers which UCD version it came from."""

    def __init__(self, records: Iterable[CharRecord], ucd_version: str):
        super().__init__(records)
        self.ucd_version = ucd_version


_VERSION_RE = re.compile(r"^#\s*\w[\w]*-(\d+\.\d+\.\d+)\.txt\s*$")
_LINE_RE = re.compile(
    r"^(?P<lo>[0-9A-Fa-f]{4,6})(?:\.\.(?P<hi>[0-9A-Fa-f]{4,6}))?\s*;\s*(?P<value>[\w'-]+)\s*$"
)


def _parse_range_file(stream: TextIO, label: str) -> tuple[str | None, list[tuple[int, int, str]]]:
    """Parse a UCD range-list file into (version, [(lo, hi, value), ...])."""
    version: str | None = None
    ranges: list[tuple[int, int, str]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if version is None:
            m = _VERSION_RE.match(line)
            if m:
                version = m.group(1)
                continue
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        m = _LINE_RE.match(body)
        if m is None:
            raise UCDParseError(f"{label}:{lineno}: cannot parse {body!r}")
        lo = int(m.group("lo"), 16)
        hi = int(m.group("hi"), 16) if m.group("hi") else lo
        if hi < lo or hi > 0x10FFFF:
            raise UCDParseError(f"{label}:{lineno}: bad codepoint range {body!r}")
        ranges.append((lo, hi, m.group("value")))
    return version, ranges


def load_ucd(scripts_data: TextIO, category_data: TextIO) -> CharRecordList:
    """Build one CharRecord per listed codepoint from the two UCD streams.

    ``scripts_data`` is a ``Scripts.txt``-format stream; ``category_data``
    assigns general categories in the same range-list format.  Codepoints
    absent from the category stream are unassigned (Cn) and produce no
    record.  Script defaults to "Unknown" where the scripts stream is silent,
    which for well-formed UCD data only happens on filtered codepoints.
    """
    script_version, script_ranges = _parse_range_file(scripts_data, "scripts")
    cat_version, cat_ranges = _parse_range_file(category_data, "categories")
    if script_version and cat_version and script_version != cat_version:
        raise UCDConfigError(
            f"UCD version mismatch: scripts file is {script_version}, "
            f"category file is {cat_version}"
        )
    version = script_version or cat_version or "unknown"

    script_by_cp: dict[int, str] = {}
    for lo, hi, name in script_ranges:
        for cp in range(lo, hi + 1):
            script_by_cp[cp] = name

    records: list[CharRecord] = []
    seen: set[int] = set()
    for lo, hi, category in cat_ranges:
        if category not in _KNOWN_CATEGORIES:
            raise UCDParseError(f"categories: unknown general category {category!r}")
        for cp in range(lo, hi + 1):
            if cp in seen:
                raise UCDParseError(f"categories: codepoint U+{cp:04X} listed twice")
            seen.add(cp)
            supercat = _SUPERCAT_OVERRIDES.get(cp) or supercategory_of(category)
            filtered = supercat is None
            script = _SCRIPT_OVERRIDES.get(cp) or script_by_cp.get(cp, "Unknown")
            records.append(CharRecord(cp, script, supercat, filtered))
    records.sort(key=lambda r: r.codepoint)
    return CharRecordList(records, version)


def bundled_data_dir() -> Path:
    """Directory holding the UCD data files shipped with the package."""
    return Path(str(resources.files("scriptbpe") / "data"))


def load_ucd_dir(directory: str | Path) -> CharRecordList:
    """Load ``Scripts.txt`` and ``DerivedGeneralCategory.txt`` from a directory."""
    directory = Path(directory)
    scripts = directory / "Scripts.txt"
    categories = directory / "DerivedGeneralCategory.txt"
    for path in (scripts, categories):
        if not path.is_file():
            raise UCDConfigError(f"missing UCD data file: {path}")
    with scripts.open(encoding="utf-8") as s, categories.open(encoding="utf-8") as c:
        return load_ucd(s, c)


def load_bundled_ucd() -> CharRecordList:
    """Load the UCD data files shipped with the package."""
    return load_ucd_dir(bundled_data_dir())


@dataclass(frozen=True, slots=True)
class Block:
    """One sub-block: a run of ≤ threshold codepoints of a (script, supercategory) pair."""

    script: str
    supercategory: str
    sub_index: int
    members: tuple[int, ...]  # ascending codepoints


class BlockTable:
    """All character blocks of one UCD snapshot, in canonical order.

    Canonical block order is (script name, supercategory rank, sub_index);
    member order within a block is ascending codepoint.  Both are fixed so
    identical inputs always yield identical token id assignments.
    """

    def __init__(self, blocks: list[Block], threshold: int, ucd_version: str):
        self.blocks = blocks
        self.threshold = threshold
        self.ucd_version = ucd_version
        self._char_index: dict[int, tuple[int, int]] | None = None

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BlockTable)
            and self.blocks == other.blocks
            and self.threshold == other.threshold
            and self.ucd_version == other.ucd_version
        )

    @property
    def char_index(self) -> dict[int, tuple[int, int]]:
        """codepoint -> (block position, offset inside block); built lazily."""
        if self._char_index is None:
            index: dict[int, tuple[int, int]] = {}
            for pos, block in enumerate(self.blocks):
                for offset, cp in enumerate(block.members):
                    index[cp] = (pos, offset)
            self._char_index = index
        return self._char_index

    def char_count(self) -> int:
        return sum(len(b.members) for b in self.blocks)

    def is_encodable(self, codepoint: int) -> bool:
        return codepoint in self.char_index

    def block_sizes(self) -> list[int]:
        return [len(b.members) for b in self.blocks]

    def to_payload(self) -> dict:
        """JSON-ready canonical representation (members collapsed to ranges)."""
        return {
            "ucd_version": self.ucd_version,
            "threshold": self.threshold,
            "blocks": [
                [b.script, b.supercategory, b.sub_index, _to_ranges(b.members)]
                for b in self.blocks
            ],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "BlockTable":
        blocks = [
            Block(script, supercat, sub_index, _from_ranges(ranges))
            for script, supercat, sub_index, ranges in payload["blocks"]
        ]
        return cls(blocks, payload["threshold"], payload["ucd_version"])

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_payload()).encode("utf-8")

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def census(self) -> list[tuple[str, str, int, int]]:
        """(script, supercategory, member count, sub-block count) rows, largest first."""
        totals: dict[tuple[str, str], tuple[int, int]] = {}
        for b in self.blocks:
            size, subs = totals.get((b.script, b.supercategory), (0, 0))
            totals[(b.script, b.supercategory)] = (size + len(b.members), subs + 1)
        rows = [
            (script, supercat, size, subs)
            for (script, supercat), (size, subs) in totals.items()
        ]
        rows.sort(key=lambda r: (-r[2], r[0], _SUPERCAT_RANK[r[1]]))
        return rows


def canonical_json(obj) -> str:
    """The single JSON rendering used for every persisted artifact."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _to_ranges(members: tuple[int, ...]) -> list[list[int]]:
    ranges: list[list[int]] = []
    for cp in members:
        if ranges and cp == ranges[-1][1] + 1:
            ranges[-1][1] = cp
        else:
            ranges.append([cp, cp])
    return ranges


def _from_ranges(ranges: list[list[int]]) -> tuple[int, ...]:
    members: list[int] = []
    for lo, hi in ranges:
        members.extend(range(lo, hi + 1))
    return tuple(members)


def build_block_table(records: Iterable[CharRecord], ucd_version: str | None = None) -> BlockTable:
    """Group non-filtered records into blocks and split oversized ones.

    The split threshold is the size of the Latin LM block, so the index-token
    count always equals the largest block that is never split.
    """
    if ucd_version is None:
        ucd_version = getattr(records, "ucd_version", "unknown")
    groups: dict[tuple[str, str], list[int]] = {}
    for rec in records:
        if rec.filtered:
            continue
        groups.setdefault((rec.script, rec.supercategory), []).append(rec.codepoint)
    if not groups:
        raise ValueError("no encodable codepoints in record set")
    latin_lm = groups.get(("Latin", "LM"))
    if not latin_lm:
        raise ValueError("record set has no Latin LM block to derive the threshold from")
    threshold = len(latin_lm)

    blocks: list[Block] = []
    for (script, supercat), members in sorted(
        groups.items(), key=lambda kv: (kv[0][0], _SUPERCAT_RANK[kv[0][1]])
    ):
        members.sort()
        for sub_index in range(0, (len(members) + threshold - 1) // threshold):
            chunk = members[sub_index * threshold:(sub_index + 1) * threshold]
            blocks.append(Block(script, supercat, sub_index, tuple(chunk)))
    return BlockTable(blocks, threshold, ucd_version)


class CharProps:
    """Per-codepoint (script, supercategory) lookup used by the pretokenizer."""

    def __init__(self, table: dict[int, tuple[str, str]]):
        self._table = table

    @classmethod
    def from_block_table(cls, table: BlockTable) -> "CharProps":
        props: dict[int, tuple[str, str]] = {}
        for block in table.blocks:
            key = (block.script, block.supercategory)
            for cp in block.members:
                props[cp] = key
        return cls(props)

    @classmethod
    def from_records(cls, records: Iterable[CharRecord]) -> "CharProps":
        return cls({
            r.codepoint: (r.script, r.supercategory)
            for r in records
            if not r.filtered
        })

    def lookup(self, codepoint: int) -> tuple[str, str] | None:
        return self._table.get(codepoint)

    def is_filtered(self, codepoint: int) -> bool:
        return codepoint not in self._table

    def filter_text(self, text: str) -> str:
        """Drop filtered codepoints; the identity for already-clean text."""
        table = self._table
        if all(ord(c) in table for c in text):
            return text
        return "".join(c for c in text if ord(c) in table)


def render_census(table: BlockTable, top: int | None = None) -> str:
    """Text census of block sizes, largest first, plus alphabet totals."""
    rows = table.census()
    shown = rows if top is None else rows[:top]
    width = max([len(r[0]) for r in shown] + [len("Script")])
    lines = [
        f"UCD version: {table.ucd_version}",
        f"threshold = |Latin LM| = {table.threshold}",
        f"{'Script':<{width}}  {'Supercat':<8}  {'Size':>8}  {'Sub-blocks':>10}",
    ]
    for script, supercat, size, subs in shown:
        lines.append(f"{script:<{width}}  {supercat:<8}  {size:>8,}  {subs:>10}")
    if top is not None and len(rows) > top:
        lines.append(f"... {len(rows) - top} more rows")
    lines.append(f"block_tokens={len(table.blocks)}")
    lines.append(f"index_tokens={table.threshold}")
    lines.append(f"encodable_codepoints={table.char_count()}")
    return "\n".join(lines)
