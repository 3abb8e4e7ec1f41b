"""Pretokenization: rule-based script grouping or a configured regex pattern.

The rule-based strategy forms maximal runs of identical (script,
supercategory), then refines them in three passes, in this fixed order:

  1. a group that is exactly one space merges into a following
     letters/marks group of a whitespace-separated script, or into a
     following Common punctuation/symbols group;
  2. an Inherited-script group (combining marks, the kana length marks,
     zero-width joiners) merges into its preceding group, and the merged run
     keeps absorbing alternating groups that match the original label;
  3. adjacent Han and Hiragana letter groups coalesce.

Filtered codepoints are dropped before any grouping, for every mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import regex

from .codec import BYTE, SCRIPT, Alphabet, encode_bytes, encode_span
from .errors import ScriptBpeError
from .ucd import BlockTable, CharProps

RULE_BASED = "rule"
REGEX = "regex"

# Scripts whose words are whitespace-separated, for the single-space merge.
DEFAULT_SPACE_MERGE_SCRIPTS: tuple[str, ...] = (
    "Latin", "Arabic", "Devanagari", "Hangul", "Ethiopic", "Cyrillic",
    "Greek", "Hebrew", "Bengali", "Syriac", "Oriya", "Tamil", "Telugu",
    "Gurmukhi", "Gujarati", "Sinhala", "Malayalam", "Armenian", "Kannada",
    "Georgian",
)

# Published tiktoken pretokenization patterns, stored verbatim.
CL100K_PATTERN = (
    r"""'(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}+|\p{N}{1,3}"""
    r"""| ?[^\s\p{L}\p{N}]++[\r\n]*|\s*[\r\n]|\s+(?!\S)|\s+"""
)
O200K_PATTERN = "|".join(
    [
        r"""[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]*[\p{Ll}\p{Lm}\p{Lo}\p{M}]+(?i:'s|'t|'re|'ve|'m|'ll|'d)?""",
        r"""[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]+[\p{Ll}\p{Lm}\p{Lo}\p{M}]*(?i:'s|'t|'re|'ve|'m|'ll|'d)?""",
        r"""\p{N}{1,3}""",
        r""" ?[^\s\p{L}\p{N}]+[\r\n/]*""",
        r"""\s*[\r\n]+""",
        r"""\s+(?!\S)""",
        r"""\s+""",
    ]
)

NAMED_PATTERNS = {"cl100k": CL100K_PATTERN, "o200k": O200K_PATTERN}


@dataclass(frozen=True)
class PretokenizerSpec:
    """How text is split before base encoding; serialized inside the model."""

    mode: str
    pattern: str | None = None
    space_merge_scripts: tuple[str, ...] = DEFAULT_SPACE_MERGE_SCRIPTS

    def __post_init__(self):
        if self.mode not in (RULE_BASED, REGEX):
            raise ScriptBpeError(f"unknown pretokenizer mode {self.mode!r}")
        if self.mode == RULE_BASED and self.pattern:
            raise ScriptBpeError("rule-based pretokenizer takes no pattern")
        if self.mode == REGEX and not self.pattern:
            raise ScriptBpeError("regex pretokenizer requires a pattern")
        object.__setattr__(self, "space_merge_scripts", tuple(self.space_merge_scripts))

    def compiled_pattern(self):
        """Compile the configured pattern; engine rejections are config errors."""
        try:
            return regex.compile(self.pattern)
        except regex.error as exc:
            raise ScriptBpeError(f"pretokenizer pattern rejected by engine: {exc}") from exc

    @classmethod
    def rule_based(cls) -> "PretokenizerSpec":
        return cls(RULE_BASED)

    @classmethod
    def from_name(cls, name: str) -> "PretokenizerSpec":
        if name == RULE_BASED:
            return cls.rule_based()
        if name in NAMED_PATTERNS:
            return cls(REGEX, NAMED_PATTERNS[name])
        raise ScriptBpeError(f"unknown pretokenizer {name!r} "
                             f"(expected 'rule' or one of {sorted(NAMED_PATTERNS)})")


@dataclass(slots=True)
class Group:
    """A text span whose characters all share one (script, supercategory)."""

    text: str
    script: str
    supercategory: str


def group_initial(text: str, props: CharProps) -> list[Group]:
    """Split filtered text into maximal runs of identical (script, supercategory)."""
    groups: list[Group] = []
    start = 0
    current: tuple[str, str] | None = None
    for i, c in enumerate(text):
        key = props.lookup(ord(c))
        if key is None:
            raise ScriptBpeError(
                f"filtered codepoint U+{ord(c):04X} reached grouping; drop it first")
        if key != current:
            if current is not None:
                groups.append(Group(text[start:i], current[0], current[1]))
            start, current = i, key
    if current is not None:
        groups.append(Group(text[start:], current[0], current[1]))
    return groups


def merge_spaces(groups: list[Group], spec: PretokenizerSpec) -> list[Group]:
    """Merge each single-space group into an eligible following group."""
    allowed = set(spec.space_merge_scripts)
    out: list[Group] = []
    i = 0
    while i < len(groups):
        g = groups[i]
        if g.text == " " and i + 1 < len(groups):
            nxt = groups[i + 1]
            mergeable = (
                (nxt.supercategory == "LM" and nxt.script in allowed)
                or (nxt.script == "Common" and nxt.supercategory == "PS")
            )
            if mergeable:
                out.append(Group(" " + nxt.text, nxt.script, nxt.supercategory))
                i += 2
                continue
        out.append(Group(g.text, g.script, g.supercategory))
        i += 1
    return out


def merge_inherited(groups: list[Group]) -> list[Group]:
    """Fold Inherited groups into their predecessor and keep absorbing
    alternating groups that match the predecessor's label.

    A leading Inherited group has nothing to attach to and stays standalone.
    """
    out: list[Group] = []
    absorbing = False  # the last output group just absorbed an Inherited run
    for g in groups:
        if out and g.script == "Inherited":
            out[-1].text += g.text
            absorbing = True
        elif absorbing and (g.script, g.supercategory) == (out[-1].script, out[-1].supercategory):
            out[-1].text += g.text
            absorbing = False
        else:
            out.append(Group(g.text, g.script, g.supercategory))
            absorbing = False
    return out


def merge_han_hiragana(groups: list[Group]) -> list[Group]:
    """Coalesce adjacent Han and Hiragana letter groups (mixed Japanese words)."""
    out: list[Group] = []
    for g in groups:
        if (
            out
            and g.supercategory == "LM"
            and out[-1].supercategory == "LM"
            and g.script in ("Han", "Hiragana")
            and out[-1].script in ("Han", "Hiragana")
        ):
            prev = out[-1]
            out[-1] = Group(prev.text + g.text, prev.script, prev.supercategory)
        else:
            out.append(Group(g.text, g.script, g.supercategory))
    return out


def split_rule_based(text: str, props: CharProps, spec: PretokenizerSpec) -> list[str]:
    """Full rule pipeline over already-filtered text; returns pretoken strings."""
    groups = group_initial(text, props)
    groups = merge_spaces(groups, spec)
    groups = merge_inherited(groups)
    groups = merge_han_hiragana(groups)
    return [g.text for g in groups]


def split_regex(text: str, compiled) -> list[str]:
    """Split by regex matches; any unmatched gap is kept as its own pretoken
    so the concatenation of pretokens always reproduces the input."""
    pieces: list[str] = []
    pos = 0
    for m in compiled.finditer(text):
        if m.start() > pos:
            pieces.append(text[pos:m.start()])
        if m.group():
            pieces.append(m.group())
        pos = m.end()
    if pos < len(text):
        pieces.append(text[pos:])
    return pieces


class Pretokenizer:
    """Splits documents into pretokens and base-encodes them for one model."""

    def __init__(self, spec: PretokenizerSpec, table: BlockTable, alphabet: Alphabet):
        self.spec = spec
        self.table = table
        self.alphabet = alphabet
        self.props = CharProps.from_block_table(table)
        self._compiled = spec.compiled_pattern() if spec.mode == REGEX else None

    def split(self, text: str) -> list[str]:
        """Pretoken strings of a document, after dropping filtered codepoints."""
        clean = self.props.filter_text(text)
        if not clean:
            return []
        if self.spec.mode == RULE_BASED:
            return split_rule_based(clean, self.props, self.spec)
        return split_regex(clean, self._compiled)

    def encode_pretoken(self, piece: str) -> list[int]:
        if self.alphabet.kind == BYTE:
            return encode_bytes(piece)
        return encode_span(piece, self.table, self.alphabet)

    def pretokenize(self, text: str) -> list[list[int]]:
        """Pretokens of a document as base token id sequences."""
        return [self.encode_pretoken(p) for p in self.split(text)]


def pretokenize(
    text: str,
    spec: PretokenizerSpec,
    table: BlockTable,
    alphabet: Alphabet | None = None,
) -> list[list[int]]:
    """One-shot helper: split ``text`` per ``spec`` and base-encode each pretoken."""
    if alphabet is None:
        alphabet = Alphabet.for_table(table)
    return Pretokenizer(spec, table, alphabet).pretokenize(text)
