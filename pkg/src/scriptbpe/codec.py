"""Base encodings: block/index token pairs per character, or raw UTF-8 bytes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import FilteredCharacterError, MalformedSequenceError
from .ucd import BlockTable

SCRIPT = "script"
BYTE = "byte"


@dataclass(frozen=True, slots=True)
class Alphabet:
    """Base token id layout for one encoding.

    Script encoding: block tokens occupy ids [0, block_token_count), index
    tokens the next index_token_count ids.  Byte encoding: ids [0, 256).
    Merge-produced tokens always start at base_size.
    """

    kind: str
    block_token_count: int = 0
    index_token_count: int = 0

    def __post_init__(self):
        if self.kind not in (SCRIPT, BYTE):
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        if self.kind == BYTE and (self.block_token_count or self.index_token_count):
            raise ValueError("byte alphabets have no block/index tokens")

    @classmethod
    def for_table(cls, table: BlockTable) -> "Alphabet":
        return cls(SCRIPT, block_token_count=len(table.blocks), index_token_count=table.threshold)

    @classmethod
    def for_bytes(cls) -> "Alphabet":
        return cls(BYTE)

    @property
    def byte_token_count(self) -> int:
        return 256 if self.kind == BYTE else 0

    @property
    def base_size(self) -> int:
        if self.kind == BYTE:
            return 256
        return self.block_token_count + self.index_token_count

    @property
    def index_base(self) -> int:
        return self.block_token_count

    def is_block_token(self, token_id: int) -> bool:
        return self.kind == SCRIPT and 0 <= token_id < self.block_token_count

    def is_index_token(self, token_id: int) -> bool:
        return self.kind == SCRIPT and self.block_token_count <= token_id < self.base_size


class EncodedChar(NamedTuple):
    block_id: int
    index_id: int


def encode_char(c: str, table: BlockTable, alphabet: Alphabet) -> EncodedChar:
    """Encode one character as its (block token, index token) pair.

    The block token names the sub-block holding the character; the index
    token is its offset inside that sub-block.  Filtered codepoints have no
    encoding and raise; dropping them is the pretokenizer's job.
    """
    cp = ord(c)
    entry = table.char_index.get(cp)
    if entry is None:
        raise FilteredCharacterError(cp)
    block_pos, offset = entry
    return EncodedChar(block_pos, alphabet.index_base + offset)


def encode_span(text: str, table: BlockTable, alphabet: Alphabet) -> list[int]:
    """Encode a filtered text span as a flat block/index id sequence."""
    char_index = table.char_index
    index_base = alphabet.index_base
    ids: list[int] = []
    append = ids.append
    for c in text:
        entry = char_index.get(ord(c))
        if entry is None:
            raise FilteredCharacterError(ord(c))
        append(entry[0])
        append(index_base + entry[1])
    return ids


def decode_tokens(ids: Iterable[int], table: BlockTable, alphabet: Alphabet) -> str:
    """Decode a base-token id sequence back to text.

    The sequence must be a strict alternation of block token then index token,
    with every index valid for its sub-block.
    """
    blocks = table.blocks
    index_base = alphabet.index_base
    base_size = alphabet.base_size
    chars: list[str] = []
    pending_block: int | None = None
    offset = -1
    for offset, token_id in enumerate(ids):
        if token_id < 0 or token_id >= base_size:
            raise MalformedSequenceError(f"token id {token_id} is not a base token", offset)
        if pending_block is None:
            if token_id >= index_base:
                raise MalformedSequenceError(
                    "index token without a preceding block token", offset)
            pending_block = token_id
        else:
            if token_id < index_base:
                raise MalformedSequenceError(
                    "block token where an index token was expected", offset)
            members = blocks[pending_block].members
            position = token_id - index_base
            if position >= len(members):
                raise MalformedSequenceError(
                    f"index {position} exceeds sub-block size {len(members)}", offset)
            chars.append(chr(members[position]))
            pending_block = None
    if pending_block is not None:
        raise MalformedSequenceError("dangling block token at end of sequence", offset)
    return "".join(chars)


def encode_bytes(text: str) -> list[int]:
    """One token per UTF-8 byte."""
    return list(text.encode("utf-8"))


def decode_bytes(ids: Iterable[int]) -> str:
    """Decode byte token ids back to text; ids must form valid UTF-8."""
    data = bytes(ids)
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedSequenceError(f"invalid UTF-8: {exc.reason}", exc.start) from None
