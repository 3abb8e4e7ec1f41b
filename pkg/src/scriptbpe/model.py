"""Tokenizer model (de)serialization.

Models are canonical JSON: fixed key order, no insignificant whitespace,
UTF-8.  The block table is embedded (never referenced) so a model file is
self-contained and survives UCD updates; its digest is recorded and checked.
Merges are stored as (left, right) pairs only; ranks and result ids follow
from position, which makes rank gaps and duplicate pairs the only possible
merge-list corruptions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

from .codec import BYTE, SCRIPT, Alphabet
from .errors import (
    DigestMismatchError,
    DuplicateMergeError,
    ModelFormatError,
    RankGapError,
    UnsupportedVersionError,
)
from .pretokenize import PretokenizerSpec
from .ucd import BlockTable, canonical_json

MODEL_FORMAT_VERSION = 1


@dataclass
class TokenizerModel:
    """Everything needed to reproduce a tokenizer: encoding, pretokenizer,
    alphabet, embedded block table, and the ranked merge list."""

    encoding_kind: str
    ucd_version: str
    pretokenizer: PretokenizerSpec
    alphabet: Alphabet
    block_table: BlockTable
    merges: list[tuple[int, int]]
    constrained: bool
    format_version: int = MODEL_FORMAT_VERSION
    block_table_digest: str = field(default="")

    def __post_init__(self):
        if not self.block_table_digest:
            self.block_table_digest = self.block_table.digest()

    @property
    def vocab_size(self) -> int:
        return self.alphabet.base_size + len(self.merges)


def validate_model(model: TokenizerModel) -> None:
    """Check every model invariant; raises a ModelFormatError subclass."""
    if model.format_version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"format_version {model.format_version} not supported "
            f"(this build reads {MODEL_FORMAT_VERSION})")
    if model.encoding_kind not in (SCRIPT, BYTE):
        raise ModelFormatError(f"unknown encoding kind {model.encoding_kind!r}")
    if model.block_table_digest != model.block_table.digest():
        raise DigestMismatchError(
            "embedded block table does not match recorded digest")
    alphabet = model.alphabet
    if alphabet.kind != model.encoding_kind:
        raise ModelFormatError("alphabet kind disagrees with encoding kind")
    if alphabet.kind == SCRIPT:
        # the alphabet census must match the embedded table
        if alphabet.block_token_count != len(model.block_table.blocks):
            raise ModelFormatError(
                f"alphabet lists {alphabet.block_token_count} block tokens, "
                f"table has {len(model.block_table.blocks)}")
        if alphabet.index_token_count != model.block_table.threshold:
            raise ModelFormatError(
                f"alphabet lists {alphabet.index_token_count} index tokens, "
                f"table threshold is {model.block_table.threshold}")
    base = alphabet.base_size
    seen: set[tuple[int, int]] = set()
    for rank, pair in enumerate(model.merges):
        left, right = pair
        limit = base + rank  # ids defined so far
        if not (0 <= left < limit and 0 <= right < limit):
            raise RankGapError(
                f"merge {rank} references id {max(left, right)} but only "
                f"{limit} ids are defined at that rank")
        key = (left, right)
        if key in seen:
            raise DuplicateMergeError(f"merge pair {key} appears twice")
        seen.add(key)


def model_payload(model: TokenizerModel) -> dict:
    return {
        "format_version": model.format_version,
        "encoding_kind": model.encoding_kind,
        "ucd_version": model.ucd_version,
        "constrained": model.constrained,
        "pretokenizer": {
            "mode": model.pretokenizer.mode,
            "pattern": model.pretokenizer.pattern,
            "space_merge_scripts": list(model.pretokenizer.space_merge_scripts),
        },
        "alphabet": {
            "kind": model.alphabet.kind,
            "block_token_count": model.alphabet.block_token_count,
            "index_token_count": model.alphabet.index_token_count,
        },
        "block_table": model.block_table.to_payload(),
        "block_table_digest": model.block_table_digest,
        "merges": [[left, right] for left, right in model.merges],
    }


def model_bytes(model: TokenizerModel) -> bytes:
    """The canonical serialization; a pure function of model content."""
    return (canonical_json(model_payload(model)) + "\n").encode("utf-8")


def save(model: TokenizerModel, sink: str | Path | BinaryIO) -> int:
    """Validate and write the model; returns bytes written."""
    validate_model(model)
    data = model_bytes(model)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return len(data)


def _payload_to_model(payload: dict) -> TokenizerModel:
    try:
        version = payload["format_version"]
    except (TypeError, KeyError):
        raise ModelFormatError("model file has no format_version field") from None
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"format_version {version} not supported (this build reads "
            f"{MODEL_FORMAT_VERSION})")
    try:
        pretok = payload["pretokenizer"]
        spec = PretokenizerSpec(
            mode=pretok["mode"],
            pattern=pretok["pattern"],
            space_merge_scripts=tuple(pretok["space_merge_scripts"]),
        )
        alphabet_data = payload["alphabet"]
        alphabet = Alphabet(
            kind=alphabet_data["kind"],
            block_token_count=alphabet_data["block_token_count"],
            index_token_count=alphabet_data["index_token_count"],
        )
        model = TokenizerModel(
            encoding_kind=payload["encoding_kind"],
            ucd_version=payload["ucd_version"],
            pretokenizer=spec,
            alphabet=alphabet,
            block_table=BlockTable.from_payload(payload["block_table"]),
            merges=[(left, right) for left, right in payload["merges"]],
            constrained=payload["constrained"],
            format_version=version,
            block_table_digest=payload["block_table_digest"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None
    validate_model(model)
    return model


def load(source: str | Path | BinaryIO) -> TokenizerModel:
    """Read, parse and fully validate a model file."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"model file is not canonical JSON: {exc}") from None
    return _payload_to_model(payload)
