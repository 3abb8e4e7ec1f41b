"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class ScriptBpeError(Exception):
    """Base class for all toolkit errors."""


class UCDParseError(ScriptBpeError):
    """A UCD data file line could not be parsed; message carries file:line."""


class UCDConfigError(ScriptBpeError):
    """Inconsistent UCD inputs, e.g. version mismatch between data files."""


class FilteredCharacterError(ScriptBpeError):
    """A filtered codepoint (Cn/Co/Cs) reached a primitive that rejects them."""

    def __init__(self, codepoint: int):
        super().__init__(f"codepoint U+{codepoint:04X} is filtered and has no encoding")
        self.codepoint = codepoint


class MalformedSequenceError(ScriptBpeError):
    """A token id sequence cannot be decoded; `offset` locates the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class VocabularyError(ScriptBpeError):
    """A token id falls outside the model vocabulary."""


class ModelFormatError(ScriptBpeError):
    """Base class for model (de)serialization failures."""


class UnsupportedVersionError(ModelFormatError):
    """Model file declares a format_version this build cannot read."""


class DigestMismatchError(ModelFormatError):
    """Embedded block table does not hash to the recorded digest."""


class RankGapError(ModelFormatError):
    """Merge list is not a gapless rank chain (a pair references an id that
    no prior merge or base token defines)."""


class DuplicateMergeError(ModelFormatError):
    """The same (left, right) pair appears twice in the merge list."""


class CorpusError(ScriptBpeError):
    """Corpus input is missing or unreadable."""
