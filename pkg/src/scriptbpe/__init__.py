"""Script-aware tokenizer toolkit.

Characters are encoded as (block token, index token) pairs derived from
Unicode script and general-category properties, or as raw UTF-8 bytes; BPE
merge lists are trained over either base, optionally constrained so every
learned token respects character boundaries.
"""

from .bpe import (
    MergeApplier,
    MergeRule,
    TokenShape,
    TrainConfig,
    TrainResult,
    Vocabulary,
    apply,
    merge_legal,
    shape_of,
    train,
)
from .codec import (
    Alphabet,
    EncodedChar,
    decode_bytes,
    decode_tokens,
    encode_bytes,
    encode_char,
    encode_span,
)
from .errors import (
    CorpusError,
    DigestMismatchError,
    DuplicateMergeError,
    FilteredCharacterError,
    MalformedSequenceError,
    ModelFormatError,
    RankGapError,
    ScriptBpeError,
    UCDConfigError,
    UCDParseError,
    UnsupportedVersionError,
    VocabularyError,
)
from .evaluate import (
    CompressionReport,
    VocabAudit,
    audit_vocab,
    compare,
    compression,
)
from .model import MODEL_FORMAT_VERSION, TokenizerModel, load, save, validate_model
from .pretokenize import (
    CL100K_PATTERN,
    O200K_PATTERN,
    PretokenizerSpec,
    Pretokenizer,
    pretokenize,
)
from .tokenizer import Tokenizer, count_pretokens, train_tokenizer
from .ucd import (
    BlockTable,
    CharProps,
    CharRecord,
    build_block_table,
    load_bundled_ucd,
    load_ucd,
    load_ucd_dir,
    render_census,
    supercategory_of,
)

__version__ = "0.1.0"
