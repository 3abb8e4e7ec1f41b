"""End-to-end tokenizer runtime and training orchestration."""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterable, Iterator

from .bpe import MergeApplier, TokenShape, TrainConfig, TrainResult, Vocabulary, train
from .codec import BYTE, SCRIPT, Alphabet, decode_bytes, decode_tokens
from .errors import VocabularyError
from .model import TokenizerModel
from .pretokenize import Pretokenizer, PretokenizerSpec
from .ucd import BlockTable


class Tokenizer:
    """Runtime wrapper around a TokenizerModel: encode, decode, audit."""

    def __init__(self, model: TokenizerModel):
        self.model = model
        self.table = model.block_table
        self.alphabet = model.alphabet
        self.pretokenizer = Pretokenizer(model.pretokenizer, self.table, self.alphabet)
        self.applier = MergeApplier(model.merges, self.alphabet.base_size)
        self._vocab: Vocabulary | None = None

    @classmethod
    def from_file(cls, path) -> "Tokenizer":
        from . import model as model_io
        return cls(model_io.load(path))

    @property
    def vocab(self) -> Vocabulary:
        """Full vocabulary with per-token shapes; built on first use."""
        if self._vocab is None:
            self._vocab = Vocabulary.from_merges(
                self.alphabet, self.model.merges, self.table)
        return self._vocab

    @property
    def vocab_size(self) -> int:
        return self.model.vocab_size

    def pretoken_strings(self, text: str) -> list[str]:
        return self.pretokenizer.split(text)

    def base_encode(self, text: str) -> list[list[int]]:
        """Pretokens as base token id sequences (no merges applied)."""
        return self.pretokenizer.pretokenize(text)

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        apply_merges = self.applier.apply
        for pretoken in self.pretokenizer.pretokenize(text):
            ids.extend(apply_merges(pretoken))
        return ids

    def expand(self, ids: Iterable[int]) -> list[int]:
        """Expand any token ids (base or merged) to base token ids."""
        vocab = self.vocab
        seqs = vocab.base_seqs
        size = vocab.size
        out: list[int] = []
        for t in ids:
            if not 0 <= t < size:
                raise VocabularyError(f"token id {t} outside model vocabulary")
            out.extend(seqs[t])
        return out

    def decode(self, ids: Iterable[int]) -> str:
        base_ids = self.expand(ids)
        if self.alphabet.kind == BYTE:
            return decode_bytes(base_ids)
        return decode_tokens(base_ids, self.table, self.alphabet)

    def shape_of(self, token_id: int) -> TokenShape:
        return self.vocab.shape(token_id)


def _chunked(docs: Iterable[str], size: int) -> Iterator[list[str]]:
    it = iter(docs)
    while chunk := list(itertools.islice(it, size)):
        yield chunk


_WORKER_PRETOKENIZER: Pretokenizer | None = None


def _pool_init(spec: PretokenizerSpec, table: BlockTable, alphabet: Alphabet) -> None:
    global _WORKER_PRETOKENIZER
    _WORKER_PRETOKENIZER = Pretokenizer(spec, table, alphabet)


def _count_chunk(docs: list[str]) -> Counter:
    counts: Counter = Counter()
    pretokenize = _WORKER_PRETOKENIZER.pretokenize
    for doc in docs:
        for pretoken in pretokenize(doc):
            counts[tuple(pretoken)] += 1
    return counts


def count_pretokens(
    docs: Iterable[str],
    spec: PretokenizerSpec,
    table: BlockTable,
    alphabet: Alphabet,
    workers: int = 1,
    chunk_size: int = 512,
) -> Counter:
    """Pretoken-type frequency table over a document stream.

    With several workers, documents are pretokenized in parallel over
    fixed-order chunks and the per-chunk counters are summed in chunk order,
    so the result (values and iteration order) is identical for any worker
    count.
    """
    if workers <= 1:
        _pool_init(spec, table, alphabet)
        try:
            return _count_chunk(list(docs))
        finally:
            globals()["_WORKER_PRETOKENIZER"] = None
    import multiprocessing as mp

    total: Counter = Counter()
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(workers, initializer=_pool_init, initargs=(spec, table, alphabet)) as pool:
        for chunk_counts in pool.imap(_count_chunk, _chunked(docs, chunk_size)):
            total.update(chunk_counts)
    return total


def train_tokenizer(
    docs: Iterable[str],
    encoding_kind: str,
    spec: PretokenizerSpec,
    table: BlockTable,
    config: TrainConfig,
    log_every: int = 2000,
) -> tuple[TokenizerModel, TrainResult]:
    """Full training pipeline: pretokenize, count, train, assemble the model."""
    alphabet = Alphabet.for_table(table) if encoding_kind == SCRIPT else Alphabet.for_bytes()
    corpus = count_pretokens(docs, spec, table, alphabet, workers=config.worker_count)
    result = train(corpus, config, alphabet,
                   table if encoding_kind == SCRIPT else None,
                   log_every=log_every)
    model = TokenizerModel(
        encoding_kind=encoding_kind,
        ucd_version=table.ucd_version,
        pretokenizer=spec,
        alphabet=alphabet,
        block_table=table,
        merges=[(rule.left, rule.right) for rule in result.merges],
        constrained=config.constrained,
    )
    return model, result
