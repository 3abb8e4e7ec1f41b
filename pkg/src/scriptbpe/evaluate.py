"""Evaluation: tokens-per-character compression, vocabulary audits, comparisons.

Corpora are UTF-8 text: either one document per line (newlines inside a
document escaped as ``\\n``) or a directory with one document per file.
Character counts exclude filtered codepoints, and the same filtering applies
to every tokenizer being measured.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .bpe import COMPLETE, MIXED
from .codec import BYTE
from .errors import CorpusError
from .tokenizer import Tokenizer

# Relative-degradation highlight thresholds, in percent.
DEGRADATION_THRESHOLDS = (5.0, 10.0, 20.0)


def escape_document(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n")


def unescape_document(line: str) -> str:
    out: list[str] = []
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c == "\\" and i + 1 < n:
            nxt = line[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(c)
        i += 1
    return "".join(out)


@dataclass
class SkippedDocument:
    index: int
    byte_offset: int
    reason: str


def iter_corpus(path: str | Path) -> Iterator[tuple[int, str | None, SkippedDocument | None]]:
    """Yield (index, document, skip) triples; exactly one of document/skip set.

    Invalid UTF-8 never aborts the run: the affected document is skipped and
    reported with its byte offset.
    """
    path = Path(path)
    if path.is_dir():
        for index, child in enumerate(sorted(p for p in path.iterdir() if p.is_file())):
            raw = child.read_bytes()
            try:
                yield index, raw.decode("utf-8"), None
            except UnicodeDecodeError as exc:
                yield index, None, SkippedDocument(index, exc.start, f"{child.name}: {exc.reason}")
        return
    if not path.is_file():
        raise CorpusError(f"corpus not found: {path}")
    with path.open("rb") as f:
        for index, raw_line in enumerate(f):
            raw_line = raw_line.rstrip(b"\n")
            try:
                yield index, unescape_document(raw_line.decode("utf-8")), None
            except UnicodeDecodeError as exc:
                yield index, None, SkippedDocument(index, exc.start, exc.reason)


def read_corpus(path: str | Path) -> list[str]:
    """All decodable documents of a corpus, in order."""
    return [doc for _, doc, skip in iter_corpus(path) if skip is None]


@dataclass
class CompressionReport:
    corpus_id: str
    char_count: int
    initial_token_count: int
    final_token_count: int
    skipped: list[SkippedDocument] = field(default_factory=list)

    @property
    def initial_tpc(self) -> float:
        return self.initial_token_count / self.char_count

    @property
    def final_tpc(self) -> float:
        return self.final_token_count / self.char_count

    def summary_lines(self) -> list[str]:
        return [
            f"corpus={self.corpus_id}",
            f"char_count={self.char_count}",
            f"initial_token_count={self.initial_token_count}",
            f"final_token_count={self.final_token_count}",
            f"initial_tpc={self.initial_tpc:.6f}",
            f"final_tpc={self.final_tpc:.6f}",
            f"skipped_documents={len(self.skipped)}",
        ]


def compression(
    corpus: str | Path | Iterable[str],
    tokenizer: Tokenizer,
    corpus_id: str | None = None,
) -> CompressionReport:
    """Exact token counts before and after merges over a corpus.

    Documents are the unit of pretokenization; pretokens never span
    documents.  Counting is done per unique pretoken string, so results are
    independent of document order and chunking.
    """
    if isinstance(corpus, (str, Path)):
        corpus_id = corpus_id or str(corpus)
        documents = iter_corpus(corpus)
    else:
        corpus_id = corpus_id or "<memory>"
        documents = ((i, doc, None) for i, doc in enumerate(corpus))

    skipped: list[SkippedDocument] = []
    char_count = 0
    pretoken_counts: Counter[str] = Counter()
    filter_text = tokenizer.pretokenizer.props.filter_text
    split = tokenizer.pretokenizer.split
    for _, doc, skip in documents:
        if skip is not None:
            skipped.append(skip)
            continue
        clean = filter_text(doc)
        char_count += len(clean)
        for piece in split(clean):
            pretoken_counts[piece] += 1

    if char_count == 0:
        raise CorpusError(f"corpus {corpus_id!r} has no encodable characters")

    initial = 0
    final = 0
    encode_pretoken = tokenizer.pretokenizer.encode_pretoken
    apply_merges = tokenizer.applier.apply
    for piece, count in pretoken_counts.items():
        base_ids = encode_pretoken(piece)
        initial += len(base_ids) * count
        final += len(apply_merges(base_ids)) * count
    return CompressionReport(corpus_id, char_count, initial, final, skipped)


@dataclass
class VocabAudit:
    """Shape classification of every merge-produced token."""

    complete_count: int
    pure_partial_count: int
    mixed_count: int
    pure_partial_ids: list[int]
    mixed_ids: list[int]

    @property
    def non_base_total(self) -> int:
        return self.complete_count + self.pure_partial_count + self.mixed_count

    def summary_lines(self) -> list[str]:
        return [
            f"complete={self.complete_count}",
            f"pure_partial={self.pure_partial_count}",
            f"mixed={self.mixed_count}",
        ]


def audit_vocab(tokenizer: Tokenizer) -> VocabAudit:
    """Classify all non-base tokens as complete, pure-partial, or mixed.

    The two problem classes are reported separately: mixed tokens splice
    partial characters onto whole ones, while pure partials (byte-mode
    character prefixes) are the building blocks multi-byte characters need.
    """
    vocab = tokenizer.vocab
    complete = 0
    pure_partial_ids: list[int] = []
    mixed_ids: list[int] = []
    for token_id in range(vocab.base_size, vocab.size):
        shape = vocab.shape(token_id)
        if shape.cls == COMPLETE:
            complete += 1
        elif shape.cls == MIXED:
            mixed_ids.append(token_id)
        else:
            pure_partial_ids.append(token_id)
    return VocabAudit(complete, len(pure_partial_ids), len(mixed_ids),
                      pure_partial_ids, mixed_ids)


@dataclass
class ComparisonCell:
    final_tpc: float
    is_best: bool
    degradation_pct: float  # relative to the row's best

    @property
    def flag(self) -> str:
        if self.is_best:
            return "best"
        for threshold in reversed(DEGRADATION_THRESHOLDS):
            if self.degradation_pct > threshold:
                return f">{threshold:.0f}%"
        return ""


@dataclass
class ComparisonTable:
    model_names: list[str]
    corpus_names: list[str]
    cells: list[list[ComparisonCell]]  # [corpus][model]

    def summary_lines(self) -> list[str]:
        lines = []
        for corpus, row in zip(self.corpus_names, self.cells):
            for name, cell in zip(self.model_names, row):
                lines.append(f"final_tpc[{corpus}][{name}]={cell.final_tpc:.6f}")
        return lines


def compare(
    tokenizers: dict[str, Tokenizer],
    corpora: dict[str, str | Path | list[str]],
) -> ComparisonTable:
    """Final tokens/char for every tokenizer on every corpus, best-per-row
    marked and degradations relative to the best computed."""
    if not tokenizers or not corpora:
        raise ValueError("compare needs at least one tokenizer and one corpus")
    model_names = list(tokenizers)
    corpus_names = list(corpora)
    cells: list[list[ComparisonCell]] = []
    for corpus_name in corpus_names:
        source = corpora[corpus_name]
        tpcs = [
            compression(source, tokenizers[name], corpus_id=corpus_name).final_tpc
            for name in model_names
        ]
        best = min(tpcs)
        row = [
            ComparisonCell(
                final_tpc=tpc,
                is_best=tpc == best,
                degradation_pct=(tpc - best) / best * 100.0 if best else 0.0,
            )
            for tpc in tpcs
        ]
        cells.append(row)
    return ComparisonTable(model_names, corpus_names, cells)


def render_comparison(table: ComparisonTable) -> str:
    name_width = max(len(n) for n in table.corpus_names + ["corpus"])
    col_width = max([len(n) for n in table.model_names] + [14])
    header = f"{'corpus':<{name_width}}  " + "  ".join(
        f"{name:>{col_width}}" for name in table.model_names)
    lines = [header]
    for corpus, row in zip(table.corpus_names, table.cells):
        rendered = []
        for cell in row:
            mark = f" {cell.flag}" if cell.flag else ""
            rendered.append(f"{cell.final_tpc:.4f}{mark}".rjust(col_width))
        lines.append(f"{corpus:<{name_width}}  " + "  ".join(rendered))
    return "\n".join(lines)
