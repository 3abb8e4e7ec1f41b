"""Command-line interface.

Every run is fully determined by flags and input files: rebuilding tables,
retraining, and re-running evaluations on the same inputs produce
byte-identical artifacts.

Exit codes: 0 success, 2 usage error, 3 input error, 4 validation error.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import time
from pathlib import Path

from . import model as model_io
from .bpe import TrainConfig
from .codec import BYTE, SCRIPT
from .errors import CorpusError, ModelFormatError, ScriptBpeError
from .evaluate import (
    audit_vocab,
    compare,
    compression,
    read_corpus,
    render_comparison,
)
from .pretokenize import PretokenizerSpec
from .tokenizer import Tokenizer, train_tokenizer
from .ucd import (
    BlockTable,
    build_block_table,
    bundled_data_dir,
    canonical_json,
    load_ucd_dir,
    render_census,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_VALIDATION = 4

UCD_DIR_ENV = "SCRIPTBPE_UCD_DIR"

logger = logging.getLogger("scriptbpe")


def _resolve_ucd_dir(flag_value: str | None) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(UCD_DIR_ENV)
    if env:
        return Path(env)
    return bundled_data_dir()


def _build_table(args) -> BlockTable:
    if getattr(args, "tables", None):
        import json
        payload = json.loads(Path(args.tables).read_text(encoding="utf-8"))
        return BlockTable.from_payload(payload)
    records = load_ucd_dir(_resolve_ucd_dir(getattr(args, "ucd_dir", None)))
    return build_block_table(records)


def cmd_build_tables(args) -> int:
    records = load_ucd_dir(_resolve_ucd_dir(args.ucd_dir))
    table = build_block_table(records)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(canonical_json(table.to_payload()).encode("utf-8") + b"\n")
    census = render_census(table)
    if args.census:
        Path(args.census).write_text(census + "\n", encoding="utf-8")
    print(census)
    print(f"wrote {out}")
    return EXIT_OK


def _read_train_documents(args) -> list[str]:
    docs = read_corpus(args.corpus)
    if not docs:
        raise CorpusError(f"corpus {args.corpus} contains no documents")
    if args.max_bytes is not None:
        rng = random.Random(args.seed)
        rng.shuffle(docs)
        kept: list[str] = []
        total = 0
        for doc in docs:
            size = len(doc.encode("utf-8"))
            if total + size > args.max_bytes and kept:
                break
            kept.append(doc)
            total += size
        docs = kept
    return docs


def cmd_train(args) -> int:
    spec = PretokenizerSpec.from_name(args.pretok) if not args.pretok_pattern \
        else PretokenizerSpec(mode="regex", pattern=args.pretok_pattern)
    table = _build_table(args)
    docs = _read_train_documents(args)
    config = TrainConfig(
        target_merges=args.merges,
        constrained=args.constrained,
        min_pair_count=args.min_pair_count,
        worker_count=args.workers,
    )
    started = time.perf_counter()
    model, result = train_tokenizer(docs, args.encoding, spec, table, config)
    elapsed = time.perf_counter() - started
    written = model_io.save(model, args.out)
    print(f"merges_achieved={len(result.merges)}")
    print(f"stop_reason={result.reason}")
    print(f"elapsed_seconds={elapsed:.1f}")
    print(f"model_bytes={written}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _iter_input_lines(args):
    if args.input and args.input != "-":
        with open(args.input, encoding="utf-8") as f:
            yield from (line.rstrip("\n") for line in f)
    else:
        yield from (line.rstrip("\n") for line in sys.stdin)


def cmd_encode(args) -> int:
    tokenizer = Tokenizer.from_file(args.model)
    from .evaluate import unescape_document
    for line in _iter_input_lines(args):
        ids = tokenizer.encode(unescape_document(line))
        print(" ".join(map(str, ids)))
    return EXIT_OK


def cmd_decode(args) -> int:
    tokenizer = Tokenizer.from_file(args.model)
    from .evaluate import escape_document
    for line in _iter_input_lines(args):
        ids = [int(tok) for tok in line.split()]
        print(escape_document(tokenizer.decode(ids)))
    return EXIT_OK


def cmd_audit(args) -> int:
    tokenizer = Tokenizer.from_file(args.model)
    audit = audit_vocab(tokenizer)
    for line in audit.summary_lines():
        print(line)
    if args.list_offenders:
        for tid in audit.mixed_ids:
            print(f"mixed_token={tid}")
        for tid in audit.pure_partial_ids:
            print(f"pure_partial_token={tid}")
    return EXIT_OK


def cmd_eval(args) -> int:
    tokenizers = {Path(p).stem: Tokenizer.from_file(p) for p in args.models}
    corpora = {Path(c).stem: c for c in args.corpora}
    if len(args.models) == 1 and len(args.corpora) == 1:
        # single cell: also print the full compression report
        (name, tok), (cname, corpus) = tokenizers.popitem(), corpora.popitem()
        report = compression(corpus, tok, corpus_id=cname)
        for line in report.summary_lines():
            print(line)
        tokenizers, corpora = {name: tok}, {cname: corpus}
    table = compare(tokenizers, corpora)
    print(render_comparison(table))
    for line in table.summary_lines():
        print(line)
    return EXIT_OK


def cmd_inspect_blocks(args) -> int:
    if args.model:
        model = model_io.load(args.model)
        table = model.block_table
    else:
        table = _build_table(args)
    print(render_census(table, top=args.top))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scriptbpe",
        description="Train, inspect and evaluate script-aware BPE tokenizers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tables", help="ingest UCD data and write the block table")
    p.add_argument("--ucd-dir", help=f"directory with Scripts.txt and "
                   f"DerivedGeneralCategory.txt (default: ${UCD_DIR_ENV} or bundled data)")
    p.add_argument("--out", required=True, help="output block table JSON path")
    p.add_argument("--census", help="also write the census report to this path")
    p.set_defaults(func=cmd_build_tables)

    p = sub.add_parser("train", help="train a tokenizer model on a corpus")
    p.add_argument("--corpus", required=True, help="corpus file (one document per line) or directory")
    p.add_argument("--encoding", choices=[SCRIPT, BYTE], default=SCRIPT)
    p.add_argument("--pretok", default="rule",
                   help="pretokenizer: rule, cl100k, or o200k (default: rule)")
    p.add_argument("--pretok-pattern", help="custom regex pretokenizer pattern (overrides --pretok)")
    p.add_argument("--merges", type=int, required=True, help="target merge count")
    p.add_argument("--constrained", action="store_true",
                   help="only allow merges that respect character boundaries")
    p.add_argument("--min-pair-count", type=int, default=2)
    p.add_argument("-w", "--workers", type=int, default=1)
    p.add_argument("--max-bytes", type=int, help="subsample the corpus to about this many bytes")
    p.add_argument("--seed", type=int, default=0, help="subsampling seed")
    p.add_argument("--ucd-dir")
    p.add_argument("--tables", help="use a prebuilt block table JSON instead of UCD ingestion")
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="encode documents (one per line) to token ids")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="input file (default: stdin)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode token id lines back to text")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="input file (default: stdin)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("audit", help="classify every learned token's shape")
    p.add_argument("--model", required=True)
    p.add_argument("--list-offenders", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("eval", help="compare models' compression over corpora")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--corpora", nargs="+", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect-blocks", help="print the block census")
    p.add_argument("--model", help="read the table embedded in this model")
    p.add_argument("--tables", help="read a block table JSON")
    p.add_argument("--ucd-dir")
    p.add_argument("--top", type=int, help="only show the N largest blocks")
    p.set_defaults(func=cmd_inspect_blocks)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ModelFormatError, ScriptBpeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
