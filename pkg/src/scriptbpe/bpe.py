"""BPE training and inference with optional character-integrity constraints.

Tokens are classified by the shape of their decoded base sequence.  In byte
mode a token is COMPLETE (whole characters), HEAD_PARTIAL (a proper prefix of
one character's UTF-8, anchored at the character start), FRAGMENT (partial
bytes not so anchored) or MIXED (whole characters plus partial bytes).  In
script mode the base tokens are BLOCK_ONLY/INDEX_ONLY and merged tokens are
COMPLETE, FRAGMENT or MIXED analogously.

Constrained training only merges pairs whose result stays character-clean:
complete+complete, the block+index pair that forms one character, or the
single byte that extends a character prefix strictly left to right.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .codec import BYTE, SCRIPT, Alphabet
from .errors import VocabularyError
from .ucd import BlockTable

logger = logging.getLogger(__name__)

# Shape classes.
COMPLETE = "complete"
HEAD_PARTIAL = "head_partial"
BLOCK_ONLY = "block_only"
INDEX_ONLY = "index_only"
MIXED = "mixed"
FRAGMENT = "fragment"


@dataclass(frozen=True, slots=True)
class TokenShape:
    cls: str
    char_count: int
    # Byte mode: length in bytes of the partial material (for HEAD_PARTIAL and
    # FRAGMENT, the whole token; for MIXED, the trailing incomplete prefix).
    trailing_partial_len: int = 0

    @property
    def is_pure_partial(self) -> bool:
        return self.cls in (HEAD_PARTIAL, FRAGMENT, BLOCK_ONLY, INDEX_ONLY)


@dataclass(frozen=True, slots=True)
class MergeRule:
    left: int
    right: int
    result: int
    rank: int


@dataclass(frozen=True)
class TrainConfig:
    target_merges: int
    constrained: bool = False
    min_pair_count: int = 2
    worker_count: int = 1

    def __post_init__(self):
        if self.target_merges < 0:
            raise ValueError("target_merges must be >= 0")
        if self.min_pair_count < 1:
            raise ValueError("min_pair_count must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


# ---------------------------------------------------------------------------
# UTF-8 structure

def _utf8_len(lead: int) -> int:
    """Encoded length implied by a lead byte, 0 if the byte can't lead."""
    if lead < 0x80:
        return 1
    if 0xC2 <= lead <= 0xDF:
        return 2
    if 0xE0 <= lead <= 0xEF:
        return 3
    if 0xF0 <= lead <= 0xF4:
        return 4
    return 0


def _second_byte_range(lead: int) -> tuple[int, int]:
    if lead == 0xE0:
        return 0xA0, 0xBF
    if lead == 0xED:
        return 0x80, 0x9F
    if lead == 0xF0:
        return 0x90, 0xBF
    if lead == 0xF4:
        return 0x80, 0x8F
    return 0x80, 0xBF


def _scan_utf8(bs: bytes, i: int) -> tuple[str, int]:
    """Classify the unit starting at bs[i]: ('char'|'prefix'|'bad', consumed)."""
    need = _utf8_len(bs[i])
    if need == 0:
        return "bad", 1
    if need == 1:
        return "char", 1
    avail = len(bs) - i
    for k in range(1, need):
        if k >= avail:
            return "prefix", avail
        lo, hi = _second_byte_range(bs[i]) if k == 1 else (0x80, 0xBF)
        if not lo <= bs[i + k] <= hi:
            return "bad", 1
    return "char", need


def is_valid_utf8_start(bs: bytes) -> bool:
    """True if bs is one complete character or a proper prefix of one."""
    kind, consumed = _scan_utf8(bs, 0)
    return kind in ("char", "prefix") and consumed == len(bs)


def classify_bytes(bs: bytes) -> TokenShape:
    """Shape of a byte-mode token's decoded byte sequence."""
    chars = 0
    partial_units = 0
    trailing_prefix = 0
    anchored_prefix = False
    i = 0
    n = len(bs)
    while i < n:
        kind, consumed = _scan_utf8(bs, i)
        if kind == "char":
            chars += 1
            trailing_prefix = 0
        elif kind == "prefix":
            partial_units += 1
            trailing_prefix = consumed
            anchored_prefix = i == 0
        else:
            partial_units += 1
            trailing_prefix = 0
        i += consumed
    if partial_units == 0:
        return TokenShape(COMPLETE, chars)
    if chars > 0:
        return TokenShape(MIXED, chars, trailing_prefix)
    if partial_units == 1 and anchored_prefix and trailing_prefix == n:
        return TokenShape(HEAD_PARTIAL, 0, n)
    return TokenShape(FRAGMENT, 0, n)


def classify_script_ids(ids: tuple[int, ...], alphabet: Alphabet,
                        subblock_sizes: list[int]) -> TokenShape:
    """Shape of a script-mode token's decoded base id sequence."""
    index_base = alphabet.index_base
    base_size = alphabet.base_size
    chars = 0
    partial = 0
    i = 0
    n = len(ids)
    while i < n:
        t = ids[i]
        if (
            t < index_base
            and i + 1 < n
            and index_base <= ids[i + 1] < base_size
            and ids[i + 1] - index_base < subblock_sizes[t]
        ):
            chars += 1
            i += 2
        else:
            partial += 1
            i += 1
    if partial == 0:
        return TokenShape(COMPLETE, chars)
    if chars > 0:
        return TokenShape(MIXED, chars)
    if n == 1:
        return TokenShape(BLOCK_ONLY if ids[0] < index_base else INDEX_ONLY, 0)
    return TokenShape(FRAGMENT, 0)


# ---------------------------------------------------------------------------
# Vocabulary

class Vocabulary:
    """Base alphabet plus merge-produced tokens, with per-token shapes."""

    def __init__(self, alphabet: Alphabet, table: BlockTable | None = None):
        if alphabet.kind == SCRIPT and table is None:
            raise ValueError("script vocabularies need the block table for shapes")
        self.alphabet = alphabet
        self.table = table
        self._subblock_sizes = table.block_sizes() if table is not None else []
        base = alphabet.base_size
        self.base_seqs: list[tuple[int, ...]] = [(i,) for i in range(base)]
        if alphabet.kind == BYTE:
            self.shapes = [classify_bytes(bytes([i])) for i in range(256)]
        else:
            self.shapes = [
                TokenShape(BLOCK_ONLY if i < alphabet.index_base else INDEX_ONLY, 0)
                for i in range(base)
            ]
        self.merges: list[MergeRule] = []
        self._pair_to_result: dict[tuple[int, int], int] = {}

    @property
    def size(self) -> int:
        return len(self.base_seqs)

    @property
    def base_size(self) -> int:
        return self.alphabet.base_size

    def _check_id(self, token_id: int) -> None:
        if not 0 <= token_id < self.size:
            raise VocabularyError(f"token id {token_id} outside vocabulary of {self.size}")

    def shape(self, token_id: int) -> TokenShape:
        self._check_id(token_id)
        return self.shapes[token_id]

    def base_sequence(self, token_id: int) -> tuple[int, ...]:
        self._check_id(token_id)
        return self.base_seqs[token_id]

    def add_merge(self, left: int, right: int) -> int:
        self._check_id(left)
        self._check_id(right)
        if (left, right) in self._pair_to_result:
            raise ValueError(f"merge pair ({left}, {right}) already exists")
        result = self.size
        seq = self.base_seqs[left] + self.base_seqs[right]
        self.base_seqs.append(seq)
        if self.alphabet.kind == BYTE:
            self.shapes.append(classify_bytes(bytes(seq)))
        else:
            self.shapes.append(classify_script_ids(seq, self.alphabet, self._subblock_sizes))
        rule = MergeRule(left, right, result, len(self.merges))
        self.merges.append(rule)
        self._pair_to_result[(left, right)] = result
        return result

    def legal_pair(self, left: int, right: int, constrained: bool) -> bool:
        """Shape-level legality plus the cheap content checks shapes can't see."""
        if not constrained:
            return True
        ls, rs = self.shapes[left], self.shapes[right]
        if not merge_legal(ls, rs, constrained, self.alphabet.kind):
            return False
        if self.alphabet.kind == SCRIPT:
            if ls.cls == BLOCK_ONLY:
                # the index position must exist in the block for the pair to
                # denote a character
                return right - self.alphabet.index_base < self._subblock_sizes[left]
            return True
        if ls.cls == HEAD_PARTIAL:
            combined = bytes(self.base_seqs[left] + self.base_seqs[right])
            return is_valid_utf8_start(combined)
        return True

    @classmethod
    def from_merges(cls, alphabet: Alphabet, merges: Iterable[tuple[int, int]],
                    table: BlockTable | None = None) -> "Vocabulary":
        vocab = cls(alphabet, table)
        for left, right in merges:
            vocab.add_merge(left, right)
        return vocab


def merge_legal(left: TokenShape, right: TokenShape, constrained: bool, kind: str) -> bool:
    """Whether two adjacent tokens of these shapes may merge.

    Unconstrained mode allows everything.  Constrained script mode allows
    complete+complete and the block+index pair; constrained byte mode allows
    complete+complete and extending a character prefix by one byte.
    """
    if not constrained:
        return True
    if left.cls == COMPLETE and right.cls == COMPLETE:
        return True
    if kind == SCRIPT:
        return left.cls == BLOCK_ONLY and right.cls == INDEX_ONLY
    return (
        left.cls == HEAD_PARTIAL
        and right.cls == FRAGMENT
        and right.trailing_partial_len == 1
    )


def shape_of(token_id: int, vocab: Vocabulary) -> TokenShape:
    """Shape of any vocabulary token, base or merged."""
    return vocab.shape(token_id)


# ---------------------------------------------------------------------------
# Training

@dataclass
class TrainResult:
    merges: list[MergeRule]
    vocab: Vocabulary
    reason: str                      # "target_reached" | "exhausted" | "below_min_count"
    selected_counts: list[int] = field(default_factory=list)   # pair count at selection
    replaced_counts: list[int] = field(default_factory=list)   # occurrences rewritten

    @property
    def stopped_early(self) -> bool:
        return self.reason != "target_reached"


def _find_pair_positions(w: list[int], a: int, b: int) -> list[int]:
    """Leftmost-first non-overlapping occurrences of the pair (a, b)."""
    positions: list[int] = []
    i = 0
    limit = len(w) - 1
    while i < limit:
        try:
            i = w.index(a, i, limit)
        except ValueError:
            break
        if w[i + 1] == b:
            positions.append(i)
            i += 2
        else:
            i += 1
    return positions


def _splice(w: list[int], positions: list[int], z: int) -> list[int]:
    out: list[int] = []
    last = 0
    for p in positions:
        out.extend(w[last:p])
        out.append(z)
        last = p + 2
    out.extend(w[last:])
    return out


def _pair_deltas(
    w: list[int], positions: list[int], z: int
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Adjacency pairs destroyed/created by splicing, each counted exactly once.

    Boundary pairs between two back-to-back occurrences are attributed to the
    left occurrence, which is what makes the counts exact for runs like the
    pair (a, a) inside "aaaa".
    """
    n = len(w)
    removed: list[tuple[int, int]] = []
    added: list[tuple[int, int]] = []
    prev = -10
    for k, p in enumerate(positions):
        if p > 0:
            if p - 2 != prev:
                removed.append((w[p - 1], w[p]))
                added.append((w[p - 1], z))
            # else: the boundary with the previous occurrence was already
            # handled as its right-side pair
        removed.append((w[p], w[p + 1]))
        if p + 2 < n:
            removed.append((w[p + 1], w[p + 2]))
            next_is_occurrence = k + 1 < len(positions) and positions[k + 1] == p + 2
            added.append((z, z) if next_is_occurrence else (z, w[p + 2]))
        prev = p
    return removed, added


def train(
    corpus: Mapping[tuple[int, ...], int],
    config: TrainConfig,
    alphabet: Alphabet,
    table: BlockTable | None = None,
    log_every: int = 2000,
) -> TrainResult:
    """Train a merge list over a pretoken-type frequency table.

    Repeatedly merges the legal adjacent pair with the highest total count,
    breaking ties toward the smaller (left, right) id tuple.  Stops at
    ``target_merges``, or earlier when no legal pair reaches
    ``min_pair_count`` (a normal, reported outcome).
    """
    vocab = Vocabulary(alphabet, table)
    base_size = alphabet.base_size
    constrained = config.constrained

    words: list[list[int]] = []
    wcounts: list[int] = []
    for toks, cnt in corpus.items():
        if cnt <= 0 or not toks:
            continue
        words.append(list(toks))
        wcounts.append(cnt)

    legal_cache: dict[tuple[int, int], bool] = {}

    def is_legal(pair: tuple[int, int]) -> bool:
        cached = legal_cache.get(pair)
        if cached is None:
            cached = vocab.legal_pair(pair[0], pair[1], constrained)
            legal_cache[pair] = cached
        return cached

    pair_counts: dict[tuple[int, int], int] = {}
    pair_sites: dict[tuple[int, int], set[int]] = {}
    for wi, w in enumerate(words):
        cnt = wcounts[wi]
        if max(w) >= base_size or min(w) < 0:
            raise VocabularyError("corpus pretokens must be base-encoded")
        for i in range(len(w) - 1):
            pair = (w[i], w[i + 1])
            if is_legal(pair):
                pair_counts[pair] = pair_counts.get(pair, 0) + cnt
                site = pair_sites.get(pair)
                if site is None:
                    pair_sites[pair] = {wi}
                else:
                    site.add(wi)

    heap = [(-count, left, right) for (left, right), count in pair_counts.items()]
    heapq.heapify(heap)

    result = TrainResult(merges=vocab.merges, vocab=vocab, reason="target_reached")

    while len(vocab.merges) < config.target_merges:
        # pop stale entries, re-pushing corrected counts (counts only decrease
        # between a pair's creation and its selection)
        while heap:
            neg_count, left, right = heap[0]
            current = pair_counts.get((left, right), 0)
            if current == -neg_count:
                break
            heapq.heappop(heap)
            if current > 0:
                heapq.heappush(heap, (-current, left, right))
        if not heap:
            result.reason = "exhausted"
            break
        neg_count, a, b = heap[0]
        count = -neg_count
        if count < config.min_pair_count:
            result.reason = "below_min_count"
            break
        heapq.heappop(heap)

        z = vocab.add_merge(a, b)
        pair = (a, b)
        sites = pair_sites.pop(pair, set())
        pair_counts.pop(pair, None)

        new_pair_counts: dict[tuple[int, int], int] = {}
        replaced = 0
        for wi in sites:
            w = words[wi]
            positions = _find_pair_positions(w, a, b)
            if not positions:
                continue  # stale site: the pair was destroyed by earlier rewrites
            cnt = wcounts[wi]
            replaced += len(positions) * cnt
            removed, added = _pair_deltas(w, positions, z)
            for pr in removed:
                current = pair_counts.get(pr)
                if current is not None:
                    current -= cnt
                    if current > 0:
                        pair_counts[pr] = current
                    else:
                        del pair_counts[pr]
            for pr in added:
                if is_legal(pr):
                    new_pair_counts[pr] = new_pair_counts.get(pr, 0) + cnt
                    site = pair_sites.get(pr)
                    if site is None:
                        pair_sites[pr] = {wi}
                    else:
                        site.add(wi)
            words[wi] = _splice(w, positions, z)

        for pr, cnt in new_pair_counts.items():
            pair_counts[pr] = pair_counts.get(pr, 0) + cnt
            heapq.heappush(heap, (-pair_counts[pr], pr[0], pr[1]))

        result.selected_counts.append(count)
        result.replaced_counts.append(replaced)
        rank = len(vocab.merges) - 1
        if log_every and (rank + 1) % log_every == 0:
            logger.info("merge %d: pair (%d, %d) count %d", rank, a, b, count)

    return result


# ---------------------------------------------------------------------------
# Inference

class MergeApplier:
    """Applies a ranked merge list to base-encoded pretokens."""

    def __init__(self, merges: Iterable[tuple[int, int]], base_size: int):
        self.base_size = base_size
        self.ranks: dict[tuple[int, int], tuple[int, int]] = {}
        for rank, (left, right) in enumerate(merges):
            self.ranks[(left, right)] = (rank, base_size + rank)
        self.size = base_size + len(self.ranks)

    def apply(self, ids: Iterable[int]) -> list[int]:
        """Fixpoint of applying the lowest-rank matching rule, leftmost first.

        Matches the segmentation training itself produces: rules fire in rank
        order, and each rule rewrites its occurrences left to right.
        """
        w = list(ids)
        for t in w:
            if not 0 <= t < self.size:
                raise VocabularyError(f"token id {t} outside model vocabulary")
        if len(w) < 2 or not self.ranks:
            return w
        ranks = self.ranks
        while True:
            best_rank = None
            best_pair = None
            best_result = -1
            for i in range(len(w) - 1):
                entry = ranks.get((w[i], w[i + 1]))
                if entry is not None and (best_rank is None or entry[0] < best_rank):
                    best_rank = entry[0]
                    best_pair = (w[i], w[i + 1])
                    best_result = entry[1]
            if best_rank is None:
                return w
            positions = _find_pair_positions(w, best_pair[0], best_pair[1])
            w = _splice(w, positions, best_result)
            if len(w) < 2:
                return w


def apply(pretoken: Iterable[int], merges: Iterable[tuple[int, int]], base_size: int) -> list[int]:
    """One-shot convenience wrapper around MergeApplier."""
    return MergeApplier(merges, base_size).apply(pretoken)
