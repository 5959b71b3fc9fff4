"""Windowed co-occurrence counting with exact, mergeable tables.

A window of size W covers W consecutive positions, so a position pair
(i, j), i < j, co-occurs iff j - i <= W - 1.  Every unordered pair of
positions inside a window is counted exactly once, under the canonical
key (min id, max id); pairs never cross document boundaries.  Counts are
plain integers, which is what makes shard-and-merge parallelism exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .corpus import Document
from .errors import FormatError, InvalidTokenError, ShardMismatchError

COUNTS_MAGIC = b"CoOC"
COUNTS_VERSION = 1
_HEADER = struct.Struct("<4sIIIQ")  # magic, version, vocab_size, window, n_pairs
_RECORD_DTYPE = np.dtype([("w1", "<u4"), ("w2", "<u4"), ("count", "<u8")])


@dataclass
class CooccurrenceTable:
    """Unigram counts plus a sparse map of canonical pair counts.

    Pair keys are packed as min_id * vocab_size + max_id; packed order
    equals lexicographic (min, max) order, which the file format relies
    on.  ``total_pairs`` is the sum of all pair counts.
    """

    vocab_size: int
    window: int
    unigram: np.ndarray
    pair_counts: dict[int, int] = field(default_factory=dict)
    total_pairs: int = 0

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.vocab_size < 1:
            raise ValueError(f"vocab_size must be >= 1, got {self.vocab_size}")

    @classmethod
    def empty(cls, vocab_size: int, window: int) -> "CooccurrenceTable":
        return cls(vocab_size, window, np.zeros(vocab_size, dtype=np.int64))

    def pack(self, w1: int, w2: int) -> int:
        a, b = (w1, w2) if w1 <= w2 else (w2, w1)
        return a * self.vocab_size + b

    def pair_count(self, w1: int, w2: int) -> int:
        """Symmetric pair lookup; unseen pairs are 0."""
        return self.pair_counts.get(self.pack(w1, w2), 0)

    @property
    def n_pairs(self) -> int:
        return len(self.pair_counts)

    def pair_items(self) -> Iterator[tuple[tuple[int, int], int]]:
        """Yield ((min_id, max_id), count) in canonical sorted order."""
        v = self.vocab_size
        for key in sorted(self.pair_counts):
            yield (key // v, key % v), self.pair_counts[key]


def _check_tokens(tokens: np.ndarray, vocab_size: int) -> None:
    if tokens.size == 0:
        return
    lo, hi = int(tokens.min()), int(tokens.max())
    if lo < 0 or hi >= vocab_size:
        raise InvalidTokenError(f"token id out of range [0, {vocab_size}): saw {lo if lo < 0 else hi}")


def count_document(doc: Document, window: int, acc: CooccurrenceTable) -> CooccurrenceTable:
    """Add one document's unigram and windowed pair counts to ``acc``."""
    if window != acc.window:
        raise ValueError(f"window {window} does not match table window {acc.window}")
    toks = doc.tokens
    _check_tokens(toks, acc.vocab_size)
    np.add.at(acc.unigram, toks, 1)
    tl = toks.tolist()
    n = len(tl)
    v = acc.vocab_size
    pairs = acc.pair_counts
    added = 0
    for i in range(n):
        ti = tl[i]
        for j in range(i + 1, min(n, i + window)):
            tj = tl[j]
            key = ti * v + tj if ti <= tj else tj * v + ti
            pairs[key] = pairs.get(key, 0) + 1
            added += 1
    acc.total_pairs += added
    return acc


def count_token_arrays(token_arrays: Iterable[np.ndarray], window: int, vocab_size: int) -> CooccurrenceTable:
    """Vectorized bulk counter: same table as count_document over each doc.

    Documents are concatenated with window-1 sentinel (-1) tokens between
    them so no window spans a boundary; pair keys for every offset
    1..window-1 come from two shifted slices, and sentinel-touching pairs
    drop out before the final unique/count pass.
    """
    acc = CooccurrenceTable.empty(vocab_size, window)
    gap = np.full(window - 1, -1, dtype=np.int64)
    chunks: list[np.ndarray] = []
    for arr in token_arrays:
        arr = np.asarray(arr, dtype=np.int64)
        _check_tokens(arr, vocab_size)
        np.add.at(acc.unigram, arr, 1)
        if chunks:
            chunks.append(gap)
        chunks.append(arr)
    if not chunks:
        return acc
    flat = np.concatenate(chunks)
    key_parts: list[np.ndarray] = []
    for d in range(1, window):
        left = flat[:-d]
        right = flat[d:]
        ok = (left >= 0) & (right >= 0)
        lo = np.minimum(left[ok], right[ok])
        hi = np.maximum(left[ok], right[ok])
        key_parts.append(lo * vocab_size + hi)
    keys = np.concatenate(key_parts) if key_parts else np.empty(0, dtype=np.int64)
    uniq, counts = np.unique(keys, return_counts=True)
    pairs = acc.pair_counts
    for key, c in zip(uniq.tolist(), counts.tolist()):
        pairs[key] = pairs.get(key, 0) + c
    acc.total_pairs += int(keys.size)
    return acc


def count_stream(docs: Iterable[Document], window: int, vocab_size: int, bulk: bool = True) -> CooccurrenceTable:
    if bulk:
        return count_token_arrays((d.tokens for d in docs), window, vocab_size)
    acc = CooccurrenceTable.empty(vocab_size, window)
    for doc in docs:
        count_document(doc, window, acc)
    return acc


def merge_tables(tables: Iterable[CooccurrenceTable]) -> CooccurrenceTable:
    """Sum shard tables; all shards must share vocab size and window."""
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to merge")
    first = tables[0]
    out = CooccurrenceTable.empty(first.vocab_size, first.window)
    for t in tables:
        if (t.vocab_size, t.window) != (out.vocab_size, out.window):
            raise ShardMismatchError(
                f"cannot merge table (vocab={t.vocab_size}, window={t.window}) "
                f"into (vocab={out.vocab_size}, window={out.window})"
            )
        out.unigram += t.unigram
        pairs = out.pair_counts
        for key, c in t.pair_counts.items():
            pairs[key] = pairs.get(key, 0) + c
        out.total_pairs += t.total_pairs
    return out


def write_counts(table: CooccurrenceTable, path) -> None:
    """Serialize to the canonical little-endian layout.

    header {magic "CoOC", version u32, vocab_size u32, window u32,
    n_pairs u64}, then unigram counts as u64 * vocab_size, then n_pairs
    records (w1 u32, w2 u32, count u64) sorted by (w1, w2).
    """
    keys = np.fromiter(table.pair_counts.keys(), dtype=np.int64, count=len(table.pair_counts))
    keys.sort()
    records = np.empty(len(keys), dtype=_RECORD_DTYPE)
    records["w1"] = keys // table.vocab_size
    records["w2"] = keys % table.vocab_size
    records["count"] = np.fromiter(
        (table.pair_counts[int(k)] for k in keys), dtype=np.uint64, count=len(keys)
    )
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(COUNTS_MAGIC, COUNTS_VERSION, table.vocab_size, table.window, len(keys)))
        fh.write(table.unigram.astype("<u8").tobytes())
        fh.write(records.tobytes())


def read_counts(path) -> CooccurrenceTable:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, vocab_size, window, n_pairs = _HEADER.unpack(head)
        if magic != COUNTS_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {COUNTS_MAGIC!r}")
        if version != COUNTS_VERSION:
            raise FormatError(f"{path}: unsupported counts version {version}")
        body = fh.read()
    need = vocab_size * 8 + n_pairs * _RECORD_DTYPE.itemsize
    if len(body) != need:
        raise FormatError(f"{path}: payload is {len(body)} bytes, expected {need}")
    unigram = np.frombuffer(body, dtype="<u8", count=vocab_size).astype(np.int64)
    records = np.frombuffer(body, dtype=_RECORD_DTYPE, offset=vocab_size * 8, count=n_pairs)
    table = CooccurrenceTable(vocab_size, window, unigram)
    keys = records["w1"].astype(np.int64) * vocab_size + records["w2"].astype(np.int64)
    counts = records["count"].astype(np.int64)
    table.pair_counts = dict(zip(keys.tolist(), counts.tolist()))
    table.total_pairs = int(counts.sum())
    return table
