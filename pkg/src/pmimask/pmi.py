"""Sparse pointwise mutual information over the top-frequency vocabulary.

All three probabilities live on the space of counted co-occurrence
pairs: with T = total pair count,

    p(w1, w2) = c(w1, w2) / T
    p(w)      = occ(w) / T,   occ(w) = sum of c over stored pairs
                              containing w, self-pairs counted twice
    pmi(w1, w2) = ln( p(w1, w2) / (p(w1) * p(w2)) )

Values are kept only for pairs whose tokens are both in the PMI
vocabulary (top-K by unigram frequency) and whose count clears
min_count; everything else falls back to ``default_value``.  Note that
under this normalization an i.i.d. corpus concentrates near ln(1/2) for
distinct pairs (ln(1/4) for self pairs), not 0: the constant offset
cancels in any fixed-size masking comparison.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .cooccur import CooccurrenceTable
from .errors import EmptyCountsError, FormatError

PMI_MAGIC = b"PMI1"
PMI_VERSION = 1
_HEADER = struct.Struct("<4sIIIQ")  # magic, version, pmi_vocab_size, min_count, n_values
_RECORD_DTYPE = np.dtype([("w1", "<u4"), ("w2", "<u4"), ("value", "<f4")])


@dataclass
class PmiTable:
    pmi_vocab: frozenset[int]
    values: dict[tuple[int, int], float]
    default_value: float = 0.0
    min_count: int = 1
    _neighbors: dict | None = field(default=None, repr=False, compare=False)

    def lookup(self, w1: int, w2: int) -> float:
        key = (w1, w2) if w1 <= w2 else (w2, w1)
        return self.values.get(key, self.default_value)

    @property
    def n_values(self) -> int:
        return len(self.values)

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        for key in sorted(self.values):
            yield key, self.values[key]

    def neighbors(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        """token -> (sorted partner ids, their stored values); cached.

        Feeds the aggregated scorer in the masker, which needs per-token
        adjacency rather than pair lookups.
        """
        if self._neighbors is None:
            grouped: dict[int, list[tuple[int, float]]] = {}
            for (a, b), v in self.values.items():
                grouped.setdefault(a, []).append((b, v))
                if a != b:
                    grouped.setdefault(b, []).append((a, v))
            built = {}
            for tok, pairs in grouped.items():
                pairs.sort()
                ids = np.array([p[0] for p in pairs], dtype=np.int64)
                vals = np.array([p[1] for p in pairs], dtype=np.float64)
                built[tok] = (ids, vals)
            self._neighbors = built
        return self._neighbors


def top_frequency_ids(unigram: np.ndarray, k: int) -> np.ndarray:
    """Top-k token ids by count, ties broken toward the smaller id."""
    v = len(unigram)
    order = np.lexsort((np.arange(v), -unigram))
    picked = order[: min(k, v)]
    picked.sort()
    return picked


def build_pmi(counts: CooccurrenceTable, pmi_vocab_size: int, min_count: int) -> PmiTable:
    if pmi_vocab_size < 1:
        raise ValueError(f"pmi_vocab_size must be >= 1, got {pmi_vocab_size}")
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    total = counts.total_pairs
    if total == 0:
        raise EmptyCountsError("counts table has no pairs; nothing to normalize by")

    v = counts.vocab_size
    keys = np.fromiter(counts.pair_counts.keys(), dtype=np.int64, count=counts.n_pairs)
    keys.sort()  # deterministic iteration regardless of insertion order
    cvals = np.fromiter((counts.pair_counts[int(k)] for k in keys), dtype=np.int64, count=len(keys))
    w1 = keys // v
    w2 = keys % v

    # marginals over the full counts table, self-pairs counted twice
    occ = np.zeros(v, dtype=np.int64)
    np.add.at(occ, w1, cvals)
    np.add.at(occ, w2, cvals)

    pv_ids = top_frequency_ids(counts.unigram, pmi_vocab_size)
    in_pv = np.zeros(v, dtype=bool)
    in_pv[pv_ids] = True

    keep = (cvals >= min_count) & in_pv[w1] & in_pv[w2]
    kw1, kw2, kc = w1[keep], w2[keep], cvals[keep]
    with np.errstate(divide="ignore"):
        vals = np.log(kc.astype(np.float64) * float(total) / (occ[kw1].astype(np.float64) * occ[kw2]))
    values = {
        (int(a), int(b)): float(x)
        for a, b, x in zip(kw1.tolist(), kw2.tolist(), vals.tolist())
    }
    return PmiTable(pmi_vocab=frozenset(pv_ids.tolist()), values=values, min_count=min_count)


def write_pmi(table: PmiTable, path) -> None:
    """header {magic "PMI1", version u32, pmi_vocab_size u32, min_count
    u32, n_values u64}, then the sorted u32 id list of the PMI
    vocabulary, then n_values records (w1 u32, w2 u32, value f32) sorted
    by (w1, w2).  Values round to f32 on disk.
    """
    ids = np.array(sorted(table.pmi_vocab), dtype="<u4")
    skeys = sorted(table.values)
    records = np.empty(len(skeys), dtype=_RECORD_DTYPE)
    records["w1"] = [k[0] for k in skeys]
    records["w2"] = [k[1] for k in skeys]
    records["value"] = np.array([table.values[k] for k in skeys], dtype=np.float64).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(PMI_MAGIC, PMI_VERSION, len(ids), table.min_count, len(skeys)))
        fh.write(ids.tobytes())
        fh.write(records.tobytes())


def read_pmi(path) -> PmiTable:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, n_ids, min_count, n_values = _HEADER.unpack(head)
        if magic != PMI_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {PMI_MAGIC!r}")
        if version != PMI_VERSION:
            raise FormatError(f"{path}: unsupported pmi version {version}")
        body = fh.read()
    need = n_ids * 4 + n_values * _RECORD_DTYPE.itemsize
    if len(body) != need:
        raise FormatError(f"{path}: payload is {len(body)} bytes, expected {need}")
    ids = np.frombuffer(body, dtype="<u4", count=n_ids)
    records = np.frombuffer(body, dtype=_RECORD_DTYPE, offset=n_ids * 4, count=n_values)
    values = {
        (int(a), int(b)): float(x)
        for a, b, x in zip(records["w1"].tolist(), records["w2"].tolist(), records["value"].tolist())
    }
    return PmiTable(pmi_vocab=frozenset(ids.tolist()), values=values, min_count=min_count)
