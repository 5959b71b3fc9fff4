"""Token-specific masking rates derived from masking decisions.

Running the sample-and-score masker over a slice of the corpus yields,
per token, how often it was eligible and how often it was actually
masked.  The ratio is a token-specific masking rate that can replay the
policy as independent per-position Bernoulli draws at a fraction of the
cost.  Tokens never seen during derivation fall back to the overall
target rate.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .corpus import Document, Vocabulary
from .errors import AlignmentError, FormatError, ShardMismatchError, UndefinedDeltaError
from .masker import MaskingDecision, eligible_positions
from .seeds import STREAM_APPROX, derive_rng

RATES_MAGIC = b"RATE"
RATES_VERSION = 1
_HEADER = struct.Struct("<4sIIQd")  # magic, version, vocab_size, docs_processed, target_rate


@dataclass
class RateTable:
    vocab_size: int
    target_rate: float
    occurrences: np.ndarray  # int64: eligible occurrences seen
    masked_count: np.ndarray  # int64: times masked
    docs_processed: int = 0

    @classmethod
    def empty(cls, vocab_size: int, target_rate: float) -> "RateTable":
        return cls(
            vocab_size,
            target_rate,
            np.zeros(vocab_size, dtype=np.int64),
            np.zeros(vocab_size, dtype=np.int64),
        )

    def rate(self, rescale: bool = False) -> np.ndarray:
        """Per-token masking rate; target_rate where never observed.

        ``rescale`` renormalizes observed rates so the occurrence-weighted
        mean hits target_rate again (for tables drifted by accumulation
        cutoffs), clipped to [0, 1].
        """
        seen = self.occurrences > 0
        out = np.full(self.vocab_size, self.target_rate, dtype=np.float64)
        out[seen] = self.masked_count[seen] / self.occurrences[seen]
        if rescale:
            overall = self.overall_rate()
            if overall > 0:
                out[seen] = np.clip(out[seen] * (self.target_rate / overall), 0.0, 1.0)
        return out

    def overall_rate(self) -> float:
        total = int(self.occurrences.sum())
        return int(self.masked_count.sum()) / total if total else 0.0

    def copy(self) -> "RateTable":
        return RateTable(
            self.vocab_size,
            self.target_rate,
            self.occurrences.copy(),
            self.masked_count.copy(),
            self.docs_processed,
        )


def accumulate(
    decisions: Iterable[MaskingDecision],
    docs: Iterable[Document],
    table: RateTable,
    special_ids: frozenset[int] = frozenset(),
) -> RateTable:
    """Fold aligned (decision, document) streams into the table.

    Decisions may skip documents that produced none (empty or
    all-special); alignment is checked by doc_id and any decision without
    its document raises AlignmentError.
    """
    doc_iter = iter(docs)
    for dec in decisions:
        doc = None
        for cand in doc_iter:
            if cand.doc_id == dec.doc_id:
                doc = cand
                break
            if cand.doc_id > dec.doc_id:
                raise AlignmentError(f"decision for doc {dec.doc_id} arrived after document {cand.doc_id}")
        if doc is None:
            raise AlignmentError(f"decision for doc {dec.doc_id} has no matching document")
        elig = eligible_positions(doc.tokens, special_ids)
        np.add.at(table.occurrences, doc.tokens[elig], 1)
        np.add.at(table.masked_count, doc.tokens[dec.chosen.positions], 1)
        table.docs_processed += 1
    return table


def merge_rate_tables(tables: Sequence[RateTable]) -> RateTable:
    if not tables:
        raise ValueError("nothing to merge")
    first = tables[0]
    out = RateTable.empty(first.vocab_size, first.target_rate)
    for t in tables:
        if t.vocab_size != out.vocab_size or t.target_rate != out.target_rate:
            raise ShardMismatchError("rate tables disagree on vocab size or target rate")
        out.occurrences += t.occurrences
        out.masked_count += t.masked_count
        out.docs_processed += t.docs_processed
    return out


def convergence_delta(prev: RateTable, curr: RateTable, mode: str = "absolute") -> float:
    """Mean per-token rate change over tokens observed in both tables.

    "absolute" averages |r_curr - r_prev|; "relative" averages the
    symmetric ratio 2|r_curr - r_prev| / (r_curr + r_prev) (0 where both
    rates are 0).  No common tokens -> UndefinedDeltaError.
    """
    common = (prev.occurrences > 0) & (curr.occurrences > 0)
    if not common.any():
        raise UndefinedDeltaError("no token observed in both tables")
    rp = prev.masked_count[common] / prev.occurrences[common]
    rc = curr.masked_count[common] / curr.occurrences[common]
    diff = np.abs(rc - rp)
    if mode == "absolute":
        return float(diff.mean())
    if mode == "relative":
        denom = rc + rp
        out = np.zeros_like(diff)
        nz = denom > 0
        out[nz] = 2.0 * diff[nz] / denom[nz]
        return float(out.mean())
    raise ValueError(f"unknown delta mode {mode!r}")


def approximate_mask(
    doc: Document,
    table: RateTable,
    rng_seed: int,
    special_ids: frozenset[int] = frozenset(),
    epoch: int = 0,
    rescale: bool = False,
) -> np.ndarray | None:
    """Independent Bernoulli masking at each token's specific rate.

    Zero-mask floor: a document whose draws all miss still gets its
    highest-rate eligible position masked (ties to the lowest position).
    Returns sorted positions, or None when nothing is eligible.
    """
    elig = eligible_positions(doc.tokens, special_ids)
    if elig.size == 0:
        return None
    rates = table.rate(rescale=rescale)[doc.tokens[elig]]
    rng = derive_rng(rng_seed, STREAM_APPROX, epoch, doc.doc_id)
    hits = rng.random(elig.size) < rates
    if not hits.any():
        # np.argmax returns the first maximum, i.e. the lowest position
        return elig[[int(np.argmax(rates))]]
    return elig[hits]


@dataclass
class FidelityReport:
    token_ids: np.ndarray
    abs_diff: np.ndarray
    mean_abs_diff: float
    max_abs_diff: float
    overall_a: float
    overall_b: float


def fidelity_report(a: RateTable, b: RateTable, min_occurrences: int = 0) -> FidelityReport:
    """Per-token and aggregate rate divergence between two tables.

    Compares every token observed in either table (fallback rate applies
    to the unobserved side), restricted to tokens whose occurrence count
    reaches ``min_occurrences`` in at least one table.
    """
    if a.vocab_size != b.vocab_size:
        raise ShardMismatchError("rate tables disagree on vocab size")
    floor = max(min_occurrences, 1)
    sel = np.maximum(a.occurrences, b.occurrences) >= floor
    ids = np.flatnonzero(sel)
    diff = np.abs(a.rate()[sel] - b.rate()[sel])
    return FidelityReport(
        token_ids=ids,
        abs_diff=diff,
        mean_abs_diff=float(diff.mean()) if diff.size else 0.0,
        max_abs_diff=float(diff.max()) if diff.size else 0.0,
        overall_a=a.overall_rate(),
        overall_b=b.overall_rate(),
    )


def windowed_medians(values: Sequence[float], window: int) -> list[float]:
    """Medians of consecutive complete windows of a checkpoint series."""
    out = []
    for start in range(0, len(values) - window + 1, window):
        out.append(float(np.median(values[start : start + window])))
    return out


def write_rates_tsv(table: RateTable, vocab: Vocabulary, path) -> None:
    """TSV: header, then one row per token id in id order."""
    rates = table.rate()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("token\toccurrences\tmasked_count\trate\n")
        for i in range(table.vocab_size):
            fh.write(
                f"{vocab.tokens[i]}\t{int(table.occurrences[i])}\t{int(table.masked_count[i])}\t{float(rates[i])!r}\n"
            )


def write_rates_binary(table: RateTable, path) -> None:
    """Exact binary mirror: header {magic "RATE", version u32, vocab_size
    u32, docs_processed u64, target_rate f64}, then occurrences and
    masked_count as u64 * vocab_size each.
    """
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(RATES_MAGIC, RATES_VERSION, table.vocab_size, table.docs_processed, table.target_rate)
        )
        fh.write(table.occurrences.astype("<u8").tobytes())
        fh.write(table.masked_count.astype("<u8").tobytes())


def read_rates_binary(path) -> RateTable:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, vocab_size, docs, target = _HEADER.unpack(head)
        if magic != RATES_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {RATES_MAGIC!r}")
        if version != RATES_VERSION:
            raise FormatError(f"{path}: unsupported rates version {version}")
        body = fh.read()
    if len(body) != vocab_size * 16:
        raise FormatError(f"{path}: payload is {len(body)} bytes, expected {vocab_size * 16}")
    occ = np.frombuffer(body, dtype="<u8", count=vocab_size).astype(np.int64)
    masked = np.frombuffer(body, dtype="<u8", offset=vocab_size * 8, count=vocab_size).astype(np.int64)
    return RateTable(vocab_size, target, occ, masked, docs)
