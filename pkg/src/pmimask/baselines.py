"""Masking strategies behind one interface, for side-by-side rate studies.

Kinds: "random" (uniform k-subset), "span" (truncated-geometric span
lengths at uniform starts), "pmi_span" (greedy segmentation against a
ranked collocation vocabulary, masking whole segments), "informask"
(sample-and-score decisions), "informask_approx" (token-specific
Bernoulli rates).  Every strategy masks exactly k =
clamp(round(rate * n_eligible), 1, n_eligible) positions per document
except the approximation, which meets the budget in expectation.

The span strategies only aim to reproduce qualitative rate behavior
(which token classes get masked more or less often); they are reference
baselines, not tuned pretraining recipes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .cooccur import CooccurrenceTable
from .corpus import Document, Vocabulary
from .errors import ShardMismatchError
from .masker import choose_masking, eligible_positions, mask_budget
from .pmi import PmiTable
from .rates import RateTable, approximate_mask
from .seeds import STREAM_PMI_SPAN, STREAM_RANDOM, STREAM_SPAN, derive_rng

KIND_ORDER = ("random", "span", "pmi_span", "informask", "informask_approx")

_MAX_FRUITLESS_DRAWS = 1_000_000


def random_mask(
    doc: Document,
    rate: float,
    rng_seed: int,
    special_ids: frozenset[int] = frozenset(),
) -> np.ndarray | None:
    """Uniform random k-subset of the eligible positions."""
    elig = eligible_positions(doc.tokens, special_ids)
    if elig.size == 0:
        return None
    k = mask_budget(elig.size, rate)
    rng = derive_rng(rng_seed, STREAM_RANDOM, doc.doc_id)
    picks = rng.choice(elig, size=k, replace=False)
    picks.sort()
    return picks


def sample_span_length(rng: np.random.Generator, p_geo: float, max_span: int) -> int:
    """Geometric(p_geo) number of trials, truncated to [1, max_span]."""
    if not 0.0 < p_geo <= 1.0:
        raise ValueError(f"p_geo must be in (0, 1], got {p_geo}")
    if max_span < 1:
        raise ValueError(f"max_span must be >= 1, got {max_span}")
    if p_geo == 1.0 or max_span == 1:
        rng.random()  # keep the draw count stable across parameters
        return 1
    q = 1.0 - p_geo
    u = rng.random()
    m = math.ceil(math.log(1.0 - u * (1.0 - q**max_span)) / math.log(q))
    return max(1, min(max_span, m))


def span_mask(
    doc: Document,
    rate: float,
    rng_seed: int,
    p_geo: float = 0.2,
    max_span: int = 10,
    special_ids: frozenset[int] = frozenset(),
) -> np.ndarray | None:
    """Mask contiguous spans until exactly k positions are masked.

    Each draw takes a truncated-geometric length and a uniform start,
    clips the span at the document end, skips special and already-masked
    positions inside it, and trims the final span so the total lands on
    k exactly.
    """
    n = len(doc.tokens)
    elig = eligible_positions(doc.tokens, special_ids)
    if elig.size == 0:
        return None
    ok = np.zeros(n, dtype=bool)
    ok[elig] = True
    k = mask_budget(elig.size, rate)
    rng = derive_rng(rng_seed, STREAM_SPAN, doc.doc_id)
    masked = np.zeros(n, dtype=bool)
    count = 0
    fruitless = 0
    while count < k:
        length = sample_span_length(rng, p_geo, max_span)
        start = int(rng.integers(0, n))
        new = [p for p in range(start, min(start + length, n)) if ok[p] and not masked[p]]
        if not new:
            fruitless += 1
            if fruitless > _MAX_FRUITLESS_DRAWS:
                raise RuntimeError("span sampling failed to make progress")
            continue
        take = min(len(new), k - count)
        for p in new[:take]:
            masked[p] = True
        count += take
    return np.flatnonzero(masked).astype(np.int64)


@dataclass
class SpanVocabulary:
    """Ranked collocation n-grams: (token-id tuple, score), score-descending."""

    entries: list[tuple[tuple[int, ...], float]]
    by_gram: dict[tuple[int, ...], float] = field(init=False, repr=False)
    max_len: int = field(init=False)

    def __post_init__(self) -> None:
        for gram, _ in self.entries:
            if len(gram) < 2:
                raise ValueError(f"span vocabulary entries need >= 2 tokens, got {gram}")
        self.by_gram = {gram: score for gram, score in self.entries}
        self.max_len = max((len(g) for g, _ in self.entries), default=2)

    def __len__(self) -> int:
        return len(self.entries)


def _ngram_counts(token_arrays: Iterable[np.ndarray], n: int, vocab_size: int) -> tuple[Counter, int]:
    """Counts of contiguous n-grams plus the number of length-n windows."""
    grams: Counter = Counter()
    windows = 0
    can_pack = vocab_size**n < 2**62
    packed: list[np.ndarray] = []
    for arr in token_arrays:
        ln = len(arr)
        if ln < n:
            continue
        windows += ln - n + 1
        if can_pack:
            key = arr[: ln - n + 1].astype(np.int64)
            for i in range(1, n):
                key = key * vocab_size + arr[i : ln - n + 1 + i]
            packed.append(key)
        else:
            tl = arr.tolist()
            grams.update(tuple(tl[i : i + n]) for i in range(ln - n + 1))
    if can_pack and packed:
        uniq, counts = np.unique(np.concatenate(packed), return_counts=True)
        for key, c in zip(uniq.tolist(), counts.tolist()):
            gram = []
            for _ in range(n):
                key, t = divmod(key, vocab_size)
                gram.append(t)
            grams[tuple(reversed(gram))] = c
    return grams, windows


def build_span_vocabulary(
    counts: CooccurrenceTable,
    docs: Iterable[Document],
    max_len: int = 5,
    top_m: int = 100_000,
    min_count: int = 5,
) -> SpanVocabulary:
    """Rank contiguous n-grams (2..max_len) by length-normalized joint PMI.

    score(w1..wn) = ln( p(w1..wn) / prod_i p(wi) ) / (n - 1), with the
    n-gram probability over length-n windows and unigram probabilities
    from the counts table.  Per-link normalization makes lengths
    comparable.  Grams below min_count are dropped; the top_m by score
    survive (ties broken lexicographically).
    """
    if max_len < 2:
        raise ValueError(f"max_len must be >= 2, got {max_len}")
    token_arrays = [d.tokens for d in docs]
    total_tokens = int(counts.unigram.sum())
    if total_tokens == 0:
        return SpanVocabulary([])
    log_u = np.full(counts.vocab_size, -np.inf)
    seen = counts.unigram > 0
    log_u[seen] = np.log(counts.unigram[seen] / total_tokens)
    scored: list[tuple[float, tuple[int, ...]]] = []
    for n in range(2, max_len + 1):
        grams, windows = _ngram_counts(token_arrays, n, counts.vocab_size)
        if windows == 0:
            continue
        log_windows = math.log(windows)
        for gram, c in grams.items():
            if c < min_count:
                continue
            marg = sum(log_u[t] for t in gram)
            if not math.isfinite(marg):
                continue
            score = (math.log(c) - log_windows - marg) / (n - 1)
            scored.append((score, gram))
    scored.sort(key=lambda item: (-item[0], item[1]))
    return SpanVocabulary([(gram, score) for score, gram in scored[:top_m]])


def _segment(tokens: np.ndarray, span_vocab: SpanVocabulary, ok: np.ndarray) -> tuple[list[list[int]], np.ndarray]:
    """Greedy longest-match segmentation into units (spans + singletons).

    Matches must sit entirely on eligible positions; special positions
    belong to no unit.
    """
    n = len(tokens)
    tl = tokens.tolist()
    units: list[list[int]] = []
    unit_of = np.full(n, -1, dtype=np.int64)
    by_gram = span_vocab.by_gram
    pos = 0
    while pos < n:
        if not ok[pos]:
            pos += 1
            continue
        matched = None
        for length in range(min(span_vocab.max_len, n - pos), 1, -1):
            if not ok[pos : pos + length].all():
                continue
            if tuple(tl[pos : pos + length]) in by_gram:
                matched = length
                break
        length = matched if matched is not None else 1
        unit = list(range(pos, pos + length))
        unit_of[pos : pos + length] = len(units)
        units.append(unit)
        pos += length
    return units, unit_of


def pmi_span_mask(
    doc: Document,
    rate: float,
    span_vocab: SpanVocabulary,
    rng_seed: int,
    special_ids: frozenset[int] = frozenset(),
) -> np.ndarray | None:
    """Mask whole segmentation units until exactly k positions are masked.

    Units are drawn by picking eligible positions uniformly without
    replacement and masking the whole containing unit, so a token inside
    a matched span is masked whenever any of the span's positions comes
    up: multi-token collocations spend the budget in bursts and singleton
    tokens are masked correspondingly less often.  The final unit is
    trimmed (lowest positions kept) to land on k exactly.
    """
    n = len(doc.tokens)
    elig = eligible_positions(doc.tokens, special_ids)
    if elig.size == 0:
        return None
    ok = np.zeros(n, dtype=bool)
    ok[elig] = True
    k = mask_budget(elig.size, rate)
    units, unit_of = _segment(doc.tokens, span_vocab, ok)
    rng = derive_rng(rng_seed, STREAM_PMI_SPAN, doc.doc_id)
    masked = np.zeros(n, dtype=bool)
    count = 0
    for p in rng.permutation(elig):
        if masked[p]:
            continue
        unit = units[unit_of[p]]
        take = min(len(unit), k - count)
        for q in unit[:take]:
            masked[q] = True
        count += take
        if count >= k:
            break
    return np.flatnonzero(masked).astype(np.int64)


@dataclass
class MaskingStrategy:
    kind: str
    mask_fn: Callable[[Document], np.ndarray | None]
    params: dict

    def mask(self, doc: Document) -> np.ndarray | None:
        return self.mask_fn(doc)


def make_strategy(
    kind: str,
    rate: float,
    seed: int,
    special_ids: frozenset[int] = frozenset(),
    pmi: PmiTable | None = None,
    rate_table: RateTable | None = None,
    span_vocab: SpanVocabulary | None = None,
    s: int = 30,
    p_geo: float = 0.2,
    max_span: int = 10,
    epoch: int = 0,
) -> MaskingStrategy:
    params = {"rate": rate, "seed": seed}
    if kind == "random":
        fn = lambda doc: random_mask(doc, rate, seed, special_ids)
    elif kind == "span":
        params |= {"p_geo": p_geo, "max_span": max_span}
        fn = lambda doc: span_mask(doc, rate, seed, p_geo, max_span, special_ids)
    elif kind == "pmi_span":
        if span_vocab is None:
            raise ValueError("pmi_span strategy needs a span vocabulary")
        params |= {"span_vocab_size": len(span_vocab)}
        fn = lambda doc: pmi_span_mask(doc, rate, span_vocab, seed, special_ids)
    elif kind == "informask":
        if pmi is None:
            raise ValueError("informask strategy needs a PMI table")
        params |= {"s": s}

        def fn(doc):
            decision = choose_masking(doc, s, rate, pmi, seed, special_ids)
            return None if decision is None else decision.chosen.positions

    elif kind == "informask_approx":
        if rate_table is None:
            raise ValueError("informask_approx strategy needs a rate table")
        params |= {"epoch": epoch}
        fn = lambda doc: approximate_mask(doc, rate_table, seed, special_ids, epoch)
    else:
        raise ValueError(f"unknown strategy kind {kind!r}")
    return MaskingStrategy(kind, fn, params)


@dataclass
class ComparisonReport:
    vocab_size: int
    kinds: list[str]
    occurrences: np.ndarray
    masked: dict[str, np.ndarray]

    def rates(self, kind: str) -> np.ndarray:
        seen = self.occurrences > 0
        out = np.zeros(self.vocab_size, dtype=np.float64)
        out[seen] = self.masked[kind][seen] / self.occurrences[seen]
        return out

    def overall(self, kind: str) -> float:
        total = int(self.occurrences.sum())
        return int(self.masked[kind].sum()) / total if total else 0.0

    def decile_curves(self, n_deciles: int = 10) -> dict[str, list[float]]:
        """Occurrence-weighted mean rate per frequency decile.

        Deciles split the observed tokens, highest frequency first, into
        near-equal groups by token count.
        """
        sel = np.flatnonzero(self.occurrences > 0)
        order = np.lexsort((sel, -self.occurrences[sel]))
        groups = np.array_split(sel[order], n_deciles)
        curves: dict[str, list[float]] = {}
        for kind in self.kinds:
            vals = []
            for g in groups:
                occ = int(self.occurrences[g].sum()) if g.size else 0
                vals.append(int(self.masked[kind][g].sum()) / occ if occ else 0.0)
            curves[kind] = vals
        return curves


def compare_strategies(
    docs: Iterable[Document],
    strategies: Sequence[MaskingStrategy],
    vocab_size: int,
    special_ids: frozenset[int] = frozenset(),
) -> ComparisonReport:
    """Run every strategy over one pass of the corpus, tallying per-token
    eligible occurrences and masked counts."""
    kinds = [st.kind for st in strategies]
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate strategy kinds in comparison")
    occ = np.zeros(vocab_size, dtype=np.int64)
    masked = {kind: np.zeros(vocab_size, dtype=np.int64) for kind in kinds}
    for doc in docs:
        elig = eligible_positions(doc.tokens, special_ids)
        if elig.size == 0:
            continue
        np.add.at(occ, doc.tokens[elig], 1)
        for st in strategies:
            pos = st.mask(doc)
            if pos is not None and len(pos):
                np.add.at(masked[st.kind], doc.tokens[pos], 1)
    return ComparisonReport(vocab_size, kinds, occ, masked)


def write_comparison_tsv(
    report: ComparisonReport,
    vocab: Vocabulary,
    path,
    meta: dict | None = None,
) -> None:
    """TSV rows per observed token plus a '#'-prefixed summary block."""
    if vocab.size != report.vocab_size:
        raise ShardMismatchError("comparison report and vocabulary disagree on size")
    kinds = [k for k in KIND_ORDER if k in report.kinds]
    kinds += [k for k in report.kinds if k not in kinds]
    rates = {k: report.rates(k) for k in kinds}
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}\t{value}\n")
        fh.write("token\tfrequency\t" + "\t".join(f"rate_{k}" for k in kinds) + "\n")
        for i in np.flatnonzero(report.occurrences > 0).tolist():
            cols = "\t".join(f"{rates[k][i]:.6f}" for k in kinds)
            fh.write(f"{vocab.tokens[i]}\t{int(report.occurrences[i])}\t{cols}\n")
        for k in kinds:
            fh.write(f"# overall_{k}\t{report.overall(k):.6f}\n")
        for k, curve in report.decile_curves().items():
            fh.write(f"# decile_{k}\t" + "\t".join(f"{v:.6f}" for v in curve) + "\n")
