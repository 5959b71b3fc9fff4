"""Sample-and-score masking selection.

Per document: draw s random masking candidates (uniform k-subsets of the
eligible positions, k = clamp(round(rate * n_eligible), 1, n_eligible)),
score each candidate by the summed PMI between every masked position and
every unmasked position, and keep the highest-scoring candidate (ties to
the lowest candidate index).  An exhaustive mode enumerates all
candidates instead, as a test oracle for tiny documents.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .corpus import Document, Vocabulary
from .errors import InvalidPolicyError, VocabularyError
from .pmi import PmiTable
from .seeds import STREAM_CANDIDATES, STREAM_CORRUPTION, derive_rng, derive_seed

EXHAUSTIVE_LIMIT = 20  # exhaustive mode is an oracle for test-sized docs only

BERT_POLICY = (0.8, 0.1, 0.1)  # p_mask, p_random, p_keep


@dataclass
class MaskingCandidate:
    positions: np.ndarray  # sorted position indices
    score: float | None = None


@dataclass
class MaskingDecision:
    doc_id: int
    chosen: MaskingCandidate
    all_scores: list[float]
    seed_used: int


def eligible_positions(tokens: np.ndarray, special_ids: frozenset[int]) -> np.ndarray:
    if not special_ids:
        return np.arange(len(tokens), dtype=np.int64)
    special = np.array(sorted(special_ids), dtype=np.int64)
    return np.flatnonzero(~np.isin(tokens, special)).astype(np.int64)


def mask_budget(n_eligible: int, rate: float) -> int:
    """k = clamp(round(rate * n_eligible), 1, n_eligible); 0 only when empty."""
    if n_eligible == 0:
        return 0
    return max(1, min(n_eligible, round(rate * n_eligible)))


def informative_relevance(doc: Document, masked, pmi: PmiTable) -> float:
    """Reference scorer: plain double sum over (masked, unmasked) positions.

    O(k * n) lookups; the production path in choose_masking aggregates
    per token instead but computes the same quantity.
    """
    masked_set = {int(p) for p in masked}
    toks = doc.tokens.tolist()
    total = 0.0
    for i in sorted(masked_set):
        ti = toks[i]
        for j in range(len(toks)):
            if j in masked_set:
                continue
            total += pmi.lookup(ti, toks[j])
    return total


class DocumentScorer:
    """Scores many candidates of one document against one PMI table.

    score(M) = sum_{i in M} S[i] - sum_{i in M, j in M} pmi(t_i, t_j)
    where S[i] is the PMI row sum of position i over the whole document.
    Work per candidate stays proportional to k times the table degree,
    independent of document length, which keeps whole-document decisions
    linear in n.
    """

    def __init__(self, tokens: np.ndarray, pmi: PmiTable):
        self.uniq, self.inv = np.unique(tokens, return_inverse=True)
        doc_counts = np.bincount(self.inv).astype(np.float64)
        nb = pmi.neighbors()
        n_uniq = len(self.uniq)
        # local adjacency: for each distinct doc token, its PMI partners
        # that also occur in this document, as indices into uniq
        self.loc_idx: list[np.ndarray | None] = [None] * n_uniq
        self.loc_vals: list[np.ndarray | None] = [None] * n_uniq
        s_uniq = np.zeros(n_uniq, dtype=np.float64)
        for u_local, tok in enumerate(self.uniq.tolist()):
            entry = nb.get(tok)
            if entry is None:
                continue
            ids, vals = entry
            pos = np.searchsorted(self.uniq, ids)
            pos[pos == n_uniq] = 0
            ok = self.uniq[pos] == ids
            if not ok.any():
                continue
            idx = pos[ok]
            v = vals[ok]
            self.loc_idx[u_local] = idx
            self.loc_vals[u_local] = v
            s_uniq[u_local] = float(v @ doc_counts[idx])
        self.s_pos = s_uniq[self.inv]
        self.n_uniq = n_uniq

    def score(self, positions: np.ndarray) -> float:
        minv = self.inv[positions]
        mcounts = np.bincount(minv, minlength=self.n_uniq).astype(np.float64)
        inner = 0.0
        for u_local in np.nonzero(mcounts)[0].tolist():
            idx = self.loc_idx[u_local]
            if idx is None:
                continue
            inner += mcounts[u_local] * float(self.loc_vals[u_local] @ mcounts[idx])
        return float(self.s_pos[positions].sum() - inner)


def sample_candidates(
    doc: Document,
    s: int,
    rate: float,
    rng_seed: int,
    special_positions: frozenset[int] = frozenset(),
) -> list[MaskingCandidate]:
    """Draw s independent uniform k-subsets of the eligible positions.

    Candidates are sampled with replacement across draws (duplicates
    allowed), positions without replacement within a draw.  Deterministic
    given (rng_seed, doc.doc_id); empty documents yield no candidates.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must be in (0, 1), got {rate}")
    n = len(doc.tokens)
    elig = np.array([p for p in range(n) if p not in special_positions], dtype=np.int64)
    if elig.size == 0:
        return []
    k = mask_budget(elig.size, rate)
    rng = derive_rng(rng_seed, STREAM_CANDIDATES, doc.doc_id)
    out = []
    for _ in range(s):
        picks = rng.choice(elig, size=k, replace=False)
        picks.sort()
        out.append(MaskingCandidate(picks))
    return out


def choose_masking(
    doc: Document,
    s: int,
    rate: float,
    pmi: PmiTable,
    rng_seed: int,
    special_ids: frozenset[int] = frozenset(),
    exhaustive: bool = False,
) -> MaskingDecision | None:
    """Run one sample-and-score decision; None when nothing is eligible.

    ``exhaustive=True`` replaces sampling with enumeration of every
    k-subset in lexicographic order (allowed only for documents of up to
    EXHAUSTIVE_LIMIT eligible positions).
    """
    elig = eligible_positions(doc.tokens, special_ids)
    if elig.size == 0:
        return None
    special_positions = frozenset(range(len(doc.tokens))) - frozenset(elig.tolist())
    if exhaustive:
        if elig.size > EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive mode supports at most {EXHAUSTIVE_LIMIT} eligible positions, got {elig.size}"
            )
        k = mask_budget(elig.size, rate)
        candidates = [
            MaskingCandidate(np.array(combo, dtype=np.int64))
            for combo in itertools.combinations(elig.tolist(), k)
        ]
        seed_used = 0
    else:
        candidates = sample_candidates(doc, s, rate, rng_seed, special_positions)
        seed_used = derive_seed(rng_seed, STREAM_CANDIDATES, doc.doc_id)
    scorer = DocumentScorer(doc.tokens, pmi)
    scores = [scorer.score(c.positions) for c in candidates]
    best = int(np.argmax(scores))  # first max wins: lowest candidate index
    chosen = MaskingCandidate(candidates[best].positions, scores[best])
    return MaskingDecision(doc.doc_id, chosen, scores, seed_used)


def apply_corruption(
    doc: Document,
    positions: np.ndarray,
    vocab: Vocabulary,
    policy: tuple[float, float, float] = BERT_POLICY,
    rng_seed: int = 0,
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Corrupt the chosen positions: mask / random replace / keep.

    Returns (corrupted tokens, labels) with labels listing (position,
    original token id) for every chosen position.  Deterministic given
    (rng_seed, doc.doc_id).
    """
    p_mask, p_random, p_keep = policy
    if min(policy) < 0 or abs(p_mask + p_random + p_keep - 1.0) > 1e-9:
        raise InvalidPolicyError(f"corruption policy must be non-negative and sum to 1, got {policy}")
    positions = np.asarray(positions, dtype=np.int64)
    corrupted = doc.tokens.copy()
    labels = [(int(p), int(doc.tokens[p])) for p in positions]
    if positions.size == 0:
        return corrupted, labels
    rng = derive_rng(rng_seed, STREAM_CORRUPTION, doc.doc_id)
    u = rng.random(positions.size)
    to_mask = u < p_mask
    to_random = (u < p_mask + p_random) & ~to_mask
    if to_mask.any():
        corrupted[positions[to_mask]] = vocab.require_mask()
    n_random = int(to_random.sum())
    if n_random:
        replacements = vocab.non_special_ids()
        if replacements.size == 0:
            raise VocabularyError("no non-special tokens available for random replacement")
        corrupted[positions[to_random]] = replacements[rng.integers(0, replacements.size, n_random)]
    return corrupted, labels


def decision_to_json(decision: MaskingDecision) -> str:
    return json.dumps(
        {
            "doc_id": decision.doc_id,
            "masked_positions": [int(p) for p in decision.chosen.positions],
            "score": decision.chosen.score,
            "candidate_scores": decision.all_scores,
            "seed_used": decision.seed_used,
        }
    )


def decision_from_json(line: str) -> MaskingDecision:
    obj = json.loads(line)
    chosen = MaskingCandidate(np.array(obj["masked_positions"], dtype=np.int64), obj["score"])
    return MaskingDecision(obj["doc_id"], chosen, obj["candidate_scores"], obj.get("seed_used", 0))


def write_decisions(path, decisions: Iterable[MaskingDecision]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in decisions:
            fh.write(decision_to_json(d))
            fh.write("\n")


def read_decisions(path) -> Iterator[MaskingDecision]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield decision_from_json(line)
