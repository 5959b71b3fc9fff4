"""Synthetic corpora with known co-occurrence structure.

Used by the test suite and the bundled experiment scripts.  The planted
corpus mixes four token classes with known ground truth:

- filler tokens appear uniformly in every document (high frequency, no
  topical concentration),
- content tokens appear only inside their topic's documents (strong
  pairwise association),
- collocation pairs (x_i, y_i): x_i occurs *only* as the bigram
  "x_i y_i", giving a maximal-strength adjacent collocation,
- entity tokens are content-like singletons tied to one topic but never
  part of any frequent n-gram.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, Vocabulary

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[MASK]"]


def iid_uniform_documents(
    n_docs: int, doc_len: int, vocab_size: int, seed: int, n_special: int = 0
) -> list[Document]:
    """Documents of i.i.d. uniform draws over the non-special ids."""
    rng = np.random.default_rng(seed)
    lo = n_special
    return [
        Document(i, rng.integers(lo, vocab_size, doc_len).astype(np.int64))
        for i in range(n_docs)
    ]


@dataclass
class PlantedCorpus:
    vocab: Vocabulary
    documents: list[Document]
    filler_ids: np.ndarray
    content_ids: np.ndarray
    colloc_x_ids: np.ndarray
    colloc_y_ids: np.ndarray
    entity_ids: np.ndarray

    def class_occurrences(self, ids: np.ndarray) -> int:
        counts = np.zeros(self.vocab.size, dtype=np.int64)
        for doc in self.documents:
            np.add.at(counts, doc.tokens, 1)
        return int(counts[ids].sum())

    def write(self, corpus_path, vocab_path) -> None:
        with open(vocab_path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self.vocab.tokens):
                prefix = "#special " if i in self.vocab.special_ids else ""
                fh.write(f"{prefix}{tok}\n")
        with open(corpus_path, "w", encoding="utf-8") as fh:
            for doc in self.documents:
                fh.write(self.vocab.to_line(doc.tokens.tolist()))
                fh.write("\n")


def planted_corpus(
    n_docs: int = 2000,
    doc_len_range: tuple[int, int] = (40, 60),
    n_topics: int = 8,
    content_per_topic: int = 24,
    n_fillers: int = 40,
    p_filler: float = 0.5,
    colloc_per_doc: float = 1.5,
    entities_per_doc: float = 2.0,
    seed: int = 0,
) -> PlantedCorpus:
    """Build a planted corpus; one collocation pair and one entity per topic.

    Each document belongs to one topic: slots are filler tokens with
    probability p_filler, otherwise uniform draws from the topic's
    content pool.  The topic's collocation bigram is spliced in (both
    tokens always adjacent, x before y) roughly colloc_per_doc times,
    and the topic's entity token overwrites single slots roughly
    entities_per_doc times.
    """
    rng = np.random.default_rng(seed)
    tokens = list(SPECIAL_TOKENS)
    specials = frozenset(range(len(tokens)))

    def add_block(prefix: str, count: int) -> np.ndarray:
        start = len(tokens)
        tokens.extend(f"{prefix}{i}" for i in range(count))
        return np.arange(start, start + count, dtype=np.int64)

    filler_ids = add_block("f", n_fillers)
    content_ids = add_block("c", n_topics * content_per_topic)
    colloc_x_ids = add_block("x", n_topics)
    colloc_y_ids = add_block("y", n_topics)
    entity_ids = add_block("e", n_topics)
    vocab = Vocabulary(tokens=tokens, special_ids=specials)

    topic_content = content_ids.reshape(n_topics, content_per_topic)
    lo, hi = doc_len_range
    documents = []
    for doc_id in range(n_docs):
        topic = int(rng.integers(0, n_topics))
        n = int(rng.integers(lo, hi + 1))
        is_filler = rng.random(n) < p_filler
        body = np.where(
            is_filler,
            filler_ids[rng.integers(0, n_fillers, n)],
            topic_content[topic][rng.integers(0, content_per_topic, n)],
        )
        for _ in range(rng.poisson(entities_per_doc)):
            body[rng.integers(0, n)] = entity_ids[topic]
        if n >= 2:
            for _ in range(rng.poisson(colloc_per_doc)):
                at = int(rng.integers(0, n - 1))
                body[at] = colloc_x_ids[topic]
                body[at + 1] = colloc_y_ids[topic]
        # splices can overlap; make sure no stray x survives without its y
        for at in np.flatnonzero(body == colloc_x_ids[topic]).tolist():
            if at + 1 >= n or body[at + 1] != colloc_y_ids[topic]:
                body[at] = filler_ids[rng.integers(0, n_fillers)]
        documents.append(Document(doc_id, body.astype(np.int64)))
    return PlantedCorpus(
        vocab=vocab,
        documents=documents,
        filler_ids=filler_ids,
        content_ids=content_ids,
        colloc_x_ids=colloc_x_ids,
        colloc_y_ids=colloc_y_ids,
        entity_ids=entity_ids,
    )
