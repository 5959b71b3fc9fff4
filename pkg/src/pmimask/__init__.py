"""Corpus preprocessing for masked language model pretraining.

Builds corpus-wide windowed co-occurrence counts and a sparse PMI table,
then uses them to pick informative masking positions per document by
sampling random masking candidates and keeping the highest-scoring one.
Derived token-specific masking rates give a cheap per-token Bernoulli
approximation of the same policy.  Uniform-random, geometric-span, and
collocation-span baselines share the masking interface so policies can
be compared token by token.
"""

__version__ = "0.1.0"

from .corpus import Document, Vocabulary, load_vocabulary, stream_documents
from .cooccur import CooccurrenceTable, count_document, merge_tables, read_counts, write_counts
from .pmi import PmiTable, build_pmi, read_pmi, write_pmi
from .masker import (
    MaskingCandidate,
    MaskingDecision,
    apply_corruption,
    choose_masking,
    informative_relevance,
    sample_candidates,
)
from .rates import RateTable, accumulate, approximate_mask, convergence_delta, fidelity_report
from .baselines import (
    SpanVocabulary,
    build_span_vocabulary,
    compare_strategies,
    pmi_span_mask,
    random_mask,
    span_mask,
)

__all__ = [
    "Document",
    "Vocabulary",
    "load_vocabulary",
    "stream_documents",
    "CooccurrenceTable",
    "count_document",
    "merge_tables",
    "read_counts",
    "write_counts",
    "PmiTable",
    "build_pmi",
    "read_pmi",
    "write_pmi",
    "MaskingCandidate",
    "MaskingDecision",
    "informative_relevance",
    "sample_candidates",
    "choose_masking",
    "apply_corruption",
    "RateTable",
    "accumulate",
    "convergence_delta",
    "approximate_mask",
    "fidelity_report",
    "SpanVocabulary",
    "build_span_vocabulary",
    "random_mask",
    "span_mask",
    "pmi_span_mask",
    "compare_strategies",
    "__version__",
]
