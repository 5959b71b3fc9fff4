from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pmimask.corpus import Document, Vocabulary
from pmimask.pmi import PmiTable

sys.path.insert(0, str(Path(__file__).parent))  # for `import oracles`

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def mini_dir() -> Path:
    return DATA / "mini"


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return DATA / "demo"


@pytest.fixture
def toy_vocab() -> Vocabulary:
    return Vocabulary(
        tokens=["[PAD]", "[UNK]", "[MASK]", "the", "cat", "sat", "mat", "on"],
        special_ids=frozenset({0, 1, 2}),
    )


def make_docs(token_lists) -> list[Document]:
    return [Document(i, np.array(toks, dtype=np.int64)) for i, toks in enumerate(token_lists)]


def random_pmi_table(rng: np.random.Generator, vocab_size: int, density: float = 0.5) -> PmiTable:
    """A dense-ish random symmetric table over the full id range."""
    values = {}
    for a in range(vocab_size):
        for b in range(a, vocab_size):
            if rng.random() < density:
                values[(a, b)] = float(rng.normal())
    return PmiTable(
        pmi_vocab=frozenset(range(vocab_size)),
        values=values,
        min_count=1,
    )
