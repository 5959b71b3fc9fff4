"""Vocabulary loading and streaming corpus access.

Corpora are already tokenized: one document per line, tokens separated by
whitespace, empty lines kept as empty documents.  The vocabulary file has
one token per line and the line number (0-based) is the token id; a line
prefixed with ``#special `` declares the token on that line and marks it
as a special token (padding, unknown, mask marker, ...).  Special tokens
conventionally sit at the top of the file.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DuplicateTokenError, VocabularyError

SPECIAL_PREFIX = "#special "

# Role detection for special tokens, by conventional spelling.  "[UNK]",
# "<unk>", "unk" and friends all resolve to the unknown role.
_ROLES = {
    "unk": "unk",
    "unknown": "unk",
    "mask": "mask",
    "pad": "pad",
    "padding": "pad",
}


def _role_of(token: str) -> str | None:
    return _ROLES.get(token.strip("[]<>").casefold())


@dataclass
class Vocabulary:
    """Immutable token-string <-> token-id mapping.

    Ids are dense, 0..size-1, in declaration order.  ``special_ids``
    marks tokens that are never maskable and never count as eligible
    positions.
    """

    tokens: list[str]
    special_ids: frozenset[int]
    token_to_id: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        mapping: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if tok in mapping:
                raise DuplicateTokenError(f"token {tok!r} declared twice (ids {mapping[tok]} and {i})")
            mapping[tok] = i
        bad = [i for i in self.special_ids if not 0 <= i < len(self.tokens)]
        if bad:
            raise VocabularyError(f"special ids out of range: {sorted(bad)}")
        self.token_to_id = mapping
        roles: dict[str, int] = {}
        for i in sorted(self.special_ids):
            role = _role_of(self.tokens[i])
            if role is not None and role not in roles:
                roles[role] = i
        self._roles = roles

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def unk_id(self) -> int | None:
        return self._roles.get("unk")

    @property
    def mask_id(self) -> int | None:
        return self._roles.get("mask")

    @property
    def pad_id(self) -> int | None:
        return self._roles.get("pad")

    def require_unk(self) -> int:
        if self.unk_id is None:
            raise VocabularyError("vocabulary declares no unknown special token")
        return self.unk_id

    def require_mask(self) -> int:
        if self.mask_id is None:
            raise VocabularyError("vocabulary declares no mask special token")
        return self.mask_id

    def non_special_ids(self) -> np.ndarray:
        """Ids eligible as random replacement tokens during corruption."""
        out = np.array([i for i in range(self.size) if i not in self.special_ids], dtype=np.int64)
        return out

    def to_line(self, token_ids: Iterable[int]) -> str:
        return " ".join(self.tokens[i] for i in token_ids)


def load_vocabulary(path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline, not an empty token
    tokens: list[str] = []
    specials: set[int] = set()
    for i, line in enumerate(lines):
        if line.startswith(SPECIAL_PREFIX):
            specials.add(i)
            tokens.append(line[len(SPECIAL_PREFIX):])
        else:
            tokens.append(line)
    return Vocabulary(tokens=tokens, special_ids=frozenset(specials))


@dataclass
class Document:
    doc_id: int
    tokens: np.ndarray  # int64 token ids

    def __len__(self) -> int:
        return len(self.tokens)


def stream_documents(path, vocab: Vocabulary, start_doc_id: int = 0) -> Iterator[Document]:
    """Yield documents in file order with sequential doc ids.

    Unknown token strings map to the unknown special id; empty lines are
    preserved as empty documents so doc ids track line numbers.  Each
    call re-opens the file, so iteration is restartable.
    """
    lookup = vocab.token_to_id
    unk = vocab.unk_id
    with open(path, encoding="utf-8") as fh:
        for doc_id, line in enumerate(fh, start=start_doc_id):
            parts = line.split()
            ids = []
            for tok in parts:
                tid = lookup.get(tok)
                if tid is None:
                    if unk is None:
                        raise VocabularyError(
                            f"token {tok!r} (doc {doc_id}) not in vocabulary and no unknown token declared"
                        )
                    tid = unk
                ids.append(tid)
            yield Document(doc_id, np.array(ids, dtype=np.int64))


def stream_corpus(paths: Sequence, vocab: Vocabulary) -> Iterator[Document]:
    """Chain several corpus files, doc ids continuing across files."""
    streams = []
    next_id = 0
    for p in paths:
        streams.append(stream_documents(p, vocab, start_doc_id=next_id))
        next_id += count_documents(p)
    return itertools.chain.from_iterable(streams)


def count_documents(path) -> int:
    n = 0
    with open(path, encoding="utf-8") as fh:
        for _ in fh:
            n += 1
    return n
