import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmimask.corpus import (
    Document,
    Vocabulary,
    count_documents,
    load_vocabulary,
    stream_corpus,
    stream_documents,
)
from pmimask.errors import DuplicateTokenError, VocabularyError


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadVocabulary:
    def test_special_marking(self, tmp_path):
        p = write(tmp_path, "v.txt", "the\ncat\n#special [MASK]\n")
        v = load_vocabulary(p)
        assert v.size == 3
        assert v.special_ids == frozenset({2})
        assert v.tokens == ["the", "cat", "[MASK]"]

    def test_empty_file(self, tmp_path):
        v = load_vocabulary(write(tmp_path, "v.txt", ""))
        assert v.size == 0
        assert v.special_ids == frozenset()

    def test_duplicate_token(self, tmp_path):
        p = write(tmp_path, "v.txt", "a\na\n")
        with pytest.raises(DuplicateTokenError):
            load_vocabulary(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_vocabulary(tmp_path / "absent.txt")

    def test_ids_follow_line_numbers(self, tmp_path):
        p = write(tmp_path, "v.txt", "#special [PAD]\n#special [UNK]\nalpha\nbeta\n")
        v = load_vocabulary(p)
        assert v.token_to_id == {"[PAD]": 0, "[UNK]": 1, "alpha": 2, "beta": 3}
        assert v.special_ids == frozenset({0, 1})

    def test_role_detection_spellings(self):
        v = Vocabulary(["<pad>", "UNK", "[MASK]", "x"], frozenset({0, 1, 2}))
        assert v.pad_id == 0
        assert v.unk_id == 1
        assert v.mask_id == 2

    def test_require_mask_missing(self):
        v = Vocabulary(["a", "b"], frozenset())
        with pytest.raises(VocabularyError):
            v.require_mask()

    def test_special_id_out_of_range(self):
        with pytest.raises(VocabularyError):
            Vocabulary(["a"], frozenset({5}))

    def test_non_special_ids(self):
        v = Vocabulary(["[PAD]", "a", "[MASK]", "b"], frozenset({0, 2}))
        assert v.non_special_ids().tolist() == [1, 3]


class TestStreamDocuments:
    @pytest.fixture
    def vocab(self):
        return Vocabulary(["the", "cat", "[UNK]"], frozenset({2}))

    def test_basic_mapping(self, tmp_path, vocab):
        p = write(tmp_path, "c.txt", "the cat\ncat the\n")
        docs = list(stream_documents(p, vocab))
        assert [d.doc_id for d in docs] == [0, 1]
        assert docs[0].tokens.tolist() == [0, 1]
        assert docs[1].tokens.tolist() == [1, 0]

    def test_oov_maps_to_unk(self, tmp_path, vocab):
        p = write(tmp_path, "c.txt", "the dog\n")
        (doc,) = stream_documents(p, vocab)
        assert doc.tokens.tolist() == [0, 2]

    def test_oov_without_unk_raises(self, tmp_path):
        vocab = Vocabulary(["the"], frozenset())
        p = write(tmp_path, "c.txt", "the dog\n")
        with pytest.raises(VocabularyError):
            list(stream_documents(p, vocab))

    def test_empty_line_preserved(self, tmp_path, vocab):
        p = write(tmp_path, "c.txt", "the\n\ncat\n")
        docs = list(stream_documents(p, vocab))
        assert [len(d) for d in docs] == [1, 0, 1]
        assert [d.doc_id for d in docs] == [0, 1, 2]

    def test_restartable_and_identical(self, tmp_path, vocab):
        p = write(tmp_path, "c.txt", "the cat\ncat\n\nthe\n")
        first = [(d.doc_id, d.tokens.tolist()) for d in stream_documents(p, vocab)]
        second = [(d.doc_id, d.tokens.tolist()) for d in stream_documents(p, vocab)]
        assert first == second

    def test_doc_count_matches_lines(self, tmp_path, vocab):
        p = write(tmp_path, "c.txt", "the\ncat\n\n")
        assert count_documents(p) == 3
        assert len(list(stream_documents(p, vocab))) == 3

    def test_stream_corpus_continues_ids(self, tmp_path, vocab):
        a = write(tmp_path, "a.txt", "the\ncat\n")
        b = write(tmp_path, "b.txt", "cat cat\n")
        docs = list(stream_corpus([a, b], vocab))
        assert [d.doc_id for d in docs] == [0, 1, 2]
        assert docs[2].tokens.tolist() == [1, 1]


@given(
    st.lists(
        st.lists(st.sampled_from(["the", "cat", "sat", "zzz"]), max_size=6),
        max_size=8,
    )
)
def test_stream_roundtrip_property(tmp_path_factory, token_lines):
    vocab = Vocabulary(["the", "cat", "sat", "[UNK]"], frozenset({3}))
    tmp = tmp_path_factory.mktemp("prop")
    p = tmp / "c.txt"
    p.write_text("".join(" ".join(line) + "\n" for line in token_lines), encoding="utf-8")
    docs = list(stream_documents(p, vocab))
    assert len(docs) == len(token_lines)
    for doc, line in zip(docs, token_lines):
        expected = [vocab.token_to_id.get(t, 3) for t in line]
        assert doc.tokens.tolist() == expected
        assert doc.tokens.dtype == np.int64


def test_to_line_inverts_known_ids():
    vocab = Vocabulary(["a", "b", "c"], frozenset())
    assert vocab.to_line([2, 0, 1]) == "c a b"
    assert vocab.to_line([]) == ""


def test_document_len():
    d = Document(0, np.array([1, 2, 3], dtype=np.int64))
    assert len(d) == 3
