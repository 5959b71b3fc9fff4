import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmimask.corpus import Document
from pmimask.errors import AlignmentError, FormatError, ShardMismatchError, UndefinedDeltaError
from pmimask.masker import MaskingCandidate, MaskingDecision
from pmimask.rates import (
    RateTable,
    accumulate,
    approximate_mask,
    convergence_delta,
    fidelity_report,
    merge_rate_tables,
    read_rates_binary,
    windowed_medians,
    write_rates_binary,
    write_rates_tsv,
)
from pmimask.corpus import Vocabulary


def doc_of(tokens, doc_id=0):
    return Document(doc_id, np.array(tokens, dtype=np.int64))


def decision(doc_id, positions):
    return MaskingDecision(
        doc_id, MaskingCandidate(np.array(positions, dtype=np.int64), 0.0), [0.0], 0
    )


def table_from(vocab_size, occ, masked, target=0.15):
    t = RateTable.empty(vocab_size, target)
    t.occurrences = np.array(occ, dtype=np.int64)
    t.masked_count = np.array(masked, dtype=np.int64)
    return t


class TestRateTable:
    def test_rate_and_fallback(self):
        t = table_from(3, [4, 0, 2], [1, 0, 2])
        assert t.rate().tolist() == [0.25, 0.15, 1.0]

    def test_overall_rate(self):
        t = table_from(3, [4, 0, 2], [1, 0, 2])
        assert t.overall_rate() == 3 / 6

    def test_rescale_restores_target(self):
        t = table_from(2, [10, 10], [1, 5])  # overall 0.3, target 0.15
        scaled = t.rate(rescale=True)
        weighted = (scaled * t.occurrences).sum() / t.occurrences.sum()
        assert weighted == pytest.approx(0.15)

    def test_rescale_clips_at_one(self):
        t = table_from(2, [10, 10], [10, 0], target=0.9)
        assert t.rate(rescale=True).max() <= 1.0


class TestAccumulate:
    def test_counts_eligible_and_masked(self):
        t = RateTable.empty(4, 0.15)
        docs = [doc_of([1, 2, 1], 0), doc_of([3, 3], 1)]
        decs = [decision(0, [0]), decision(1, [0, 1])]
        accumulate(decs, docs, t)
        assert t.occurrences.tolist() == [0, 2, 1, 2]
        assert t.masked_count.tolist() == [0, 1, 0, 2]
        assert t.docs_processed == 2

    def test_never_masked_rate_zero(self):
        t = RateTable.empty(2, 0.15)
        accumulate([decision(0, [0])], [doc_of([0, 1], 0)], t)
        assert t.rate()[1] == 0.0

    def test_always_masked_rate_one(self):
        t = RateTable.empty(2, 0.15)
        accumulate([decision(0, [1])], [doc_of([0, 1], 0)], t)
        assert t.rate()[1] == 1.0

    def test_specials_not_counted(self):
        t = RateTable.empty(3, 0.15)
        accumulate([decision(0, [1])], [doc_of([0, 1, 0], 0)], t, special_ids=frozenset({0}))
        assert t.occurrences.tolist() == [0, 1, 0]

    def test_decisions_may_skip_documents(self):
        t = RateTable.empty(2, 0.15)
        docs = [doc_of([0], 0), doc_of([1], 1), doc_of([0], 2)]
        accumulate([decision(0, [0]), decision(2, [0])], docs, t)
        assert t.occurrences.tolist() == [2, 0]
        assert t.docs_processed == 2

    def test_decision_with_no_document_raises(self):
        t = RateTable.empty(2, 0.15)
        with pytest.raises(AlignmentError, match="no matching document"):
            accumulate([decision(5, [0])], [doc_of([0], 0)], t)

    def test_decision_behind_document_stream_raises(self):
        t = RateTable.empty(2, 0.15)
        docs = [doc_of([0], 0), doc_of([0], 2)]
        with pytest.raises(AlignmentError, match="arrived after"):
            accumulate([decision(1, [0])], docs, t)

    def test_out_of_order_decisions_raise(self):
        t = RateTable.empty(2, 0.15)
        docs = [doc_of([0], 0), doc_of([0], 1)]
        with pytest.raises(AlignmentError):
            accumulate([decision(1, [0]), decision(0, [0])], docs, t)


class TestMergeRateTables:
    def test_sums_componentwise(self):
        a = table_from(2, [1, 2], [0, 1])
        b = table_from(2, [3, 0], [2, 0])
        m = merge_rate_tables([a, b])
        assert m.occurrences.tolist() == [4, 2]
        assert m.masked_count.tolist() == [2, 1]

    def test_mismatch(self):
        with pytest.raises(ShardMismatchError):
            merge_rate_tables([RateTable.empty(2, 0.15), RateTable.empty(3, 0.15)])
        with pytest.raises(ShardMismatchError):
            merge_rate_tables([RateTable.empty(2, 0.15), RateTable.empty(2, 0.2)])

    def test_empty_list(self):
        with pytest.raises(ValueError):
            merge_rate_tables([])


class TestConvergenceDelta:
    def test_identity_is_zero(self):
        t = table_from(2, [4, 4], [1, 2])
        assert convergence_delta(t, t.copy()) == 0.0

    def test_uniform_shift(self):
        prev = table_from(2, [100, 100], [15, 15])
        curr = table_from(2, [100, 100], [16, 16])
        assert convergence_delta(prev, curr) == pytest.approx(0.01)

    def test_only_common_tokens_counted(self):
        prev = table_from(3, [10, 0, 10], [1, 0, 5])
        curr = table_from(3, [10, 10, 10], [2, 9, 5])
        # token 1 unseen in prev: delta over tokens 0 and 2 only
        assert convergence_delta(prev, curr) == pytest.approx((0.1 + 0.0) / 2)

    def test_no_common_tokens(self):
        prev = table_from(2, [1, 0], [0, 0])
        curr = table_from(2, [0, 1], [0, 0])
        with pytest.raises(UndefinedDeltaError):
            convergence_delta(prev, curr)

    def test_relative_mode(self):
        prev = table_from(1, [10], [1])
        curr = table_from(1, [10], [3])
        # 2*|0.3-0.1|/(0.3+0.1) = 1.0
        assert convergence_delta(prev, curr, "relative") == pytest.approx(1.0)

    def test_relative_mode_zero_rates(self):
        prev = table_from(1, [10], [0])
        curr = table_from(1, [10], [0])
        assert convergence_delta(prev, curr, "relative") == 0.0

    def test_unknown_mode(self):
        t = table_from(1, [1], [0])
        with pytest.raises(ValueError):
            convergence_delta(t, t, "squared")


class TestApproximateMask:
    def test_all_zero_rates_forces_one_position(self):
        t = table_from(3, [1, 1, 1], [0, 0, 0])
        out = approximate_mask(doc_of([0, 1, 2], 4), t, 0)
        assert out.tolist() == [0]  # tie on rate 0 -> lowest position

    def test_floor_picks_highest_rate_lowest_position(self):
        # token 2 at rate 1e-9: draws essentially never hit, so the
        # floor fires and must choose the FIRST position holding it
        t = table_from(3, [10**9, 10**9, 10**9], [0, 0, 1])
        out = approximate_mask(doc_of([0, 2, 1, 2], 0), t, 0)
        assert out.tolist() == [1]

    def test_all_one_rates_mask_everything(self):
        t = table_from(2, [1, 1], [1, 1])
        out = approximate_mask(doc_of([0, 1, 0, 1], 2), t, 7)
        assert out.tolist() == [0, 1, 2, 3]

    def test_unseen_token_uses_target_rate(self):
        t = RateTable.empty(2, 1.0)  # fallback rate 1 -> always masked
        out = approximate_mask(doc_of([0, 1], 0), t, 3)
        assert out.tolist() == [0, 1]

    def test_specials_excluded(self):
        t = table_from(3, [1, 1, 1], [1, 1, 1])
        out = approximate_mask(doc_of([2, 0, 1], 0), t, 0, special_ids=frozenset({2}))
        assert out.tolist() == [1, 2]

    def test_empty_document(self):
        t = RateTable.empty(2, 0.15)
        assert approximate_mask(doc_of([], 0), t, 0) is None

    def test_deterministic_and_epoch_sensitive(self):
        t = table_from(2, [10, 10], [5, 5])
        doc = doc_of([0, 1] * 20, 3)
        a = approximate_mask(doc, t, 9, epoch=0)
        b = approximate_mask(doc, t, 9, epoch=0)
        c = [approximate_mask(doc, t, 9, epoch=e).tolist() for e in range(1, 6)]
        assert a.tolist() == b.tolist()
        assert any(a.tolist() != other for other in c)

    def test_corpus_level_expectation(self):
        """Empirical masked fraction tracks the occurrence-weighted mean
        rate within +/-0.5% absolute over 10^6 eligible positions."""
        rng = np.random.default_rng(11)
        vocab_size = 50
        rates = rng.uniform(0.02, 0.4, vocab_size)
        occ = np.full(vocab_size, 1000, dtype=np.int64)
        masked = np.round(rates * 1000).astype(np.int64)
        t = table_from(vocab_size, occ, masked)
        eff = t.rate()

        total = 0
        hits = 0
        weighted = 0.0
        doc_len = 500
        for doc_id in range(2000):
            toks = rng.integers(0, vocab_size, doc_len)
            out = approximate_mask(doc_of(toks.tolist(), doc_id), t, 123)
            total += doc_len
            hits += len(out)
            weighted += eff[toks].sum()
        assert abs(hits / total - weighted / total) < 0.005


class TestFidelityReport:
    def test_identical_tables(self):
        t = table_from(3, [5, 5, 0], [1, 2, 0])
        rep = fidelity_report(t, t.copy())
        assert rep.mean_abs_diff == 0.0
        assert rep.max_abs_diff == 0.0
        assert rep.overall_a == rep.overall_b

    def test_disjoint_support_uses_fallback(self):
        a = table_from(2, [10, 0], [5, 0])  # rates [0.5, fallback 0.15]
        b = table_from(2, [0, 10], [0, 0])  # rates [fallback 0.15, 0.0]
        rep = fidelity_report(a, b)
        assert rep.token_ids.tolist() == [0, 1]
        assert rep.abs_diff.tolist() == pytest.approx([0.35, 0.15])

    def test_min_occurrences_filter(self):
        a = table_from(2, [100, 2], [50, 1])
        b = table_from(2, [100, 2], [40, 0])
        rep = fidelity_report(a, b, min_occurrences=10)
        assert rep.token_ids.tolist() == [0]
        assert rep.mean_abs_diff == pytest.approx(0.1)

    def test_vocab_mismatch(self):
        with pytest.raises(ShardMismatchError):
            fidelity_report(RateTable.empty(2, 0.15), RateTable.empty(3, 0.15))


def test_windowed_medians():
    vals = [9.0, 1.0, 5.0, 4.0, 4.0, 4.0, 7.0]
    assert windowed_medians(vals, 3) == [5.0, 4.0]
    assert windowed_medians(vals, 8) == []


class TestSerialization:
    def test_binary_roundtrip_exact(self, tmp_path):
        t = table_from(4, [5, 0, 7, 2], [1, 0, 7, 0], target=0.15)
        t.docs_processed = 42
        p = tmp_path / "r.bin"
        write_rates_binary(t, p)
        back = read_rates_binary(p)
        assert back.vocab_size == 4
        assert back.target_rate == 0.15
        assert back.docs_processed == 42
        assert back.occurrences.tolist() == t.occurrences.tolist()
        assert back.masked_count.tolist() == t.masked_count.tolist()
        assert back.rate().tolist() == t.rate().tolist()

    def test_tsv_format(self, tmp_path):
        vocab = Vocabulary(["a", "b"], frozenset())
        t = table_from(2, [4, 0], [1, 0])
        p = tmp_path / "r.tsv"
        write_rates_tsv(t, vocab, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "token\toccurrences\tmasked_count\trate"
        assert lines[1] == "a\t4\t1\t0.25"
        assert lines[2] == "b\t0\t0\t0.15"
        assert len(lines) == 3

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"RATX" + bytes(24))
        with pytest.raises(FormatError):
            read_rates_binary(p)

    def test_truncated_payload(self, tmp_path):
        t = table_from(2, [1, 1], [0, 0])
        p = tmp_path / "r.bin"
        write_rates_binary(t, p)
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(FormatError):
            read_rates_binary(p)


@given(
    st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=1, max_size=10)
)
def test_rate_invariants_property(pairs):
    occ = np.array([max(a, b) for a, b in pairs], dtype=np.int64)
    masked = np.array([min(a, b) for a, b in pairs], dtype=np.int64)
    t = table_from(len(pairs), occ, masked)
    r = t.rate()
    assert ((r >= 0.0) & (r <= 1.0)).all()
    seen = occ > 0
    np.testing.assert_allclose(r[seen] * occ[seen], masked[seen])
    assert (r[~seen] == 0.15).all()
