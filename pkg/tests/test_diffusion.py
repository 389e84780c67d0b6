import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lingeo.corpus import Vocabulary, count_matrix
from lingeo.diffusion import (ContextualTable, DiffusionConfig, NgramTable,
                              contextual_distributions, diffusion_kernel,
                              hellinger_affinity, load_ngram_table,
                              ngram_contextual_distributions)

VOCAB = Vocabulary(["a", "b", "c"])


def toy_table():
    dm = count_matrix([["a", "a", "b"], ["b", "c"]], VOCAB)
    return contextual_distributions(dm.terms)


class TestContextualDistributions:
    def test_word_in_one_document(self):
        q_a = toy_table().row("a")
        assert np.allclose(q_a, [2 / 3, 1 / 3, 0.0], atol=1e-12)

    def test_word_in_two_documents(self):
        q_b = toy_table().row("b")
        assert np.allclose(q_b, [1 / 3, 5 / 12, 1 / 4], atol=1e-12)

    def test_single_document_corpus(self):
        dm = count_matrix([["a", "a", "b", "c"]], VOCAB)
        table = contextual_distributions(dm.terms)
        expected = np.array([0.5, 0.25, 0.25])
        for w in "abc":
            assert np.allclose(table.row(w), expected, atol=1e-12)

    def test_zero_support_word_self_context(self):
        dm = count_matrix([["a"]], VOCAB)
        table = contextual_distributions(dm.terms)
        assert np.allclose(table.row("b"), [0.0, 1.0, 0.0])
        assert table.support_count.tolist() == [1, 0, 0]

    def test_empty_matrix_rejected(self):
        dm = count_matrix([], VOCAB)
        with pytest.raises(ValueError, match="empty"):
            contextual_distributions(dm.terms)

    def test_duplicated_corpus_unchanged(self):
        docs = [["a", "a", "b"], ["b", "c"], ["c", "a"]]
        t1 = contextual_distributions(count_matrix(docs, VOCAB).terms)
        t2 = contextual_distributions(count_matrix(docs + docs, VOCAB).terms)
        assert np.abs((t1.q - t2.q).toarray()).max() <= 1e-12


class TestNgramDistributions:
    def test_single_trigram(self):
        table = NgramTable(records=((("a", "b", "c"), 1),), n=3)
        ctx = ngram_contextual_distributions(table, VOCAB)
        assert np.allclose(ctx.row("a"), [1 / 3, 1 / 3, 1 / 3], atol=1e-12)

    def test_repeated_token_gram(self):
        table = NgramTable(records=((("a", "b", "b"), 1),), n=3)
        ctx = ngram_contextual_distributions(table, VOCAB)
        assert np.allclose(ctx.row("a"), [1 / 3, 2 / 3, 0.0], atol=1e-12)

    def test_oov_token_dropped_then_normalized(self):
        table = NgramTable(records=((("a", "b", "x"), 1),), n=3)
        ctx = ngram_contextual_distributions(table, VOCAB)
        assert np.allclose(ctx.row("a"), [0.5, 0.5, 0.0], atol=1e-12)

    def test_no_vocab_overlap_rejected(self):
        table = NgramTable(records=((("x", "y", "z"), 4),), n=3)
        with pytest.raises(ValueError, match="no gram contains any vocabulary word"):
            ngram_contextual_distributions(table, VOCAB)

    def test_count_weighting_matches_repetition(self):
        weighted = NgramTable(records=((("a", "b", "c"), 3), (("a", "a", "b"), 1)), n=3)
        repeated = NgramTable(records=((("a", "b", "c"), 1),) * 3
                              + ((("a", "a", "b"), 1),), n=3)
        q1 = ngram_contextual_distributions(weighted, VOCAB).q.toarray()
        q2 = ngram_contextual_distributions(repeated, VOCAB).q.toarray()
        assert np.allclose(q1, q2, atol=1e-12)

    def test_whole_documents_as_grams_match_corpus_estimate(self):
        docs = [["a", "a", "b"], ["b", "c"]]
        as_grams = NgramTable(records=tuple((tuple(d), 1) for d in docs), n=2)
        q_grams = ngram_contextual_distributions(as_grams, VOCAB).q.toarray()
        q_docs = contextual_distributions(count_matrix(docs, VOCAB).terms).q.toarray()
        assert np.allclose(q_grams, q_docs, atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError, match=">= 2"):
            NgramTable(records=(), n=1)
        with pytest.raises(ValueError, match="nonpositive"):
            NgramTable(records=((("a", "b"), 0),), n=2)


class TestHellingerAffinity:
    def test_identical(self):
        q = np.array([0.2, 0.5, 0.3])
        assert hellinger_affinity(q, q) == 1.0

    def test_disjoint(self):
        assert hellinger_affinity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_hand_value(self):
        q_a = np.array([2 / 3, 1 / 3, 0.0])
        q_b = np.array([1 / 3, 5 / 12, 1 / 4])
        expected = np.sqrt(2 / 9) + np.sqrt(5 / 36)
        assert np.isclose(hellinger_affinity(q_a, q_b), expected, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hellinger_affinity(np.ones(2), np.ones(3))


class TestDiffusionKernel:
    def test_unit_diagonal_exact(self):
        T = diffusion_kernel(toy_table(), DiffusionConfig(c=1.0))
        assert (np.diag(T.matrix) == 1.0).all()

    def test_disjoint_support_entry(self):
        dm = count_matrix([["a", "a"], ["b", "b"]], Vocabulary(["a", "b"]))
        T = diffusion_kernel(contextual_distributions(dm.terms), DiffusionConfig(c=1.0))
        assert np.isclose(T.matrix[0, 1], np.exp(-(np.pi / 2) ** 2), atol=1e-12)
        assert np.isclose(T.matrix[0, 1], 0.08480, atol=1e-5)

    def test_hand_value(self):
        table = toy_table()
        T = diffusion_kernel(table, DiffusionConfig(c=1.0))
        aff = hellinger_affinity(table.row("a"), table.row("b"))
        assert np.isclose(T.matrix[0, 1], np.exp(-np.arccos(aff) ** 2), atol=1e-9)

    def test_symmetry_exact_and_range(self):
        T = diffusion_kernel(toy_table(), DiffusionConfig(c=2.0)).matrix
        assert np.array_equal(T, T.T)
        assert (T > 0.0).all() and (T <= 1.0).all()

    def test_monotone_in_scale(self):
        table = toy_table()
        values = [diffusion_kernel(table, DiffusionConfig(c=c)).matrix[0, 2]
                  for c in (0.5, 1.0, 2.0)]
        assert values[0] > values[1] > values[2]

    def test_scale_validated(self):
        with pytest.raises(ValueError, match="positive"):
            DiffusionConfig(c=0.0)


@given(st.lists(st.lists(st.sampled_from("abcde"), min_size=1, max_size=12),
                min_size=1, max_size=6))
@settings(max_examples=50, deadline=None)
def test_rows_are_distributions(docs):
    words = sorted({t for d in docs for t in d})
    vocab = Vocabulary(words)
    table = contextual_distributions(count_matrix(docs, vocab).terms)
    sums = np.asarray(table.q.sum(axis=1)).ravel()
    assert np.abs(sums - 1.0).max() <= 1e-9
    assert table.q.toarray().min() >= 0.0


class TestNgramFile:
    def test_load_and_filter(self, tmp_path):
        path = tmp_path / "grams.tsv"
        path.write_text("a b c\t5\nx y z\t2\na a b\t1\n", encoding="utf-8")
        table = load_ngram_table(path, n=3, vocab=VOCAB)
        assert len(table.records) == 2
        assert table.records[0] == (("a", "b", "c"), 5)

    def test_bad_lines(self, tmp_path):
        path = tmp_path / "grams.tsv"
        path.write_text("a b c 5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected"):
            load_ngram_table(path, n=3)
        path.write_text("a b\t5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="3-gram"):
            load_ngram_table(path, n=3)
        path.write_text("a b c\t0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="positive"):
            load_ngram_table(path, n=3)
