from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import softvsm as sv
from softvsm.simatrix import (
    SparsifyConfig,
    build_similarity_edit,
    build_similarity_embedding,
    is_strictly_diagonally_dominant,
    levenshtein,
    sparsify,
)
from helpers import dense_cosine_similarity, random_sparse_similarity, textbook_levenshtein


def make_vocab(k: int) -> sv.Vocabulary:
    return sv.Vocabulary(
        terms=tuple(f"t{i}" for i in range(k)),
        doc_freq=np.ones(k, dtype=np.int64),
    )


class TestLevenshtein:
    def test_known_distance(self):
        assert levenshtein("dead", "killed") == 5
        assert textbook_levenshtein("dead", "killed") == 5

    def test_identical_and_empty(self):
        assert levenshtein("abc", "abc") == 0
        assert levenshtein("", "abc") == 3
        assert levenshtein("", "") == 0

    @settings(deadline=None, max_examples=100)
    @given(st.text(alphabet="abcd", max_size=8), st.text(alphabet="abcd", max_size=8))
    def test_matches_textbook_dp(self, a, b):
        assert levenshtein(a, b) == textbook_levenshtein(a, b)


class TestEmbeddingBuilder:
    def test_identical_embeddings_give_similarity_one(self):
        vocab = make_vocab(2)
        e = {"t0": np.array([1.0, 2.0]), "t1": np.array([2.0, 4.0])}
        s = build_similarity_embedding(vocab, e)
        d = s.to_dense()
        assert d[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert d[0, 1] <= 1.0  # clipped, container invariant holds

    def test_orthogonal_embeddings_give_identity(self):
        vocab = make_vocab(2)
        e = {"t0": np.array([1.0, 0.0]), "t1": np.array([0.0, 3.0])}
        s = build_similarity_embedding(vocab, e)
        np.testing.assert_array_equal(s.to_dense(), np.eye(2))

    def test_negative_cosine_clamped_to_zero(self):
        vocab = make_vocab(2)
        e = {"t0": np.array([1.0, 0.0]), "t1": np.array([-1.0, 0.1])}
        s = build_similarity_embedding(vocab, e)
        np.testing.assert_array_equal(s.to_dense(), np.eye(2))

    def test_matches_dense_cosine_oracle(self):
        rng = np.random.default_rng(42)
        k = 10
        vocab = make_vocab(k)
        vecs = rng.normal(size=(k, 6))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        emb = {f"t{i}": vecs[i] for i in range(k)}
        s = build_similarity_embedding(vocab, emb, threshold=0.0)
        np.testing.assert_allclose(
            s.to_dense(), dense_cosine_similarity(vecs, 0.0), atol=1e-12
        )
        assert s.symmetric and s.nonnegative

    def test_threshold_drops_weak_pairs(self):
        rng = np.random.default_rng(7)
        k = 8
        vocab = make_vocab(k)
        vecs = rng.normal(size=(k, 5))
        emb = {f"t{i}": vecs[i] for i in range(k)}
        s = build_similarity_embedding(vocab, emb, threshold=0.6)
        d = s.to_dense()
        off = d - np.eye(k)
        assert np.all((off == 0) | (off >= 0.6))

    def test_missing_embedding_leaves_term_isolated(self):
        vocab = make_vocab(3)
        e = {"t0": np.array([1.0, 1.0]), "t2": np.array([1.0, 1.0])}
        s = build_similarity_embedding(vocab, e)
        d = s.to_dense()
        assert d[1, 0] == d[0, 1] == d[1, 2] == d[2, 1] == 0.0
        assert d[0, 2] == pytest.approx(1.0)

    def test_zero_embedding_treated_as_missing(self):
        vocab = make_vocab(2)
        e = {"t0": np.zeros(3), "t1": np.ones(3)}
        s = build_similarity_embedding(vocab, e)
        np.testing.assert_array_equal(s.to_dense(), np.eye(2))

    def test_dimension_mismatch_raises(self):
        vocab = make_vocab(2)
        e = {"t0": np.ones(3), "t1": np.ones(4)}
        with pytest.raises(sv.DimensionMismatch):
            build_similarity_embedding(vocab, e)


class TestEditBuilder:
    def test_formula_value(self):
        vocab = sv.Vocabulary(
            terms=("dead", "killed"), doc_freq=np.array([1, 1])
        )
        s = build_similarity_edit(vocab, alpha=0.8, beta=5.0)
        expected = 0.8 * (1.0 - 5.0 / 6.0) ** 5.0
        assert s.to_dense()[0, 1] == pytest.approx(expected, rel=1e-12)

    def test_diagonal_is_one_and_symmetric(self):
        vocab = sv.Vocabulary(
            terms=("cat", "cart", "dog"), doc_freq=np.array([1, 1, 1])
        )
        s = build_similarity_edit(vocab)
        d = s.to_dense()
        np.testing.assert_array_equal(np.diag(d), np.ones(3))
        np.testing.assert_array_equal(d, d.T)
        assert s.symmetric and s.nonnegative

    def test_high_threshold_gives_identity(self):
        vocab = sv.Vocabulary(terms=("cat", "cart"), doc_freq=np.array([1, 1]))
        s = build_similarity_edit(vocab, alpha=0.8, threshold=0.9)
        np.testing.assert_array_equal(s.to_dense(), np.eye(2))

    def test_parameter_validation(self):
        vocab = make_vocab(2)
        with pytest.raises(sv.SoftVsmError):
            build_similarity_edit(vocab, alpha=0.0)
        with pytest.raises(sv.SoftVsmError):
            build_similarity_edit(vocab, alpha=1.5)
        with pytest.raises(sv.SoftVsmError):
            build_similarity_edit(vocab, beta=0.0)
        with pytest.raises(sv.SoftVsmError):
            build_similarity_edit(vocab, threshold=2.0)


# ---------------------------------------------------------------------------
# Sparsification oracles: dense step-by-step simulations of both strategies


def topc_oracle(a: np.ndarray, cap: int, threshold: float) -> np.ndarray:
    n = a.shape[0]
    out = np.eye(n)
    for j in range(n):
        cand = [
            (i, a[i, j])
            for i in range(n)
            if i != j and a[i, j] != 0.0 and abs(a[i, j]) >= threshold
        ]
        cand.sort(key=lambda p: (-abs(p[1]), p[0]))
        for i, v in cand[: cap - 1]:
            out[i, j] = v
    return out


def greedy_oracle(a: np.ndarray, cap: int, order, threshold: float) -> np.ndarray:
    n = a.shape[0]
    out = np.eye(n)
    counts = np.ones(n, dtype=int)
    placed = np.zeros((n, n), dtype=bool)
    for j in order:
        cand = [
            (i, a[i, j])
            for i in range(n)
            if i != j and a[i, j] != 0.0 and abs(a[i, j]) >= threshold
        ]
        cand.sort(key=lambda p: (-abs(p[1]), p[0]))
        for i, v in cand:
            if placed[i, j]:
                continue
            if counts[j] >= cap:
                break
            if counts[i] >= cap:
                continue
            out[i, j] = out[j, i] = v
            placed[j, i] = True
            counts[i] += 1
            counts[j] += 1
    return out


class TestSparsify:
    def test_cap_one_gives_identity_pattern(self):
        rng = np.random.default_rng(42)
        s = random_sparse_similarity(rng, 20, 6)
        for strategy in ("topc_asymmetric", "greedy_symmetric"):
            out = sparsify(
                s, None, SparsifyConfig(1, strategy=strategy, column_order="as_is")
            )
            np.testing.assert_array_equal(out.to_dense(), np.eye(20))

    def test_noop_returns_input_object(self):
        rng = np.random.default_rng(42)
        s = random_sparse_similarity(rng, 15, 4, dominant=True)
        cfg = SparsifyConfig(10, strategy="greedy_symmetric", column_order="as_is")
        assert sparsify(s, None, cfg) is s

    def test_topc_matches_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(20):
            s = random_sparse_similarity(rng, 30, 8, negatives=True)
            cap = int(rng.integers(1, 7))
            out = sparsify(
                s,
                None,
                SparsifyConfig(
                    cap, strategy="topc_asymmetric", column_order="as_is",
                    dominance="none",
                ),
            )
            np.testing.assert_array_equal(out.to_dense(), topc_oracle(s.to_dense(), cap, 0.0))
            assert np.max(out.col_nnz()) <= cap

    def test_greedy_matches_oracle_50x50(self):
        rng = np.random.default_rng(42)
        for trial in range(10):
            s = random_sparse_similarity(rng, 50, 12, negatives=(trial % 2 == 0))
            out = sparsify(
                s,
                None,
                SparsifyConfig(
                    5, strategy="greedy_symmetric", column_order="as_is",
                    dominance="none",
                ),
            )
            expected = greedy_oracle(s.to_dense(), 5, range(50), 0.0)
            np.testing.assert_array_equal(out.to_dense(), expected)
            assert out.symmetric
            assert np.max(out.col_nnz()) <= 5

    def test_greedy_doc_freq_order_matches_oracle(self):
        rng = np.random.default_rng(7)
        n = 30
        vocab = sv.Vocabulary(
            terms=tuple(f"t{i}" for i in range(n)),
            doc_freq=rng.integers(1, 50, size=n),
        )
        s = random_sparse_similarity(rng, n, 10)
        out = sparsify(s, vocab, SparsifyConfig(4, dominance="none"))
        order = np.argsort(vocab.doc_freq, kind="stable")
        np.testing.assert_array_equal(
            out.to_dense(), greedy_oracle(s.to_dense(), 4, order, 0.0)
        )

    def test_threshold_prefilter(self):
        a = np.eye(3)
        a[0, 1] = a[1, 0] = 0.5
        a[1, 2] = a[2, 1] = 0.2
        s = sv.SimilarityMatrix.from_dense_sim(a)
        out = sparsify(
            s, None,
            SparsifyConfig(5, column_order="as_is", dominance="none", threshold=0.3),
        )
        expected = np.eye(3)
        expected[0, 1] = expected[1, 0] = 0.5
        np.testing.assert_array_equal(out.to_dense(), expected)

    def test_greedy_requires_symmetric(self):
        a = np.eye(3)
        a[0, 1] = 0.5
        s = sv.SimilarityMatrix.from_dense_sim(a)
        with pytest.raises(sv.SoftVsmError):
            sparsify(s, None, SparsifyConfig(2, column_order="as_is"))

    def test_doc_freq_order_requires_vocabulary(self):
        s = sv.identity_similarity(3)
        with pytest.raises(sv.SoftVsmError):
            sparsify(s, None, SparsifyConfig(2, column_order="increasing_doc_freq"))

    def test_dominance_rescale_yields_dominant_factorizable_matrix(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            s = random_sparse_similarity(rng, 40, 10, dominant=False)
            out = sparsify(
                s, None,
                SparsifyConfig(
                    6, strategy="greedy_symmetric", column_order="as_is",
                    dominance="strict_diagonal",
                ),
            )
            assert is_strictly_diagonally_dominant(out)
            assert out.symmetric
            np.linalg.cholesky(out.to_dense())  # PD: must not raise

    def test_dominance_rescale_preserves_asymmetric_inputs_columnwise(self):
        a = np.eye(3)
        a[0, 1] = 0.9
        a[2, 1] = 0.8  # column 1 mass 1.7 -> rescale
        a[1, 0] = 0.3
        s = sv.SimilarityMatrix.from_dense_sim(a)
        out = sparsify(
            s, None,
            SparsifyConfig(
                5, strategy="topc_asymmetric", column_order="as_is",
                dominance="strict_diagonal",
            ),
        )
        d = out.to_dense()
        f1 = (1.0 - 1e-6) / 1.7
        assert d[0, 1] == pytest.approx(0.9 * f1)
        assert d[2, 1] == pytest.approx(0.8 * f1)
        assert d[1, 0] == 0.3  # column 0 already dominant, untouched
        assert is_strictly_diagonally_dominant(out)

    def test_config_validation(self):
        with pytest.raises(sv.SoftVsmError):
            SparsifyConfig(0)
        with pytest.raises(sv.SoftVsmError):
            SparsifyConfig(2, strategy="nope")
        with pytest.raises(sv.SoftVsmError):
            SparsifyConfig(2, column_order="nope")
        with pytest.raises(sv.SoftVsmError):
            SparsifyConfig(2, dominance="nope")
        with pytest.raises(sv.SoftVsmError):
            SparsifyConfig(2, threshold=1.5)

    def test_vocabulary_size_checked(self):
        s = sv.identity_similarity(3)
        vocab = make_vocab(2)
        with pytest.raises(sv.DimensionMismatch):
            sparsify(s, vocab, SparsifyConfig(2))

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_topc_kept_set_shrinks_with_threshold(self, seed, cap):
        rng = np.random.default_rng(seed)
        s = random_sparse_similarity(rng, 15, 6)
        base = SparsifyConfig(
            cap, strategy="topc_asymmetric", column_order="as_is", dominance="none"
        )
        lo = sparsify(s, None, base)
        hi = sparsify(
            s, None,
            SparsifyConfig(
                cap, strategy="topc_asymmetric", column_order="as_is",
                dominance="none", threshold=0.5,
            ),
        )
        assert hi.nnz <= lo.nnz

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    def test_greedy_output_is_entry_subset(self, seed, cap):
        rng = np.random.default_rng(seed)
        s = random_sparse_similarity(rng, 20, 8, negatives=True)
        out = sparsify(
            s, None,
            SparsifyConfig(
                cap, strategy="greedy_symmetric", column_order="as_is",
                dominance="none",
            ),
        )
        a, b = s.to_dense(), out.to_dense()
        mask = b != 0.0
        np.testing.assert_array_equal(b[mask], a[mask])
        assert out.symmetric
        assert np.max(out.col_nnz()) <= cap


class TestDominanceCheck:
    def test_identity_is_dominant(self):
        assert is_strictly_diagonally_dominant(sv.identity_similarity(4))

    def test_mass_one_is_not_strict(self):
        a = np.eye(2)
        a[0, 1] = a[1, 0] = 1.0
        s = sv.SimilarityMatrix.from_dense_sim(a)
        assert not is_strictly_diagonally_dominant(s)

    def test_below_one_is_dominant(self):
        a = np.eye(2)
        a[0, 1] = a[1, 0] = 0.99
        s = sv.SimilarityMatrix.from_dense_sim(a)
        assert is_strictly_diagonally_dominant(s)
