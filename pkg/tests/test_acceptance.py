"""Acceptance gate: nine end-to-end criteria, one test each.

Every test prints exactly one `ACCEPTANCE n: PASS` or `ACCEPTANCE n: FAIL`
line (run with `pytest -s` to see them on passing runs). The criteria:

1. fixture corpus scores 0.23 / 0.53 (±0.005) under identity / boosted weights
2. sparse inner product equals the dense oracle on 1,000 random instances
3. Cholesky reconstruction residual ≤ 1e-8·n, with and without RCM;
   indefinite input raises
4. benchmark trend: factorization beats the quartic baseline with growing
   speedup, and both kernels scale like their operation counts
5. inner-product time is flat in the matrix order at fixed support size
6. dot-product and augmented-cosine transforms reproduce the exact
   soft-cosine ranking
7. index search equals brute force for k ∈ {1, 10, all}; candidates are
   complete; expansion stays within the m·C bound
8. sparsifier contracts: symmetry, column budget, dominance, C=1 identity
9. persistence round trips: index (12 significant digits) and matrix (exact)
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np
import pytest

import softvsm as sv
from softvsm import (
    SparsifyConfig,
    batch_scm,
    build_vocabulary,
    cholesky,
    doc_for_cosine,
    doc_for_scm,
    dot_transformed,
    expand_query,
    index_corpus,
    inner_product_sparse,
    is_strictly_diagonally_dominant,
    load_index,
    query_for_cosine,
    query_for_dot,
    save_index,
    search,
    soft_cosine,
    sparsify,
    tokenize,
    uniform_weights,
    vectorize,
)
from softvsm import formats
from softvsm.bench import run_bench
from softvsm.core import NotPositiveDefinite

from helpers import (
    DOC1,
    DOC2,
    banded_similarity,
    dense_inner,
    random_doc_vector,
    random_sparse_similarity,
    rankings_agree,
)


@contextmanager
def acceptance(number: int):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {number}: FAIL")
        raise
    else:
        print(f"\nACCEPTANCE {number}: PASS")


def asymmetric_cap(rng, symmetric, cap):
    config = SparsifyConfig(
        max_per_column=cap,
        strategy="topc_asymmetric",
        column_order="as_is",
        dominance="none",
    )
    return sparsify(symmetric, None, config)


def exact_support_vector(rng, dim, m):
    idx = np.sort(rng.choice(dim, size=m, replace=False)).astype(np.int64)
    return sv.SparseDocVector(indices=idx, values=rng.uniform(0.1, 5.0, size=m), dim=dim)


def integral_corpus(rng, dim, count):
    width = len(str(count))
    columns = tuple(
        random_doc_vector(rng, dim, max_nnz=8, integral=True) for _ in range(count)
    )
    doc_ids = tuple(f"d{i:0{width}d}" for i in range(1, count + 1))
    return sv.CorpusMatrix(columns=columns, doc_ids=doc_ids)


def brute_force_ranking(corpus, query, weights, matrix):
    scored = [
        (doc_id, soft_cosine(query, column, weights, matrix))
        for doc_id, column in zip(corpus.doc_ids, corpus.columns)
    ]
    return sorted(scored, key=lambda item: (-item[1], item[0]))


def assert_full_ranking_matches(got, want):
    """Same documents, scores within 1e-10, same order up to near-ties."""
    assert {d for d, _ in got} == {d for d, _ in want}
    want_by_id = dict(want)
    for doc_id, score in got:
        assert score == pytest.approx(want_by_id[doc_id], rel=1e-10, abs=1e-12)
    ids = sorted(want_by_id)
    got_by_id = dict(got)
    sa = np.array([got_by_id[d] for d in ids])
    sb = np.array([want_by_id[d] for d in ids])
    assert rankings_agree(sa, sb)


# ---------------------------------------------------------------------------
# 1. fixture corpus golden scores
# ---------------------------------------------------------------------------


def test_acceptance_1_fixture_scores():
    with acceptance(1):
        docs = [tokenize(DOC1), tokenize(DOC2)]
        vocabulary = build_vocabulary(docs)
        n = len(vocabulary.terms)
        x = vectorize(docs[0], vocabulary)
        y = vectorize(docs[1], vocabulary)
        identity = sv.identity_similarity(n)

        plain = soft_cosine(x, y, uniform_weights(n), identity)
        assert abs(plain - 0.23) <= 0.005

        boosted = np.ones(n)
        for term in ("julius", "caesar"):
            boosted[vocabulary.terms.index(term)] = 2.0
        weighted = soft_cosine(x, y, sv.TermWeights(boosted), identity)
        assert abs(weighted - 0.53) <= 0.005


# ---------------------------------------------------------------------------
# 2. sparse inner product vs dense oracle, 1,000 instances
# ---------------------------------------------------------------------------


def test_acceptance_2_inner_product_oracle():
    with acceptance(2):
        rng = np.random.default_rng(20260816)
        instances = 0
        while instances < 1000:
            n = int(rng.integers(2, 301))
            cap = int(rng.integers(1, 21))
            m = int(rng.integers(1, 41))
            matrix = random_sparse_similarity(
                rng, n, cap, negatives=bool(rng.random() < 0.3), dominant=False
            )
            if rng.random() < 0.5:
                matrix = asymmetric_cap(rng, matrix, cap)
            dense = matrix.to_dense()
            for _ in range(5):
                weights = sv.TermWeights(rng.uniform(0.0, 3.0, n))
                x = random_doc_vector(rng, n, max_nnz=min(m, n))
                y = random_doc_vector(rng, n, max_nnz=min(m, n))
                got = inner_product_sparse(x, y, weights, matrix)
                want = dense_inner(x.to_dense(), y.to_dense(), weights.w, dense)
                assert got == pytest.approx(want, rel=1e-10, abs=1e-12)
                instances += 1


# ---------------------------------------------------------------------------
# 3. Cholesky reconstruction, with and without RCM; indefinite raises
# ---------------------------------------------------------------------------


def test_acceptance_3_cholesky_reconstruction():
    with acceptance(3):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 301))
            cap = int(rng.integers(2, 9))
            matrix = random_sparse_similarity(rng, n, cap, dominant=True)
            dense = matrix.to_dense()
            for permutation in ("none", "rcm"):
                factor = cholesky(matrix, permutation)
                residual = np.max(np.abs(factor.reconstruct_dense() - dense))
                assert residual <= 1e-8 * n

        indefinite = np.full((3, 3), -0.9)
        np.fill_diagonal(indefinite, 1.0)
        bad = sv.SimilarityMatrix.from_dense_sim(indefinite)
        for permutation in ("none", "rcm"):
            with pytest.raises(NotPositiveDefinite):
                cholesky(bad, permutation)


# ---------------------------------------------------------------------------
# 4. benchmark trend
# ---------------------------------------------------------------------------


def minimax_cost_deviation(times, sizes, power):
    """Smallest d such that some curve c·n^p covers every point within d×."""
    ratios = np.array(times) / np.array(sizes, dtype=float) ** power
    return float(np.sqrt(ratios.max() / ratios.min()))


def test_acceptance_4_benchmark_trend():
    with acceptance(4):
        sizes = (100, 200, 300, 400, 500, 1000)
        report = run_bench(sizes, iterations=10, seed=0)
        mean = {(r.n, r.algorithm): r.mean_seconds for r in report.rows}
        speedups = report.speedups()

        for n in sizes:
            assert speedups[n] > 1.0, f"baseline not slower at n={n}"
        assert speedups[100] < speedups[500] < speedups[1000]

        cholesky_dev = minimax_cost_deviation(
            [mean[(n, "cholesky")] for n in sizes], sizes, power=3
        )
        assert cholesky_dev <= 2.0, f"cholesky cubic window: {cholesky_dev:.2f}x"

        window = (100, 200, 300, 400)
        gaussian_dev = minimax_cost_deviation(
            [mean[(n, "gaussian")] for n in window], window, power=4
        )
        assert gaussian_dev <= 2.0, f"gaussian quartic window: {gaussian_dev:.2f}x"


# ---------------------------------------------------------------------------
# 5. inner-product time flat in matrix order
# ---------------------------------------------------------------------------


def test_acceptance_5_inner_product_time_flat():
    with acceptance(5):
        rng = np.random.default_rng(5)
        m, pairs, repeats = 20, 20, 30
        best = {}
        for n in (1_000, 10_000, 100_000):
            matrix = banded_similarity(n, 4, rng)  # ≤ 9 non-zeros per column
            assert int(matrix.col_nnz().max()) <= 10
            weights = sv.TermWeights(rng.uniform(0.5, 2.0, n))
            batch = [
                (exact_support_vector(rng, n, m), exact_support_vector(rng, n, m))
                for _ in range(pairs)
            ]
            timings = []
            for _ in range(repeats):
                start = time.perf_counter()
                for x, y in batch:
                    inner_product_sparse(x, y, weights, matrix)
                timings.append(time.perf_counter() - start)
            best[n] = min(timings) / pairs
        times = list(best.values())
        assert max(times) <= 3.0 * min(times), best


# ---------------------------------------------------------------------------
# 6. transforms reproduce the soft-cosine ranking
# ---------------------------------------------------------------------------


def test_acceptance_6_transform_ranking_equivalence():
    with acceptance(6):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(10, 61))
            doc_count = int(rng.integers(5, 201))
            matrix = random_sparse_similarity(rng, n, cap=int(rng.integers(2, 7)))
            weights = sv.TermWeights(rng.uniform(0.1, 2.0, n))
            documents = [random_doc_vector(rng, n, max_nnz=8) for _ in range(doc_count)]
            docs_dot = [doc_for_scm(y, weights, matrix) for y in documents]
            docs_cos = [doc_for_cosine(y, weights, matrix) for y in documents]
            for _ in range(20):
                query = random_doc_vector(rng, n, max_nnz=8)
                scm = np.array(
                    [soft_cosine(query, y, weights, matrix) for y in documents]
                )
                q_dot = query_for_dot(query, weights, matrix)
                dots = np.array([dot_transformed(q_dot, d) for d in docs_dot])
                assert rankings_agree(dots, scm)
                q_cos = query_for_cosine(query, weights, matrix)
                cosines = np.array([dot_transformed(q_cos, d) for d in docs_cos])
                assert rankings_agree(cosines, scm)


# ---------------------------------------------------------------------------
# 7. index search vs brute force; completeness; expansion bound
# ---------------------------------------------------------------------------


def test_acceptance_7_index_exactness_and_completeness():
    with acceptance(7):
        rng = np.random.default_rng(7)
        for corpus_round in range(3):
            n = int(rng.integers(40, 81))
            corpus = integral_corpus(rng, n, 500)
            matrix = random_sparse_similarity(rng, n, cap=int(rng.integers(2, 7)))
            weights = sv.TermWeights(rng.uniform(0.25, 2.0, n))
            vocabulary = sv.Vocabulary(
                terms=tuple(f"t{i}" for i in range(n)),
                doc_freq=np.ones(n, dtype=np.int64),
            )
            index = index_corpus(corpus, weights, matrix, vocabulary)
            max_col = int(matrix.col_nnz().max())
            position_of = {doc_id: p for p, doc_id in enumerate(index.doc_ids)}

            for _ in range(15):
                query = random_doc_vector(rng, n, max_nnz=10)
                want = brute_force_ranking(corpus, query, weights, matrix)
                full = search(index, query, weights, matrix, k=len(corpus))
                assert_full_ranking_matches(full, want)
                for k in (1, 10):
                    assert search(index, query, weights, matrix, k=k) == full[:k]

                expanded = expand_query(query, matrix)
                assert len(expanded) <= query.nnz * max_col
                candidates = set()
                for term in expanded:
                    candidates.update(index.postings[term].positions.tolist())
                for doc_id, score in want:
                    if score != 0.0:
                        assert position_of[doc_id] in candidates


# ---------------------------------------------------------------------------
# 8. sparsifier contracts
# ---------------------------------------------------------------------------


def random_dense_unit_diagonal(rng, n):
    a = rng.uniform(-0.95, 0.95, size=(n, n))
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 1.0)
    return sv.SimilarityMatrix.from_dense_sim(a)


def test_acceptance_8_sparsifier_contracts():
    with acceptance(8):
        rng = np.random.default_rng(8)
        for _ in range(25):
            n = int(rng.integers(3, 61))
            matrix = random_dense_unit_diagonal(rng, n)
            cap = int(rng.integers(2, 7))

            capped = sparsify(
                matrix,
                None,
                SparsifyConfig(
                    max_per_column=cap,
                    strategy="greedy_symmetric",
                    column_order="as_is",
                    dominance="none",
                ),
            )
            assert capped.symmetric
            dense = capped.to_dense()
            np.testing.assert_array_equal(dense, dense.T)
            assert int(capped.col_nnz().max()) <= cap

            dominant = sparsify(
                matrix,
                None,
                SparsifyConfig(
                    max_per_column=cap,
                    strategy="greedy_symmetric",
                    column_order="as_is",
                    dominance="strict_diagonal",
                ),
            )
            assert is_strictly_diagonally_dominant(dominant)
            for permutation in ("none", "rcm"):
                cholesky(dominant, permutation)

            single = sparsify(
                matrix,
                None,
                SparsifyConfig(
                    max_per_column=1,
                    strategy="greedy_symmetric",
                    column_order="as_is",
                    dominance="none",
                ),
            )
            assert single.nnz == n
            np.testing.assert_array_equal(single.to_dense(), np.eye(n))


# ---------------------------------------------------------------------------
# 9. persistence round trips
# ---------------------------------------------------------------------------


def formatted_hits(hits):
    return [(doc_id, f"{score:.12g}") for doc_id, score in hits]


def test_acceptance_9_persistence_round_trips(tmp_path):
    with acceptance(9):
        rng = np.random.default_rng(9)
        n = 50
        corpus = integral_corpus(rng, n, 60)
        matrix = random_sparse_similarity(rng, n, cap=5)
        weights = sv.TermWeights(rng.uniform(0.5, 2.0, n))
        vocabulary = sv.Vocabulary(
            terms=tuple(f"t{i}" for i in range(n)),
            doc_freq=np.ones(n, dtype=np.int64),
        )
        index = index_corpus(corpus, weights, matrix, vocabulary)
        save_index(index, tmp_path / "idx")
        loaded = load_index(tmp_path / "idx")
        for _ in range(20):
            query = random_doc_vector(rng, n, max_nnz=10)
            before = search(index, query, weights, matrix, k=len(corpus))
            after = search(loaded, query, weights, matrix, k=len(corpus))
            assert formatted_hits(after) == formatted_hits(before)

        for symmetric in (False, True):
            source = random_sparse_similarity(rng, 40, cap=6)
            path = tmp_path / f"matrix_{symmetric}.mm"
            formats.write_matrix_market(path, source, symmetric=symmetric)
            back, flagged = formats.read_matrix_market(path)
            assert flagged is symmetric
            np.testing.assert_array_equal(back.indptr, source.indptr)
            np.testing.assert_array_equal(back.indices, source.indices)
            np.testing.assert_array_equal(back.data, source.data)
