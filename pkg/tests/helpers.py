"""Shared test oracles and generators.

Oracles here are deliberately naive re-implementations (dense algebra,
textbook DP, brute-force rescans) so the package's sparse fast paths are
checked against independent slow paths.
"""

from __future__ import annotations

import numpy as np

from softvsm import CscMatrix, SimilarityMatrix, SparseDocVector

# ---------------------------------------------------------------------------
# Two-document fixture used throughout (frozen expected values)

DOC1 = "When Antony found Julius Caesar dead"
DOC2 = "I did enact Julius Caesar: I was killed i' the Capitol"

FIXTURE_TERMS = [
    "when", "antony", "found", "julius", "caesar", "dead",
    "i", "did", "enact", "was", "killed", "i'", "the", "capitol",
]

# dense count vectors over FIXTURE_TERMS
FIXTURE_V1 = np.array([1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0], dtype=float)
FIXTURE_V2 = np.array([0, 0, 0, 1, 1, 0, 2, 1, 1, 1, 1, 1, 1, 1], dtype=float)

# weight 2 on julius/caesar, 1 elsewhere
FIXTURE_WEIGHTS = np.array([1, 1, 1, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1], dtype=float)

# plain-cosine and weighted scores for the identity similarity matrix
FIXTURE_SCORE_UNIFORM = 2.0 / np.sqrt(6.0 * 13.0)   # ~0.2265
FIXTURE_SCORE_WEIGHTED = 8.0 / np.sqrt(12.0 * 19.0)  # ~0.5298


# ---------------------------------------------------------------------------
# Oracles


def brute_doc_freq(docs: list[list[str]], term: str) -> int:
    """Document frequency by rescanning every document."""
    return sum(1 for d in docs if term in d)


def dense_inner(x: np.ndarray, y: np.ndarray, w: np.ndarray, s: np.ndarray) -> float:
    """(Wx)' S (Wy) as a dense triple product."""
    return float((w * x) @ s @ (w * y))


def dense_scm(x: np.ndarray, y: np.ndarray, w: np.ndarray, s: np.ndarray) -> float:
    return dense_inner(x, y, w, s) / np.sqrt(
        dense_inner(x, x, w, s) * dense_inner(y, y, w, s)
    )


def textbook_levenshtein(a: str, b: str) -> int:
    """Full-table edit distance DP (insert/delete/substitute, unit costs)."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[m][n]


def dense_cosine_similarity(vectors: np.ndarray, threshold: float) -> np.ndarray:
    """Pairwise clamped-cosine oracle: max(0, cos) kept when >= threshold."""
    k = vectors.shape[0]
    out = np.eye(k)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            ni = np.linalg.norm(vectors[i])
            nj = np.linalg.norm(vectors[j])
            if ni == 0 or nj == 0:
                continue
            c = max(0.0, float(vectors[i] @ vectors[j] / (ni * nj)))
            if c >= threshold and c > 0:
                out[i, j] = c
    return out


def bandwidth(a: np.ndarray) -> int:
    """Max |i - j| over non-zero entries of a dense pattern."""
    rows, cols = np.nonzero(a)
    return int(np.max(np.abs(rows - cols))) if len(rows) else 0


# ---------------------------------------------------------------------------
# Random instance generators (independent of the package's builders)


def random_sparse_similarity(
    rng: np.random.Generator,
    n: int,
    cap: int,
    *,
    negatives: bool = False,
    dominant: bool = True,
) -> SimilarityMatrix:
    """Random symmetric similarity matrix with <= cap non-zeros per column.

    Built densely (test sizes only): random off-diagonal pairs inserted while
    both endpoints have room, then globally scaled for strict diagonal
    dominance when requested.
    """
    a = np.eye(n)
    counts = np.ones(n, dtype=int)
    attempts = n * max(cap - 1, 0) * 2
    for _ in range(attempts):
        i, j = rng.integers(0, n, size=2)
        if i == j or a[i, j] != 0.0:
            continue
        if counts[i] >= cap or counts[j] >= cap:
            continue
        v = rng.uniform(0.05, 1.0)
        if negatives and rng.random() < 0.4:
            v = -v
        a[i, j] = a[j, i] = v
        counts[i] += 1
        counts[j] += 1
    if dominant:
        off = np.abs(a).sum(axis=0) - 1.0
        t = off.max()
        if t >= 1.0:
            a_off = a - np.eye(n)
            a = np.eye(n) + a_off * (0.9 / t)
    return SimilarityMatrix.from_dense_sim(a)


def banded_similarity(n: int, half_bandwidth: int, rng: np.random.Generator) -> SimilarityMatrix:
    """Symmetric banded similarity matrix, vectorized for large n."""
    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    vals = [np.ones(n)]
    for d in range(1, half_bandwidth + 1):
        v = rng.uniform(0.05, 1.0, size=n - d)
        upper = np.arange(n - d, dtype=np.int64)
        rows.extend([upper, upper + d])
        cols.extend([upper + d, upper])
        vals.extend([v, v])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    # strict diagonal dominance: scale off-diagonals below 1/(2*half_bandwidth)
    v[n:] *= 0.9 / max(2 * half_bandwidth, 1)
    m = CscMatrix.from_coo(n, r, c, v)
    return SimilarityMatrix.from_csc(m, symmetric=True, nonnegative=True)


def random_doc_vector(
    rng: np.random.Generator, dim: int, max_nnz: int, *, integral: bool = False
) -> SparseDocVector:
    nnz = int(rng.integers(1, max_nnz + 1))
    nnz = min(nnz, dim)
    idx = np.sort(rng.choice(dim, size=nnz, replace=False)).astype(np.int64)
    if integral:
        vals = rng.integers(1, 6, size=nnz).astype(float)
    else:
        vals = rng.uniform(0.1, 5.0, size=nnz)
    return SparseDocVector(indices=idx, values=vals, dim=dim)


def rankings_agree(sa: np.ndarray, sb: np.ndarray, rel: float = 1e-9) -> bool:
    """Pairwise sign agreement of two score lists, tolerating near-ties.

    Equivalent to argsort equality up to permutations inside equal-score
    groups: every pair strictly ordered in both lists must be ordered the
    same way; pairs within `rel` of tying in either list are exempt.
    """
    sa = np.asarray(sa, dtype=float)
    sb = np.asarray(sb, dtype=float)
    da = np.subtract.outer(sa, sa)
    db = np.subtract.outer(sb, sb)
    tie_a = np.abs(da) <= rel * max(np.abs(sa).max(), 1e-30)
    tie_b = np.abs(db) <= rel * max(np.abs(sb).max(), 1e-30)
    return bool(np.all(tie_a | tie_b | (np.sign(da) == np.sign(db))))
