"""Soft inner products and the Soft Cosine Measure.

The central operation evaluates (Wx)'S(Wy) touching only the non-zero
coordinates of one document and the stored entries of the similarity matrix
columns they select: with at most C entries per column the cost is O(m·C)
for an m-term document — independent of the vocabulary size n.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    CorpusMatrix,
    CscMatrix,
    DimensionMismatch,
    SimilarityMatrix,
    SparseDocVector,
    TermWeights,
    ZeroNormDocument,
)

__all__ = [
    "inner_product_sparse",
    "soft_cosine",
    "batch_inner",
    "batch_scm",
]


def _sparse_lookup(idx: np.ndarray, val: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Values of a sparse vector (sorted idx/val) at positions `at`, 0 elsewhere."""
    if len(idx) == 0 or len(at) == 0:
        return np.zeros(len(at))
    pos = np.searchsorted(idx, at)
    pos = np.minimum(pos, len(idx) - 1)
    return np.where(idx[pos] == at, val[pos], 0.0)


def _check_dims(n: int, *dims: int):
    for d in dims:
        if d != n:
            raise DimensionMismatch(f"dimension {d} does not match matrix order {n}")


def inner_product_sparse(
    x: SparseDocVector,
    y: SparseDocVector,
    weights: TermWeights,
    matrix: SimilarityMatrix,
) -> float:
    """The soft inner product Σᵢ Σⱼ wᵢᵢ·xᵢ·sᵢⱼ·wⱼⱼ·yⱼ.

    When the matrix is symmetric, iterates the non-zeros of x and walks the
    CSC column each one selects (cost O(m·C)). An asymmetric matrix is
    handled by iterating y's support instead, which evaluates the same
    bilinear form against the stored columns exactly.

    Raises:
        DimensionMismatch: when x, y, weights, and the matrix disagree on n.
    """
    n = matrix.n
    _check_dims(n, x.dim, y.dim, weights.dim)
    w = weights.w
    total = 0.0
    if matrix.symmetric:
        # column i of a symmetric S is row i: pair x_i with S[i, :]
        other_idx, other_val = y.indices, y.values
        for t in range(x.nnz):
            i = x.indices[t]
            rows, vals = matrix.col(i)
            yv = _sparse_lookup(other_idx, other_val, rows)
            total += (w[i] * x.values[t]) * float(np.dot(vals, w[rows] * yv))
    else:
        # walk y's support so stored columns S[:, j] pair with x on the rows
        other_idx, other_val = x.indices, x.values
        for t in range(y.nnz):
            j = y.indices[t]
            rows, vals = matrix.col(j)
            xv = _sparse_lookup(other_idx, other_val, rows)
            total += (w[j] * y.values[t]) * float(np.dot(vals, w[rows] * xv))
    return total


def soft_cosine(
    x: SparseDocVector,
    y: SparseDocVector,
    weights: TermWeights,
    matrix: SimilarityMatrix,
) -> float:
    """Soft Cosine Measure: inner(x,y) / (√inner(x,x) · √inner(y,y)).

    With non-negative weights, similarities, and coordinates the score lies
    in [0, 1] (up to rounding) whenever the matrix is positive definite.

    Raises:
        ZeroNormDocument: if either argument has non-positive self-similarity
            (an empty vector always does).
        DimensionMismatch: on dimension disagreement.
    """
    self_x = inner_product_sparse(x, x, weights, matrix)
    self_y = inner_product_sparse(y, y, weights, matrix)
    if self_x <= 0.0:
        raise ZeroNormDocument("x")
    if self_y <= 0.0:
        raise ZeroNormDocument("y")
    return inner_product_sparse(x, y, weights, matrix) / math.sqrt(self_x * self_y)


def _expanded_query_dense(
    x: SparseDocVector, w: np.ndarray, columns: CscMatrix, z: np.ndarray
) -> list[np.ndarray]:
    """Accumulate z += Sᵀ(Wx) using `columns` = S (symmetric) or Sᵀ (general).

    Returns the touched index blocks so the caller can zero them afterwards.
    """
    touched: list[np.ndarray] = []
    for t in range(x.nnz):
        i = x.indices[t]
        rows, vals = columns.col(i)
        z[rows] += vals * (w[i] * x.values[t])
        touched.append(rows)
    return touched


def batch_inner(
    xs: CorpusMatrix,
    ys: CorpusMatrix,
    weights: TermWeights,
    matrix: SimilarityMatrix,
) -> np.ndarray:
    """All-pairs soft inner products as a dense |X|×|Y| row-major matrix.

    One shared accumulator holds z = Sᵀ(Wx) per left-hand document and is
    wiped by touched-index lists, so the cost is O(Σ mₓ·C + |X|·Σ m_y)
    without ever forming a Gram matrix.

    Raises:
        DimensionMismatch: on dimension disagreement.
    """
    out = np.zeros((len(xs), len(ys)))
    if not len(xs) or not len(ys):
        return out
    n = matrix.n
    _check_dims(n, xs.dim, ys.dim, weights.dim)
    w = weights.w
    cols = matrix if matrix.symmetric else matrix.transpose()
    z = np.zeros(n)
    for a, x in enumerate(xs.columns):
        touched = _expanded_query_dense(x, w, cols, z)
        for b, y in enumerate(ys.columns):
            out[a, b] = np.dot(z[y.indices] * w[y.indices], y.values)
        for block in touched:
            z[block] = 0.0
    return out


def _self_inners(
    corpus: CorpusMatrix, w: np.ndarray, cols: CscMatrix, z: np.ndarray
) -> np.ndarray:
    """(Wx)ᵀS(Wx) per document: the row-sum of (Wx)ᵀS ∘ (Wx)ᵀ."""
    out = np.empty(len(corpus))
    for a, x in enumerate(corpus.columns):
        touched = _expanded_query_dense(x, w, cols, z)
        out[a] = np.dot(z[x.indices] * w[x.indices], x.values)
        for block in touched:
            z[block] = 0.0
    return out


def batch_scm(
    xs: CorpusMatrix,
    ys: CorpusMatrix,
    weights: TermWeights,
    matrix: SimilarityMatrix,
) -> np.ndarray:
    """All-pairs Soft Cosine Measure as a dense |X|×|Y| matrix.

    Normalization uses per-document self inner products (never a full Gram
    matrix). Passing the same corpus on both sides yields an exactly-unit
    diagonal up to rounding.

    Raises:
        ZeroNormDocument: naming the offending document id.
        DimensionMismatch: on dimension disagreement.
    """
    if not len(xs) or not len(ys):
        return np.zeros((len(xs), len(ys)))
    n = matrix.n
    _check_dims(n, xs.dim, ys.dim, weights.dim)
    w = weights.w
    cols = matrix if matrix.symmetric else matrix.transpose()
    z = np.zeros(n)

    self_x = _self_inners(xs, w, cols, z)
    self_y = self_x if ys is xs else _self_inners(ys, w, cols, z)
    for corpus, selfs in ((xs, self_x), (ys, self_y)):
        bad = np.nonzero(selfs <= 0.0)[0]
        if len(bad):
            raise ZeroNormDocument(corpus.doc_ids[bad[0]])

    out = batch_inner(xs, ys, weights, matrix)
    out /= np.sqrt(self_x)[:, None]
    out /= np.sqrt(self_y)[None, :]
    return out
