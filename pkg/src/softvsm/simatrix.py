"""Term-similarity matrix construction and sparsification.

Builders produce a unit-diagonal similarity matrix over a vocabulary, either
from word embeddings (clamped cosine) or from string edit distance. The
sparsifier caps the number of stored entries per column at a budget C, which
is what keeps every downstream operation linear in the number of document
terms.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .core import (
    CscMatrix,
    DimensionMismatch,
    FileFormatError,
    SimilarityMatrix,
    SoftVsmError,
    Vocabulary,
)

__all__ = [
    "DEFAULT_EDIT_SCALE",
    "DEFAULT_EDIT_EXPONENT",
    "DOMINANCE_MARGIN",
    "levenshtein",
    "build_similarity_embedding",
    "build_similarity_edit",
    "SparsifyConfig",
    "sparsify",
    "is_strictly_diagonally_dominant",
]

DEFAULT_EDIT_SCALE = 0.8
DEFAULT_EDIT_EXPONENT = 5.0

# off-diagonal column mass is rescaled to at most 1 - DOMINANCE_MARGIN, so
# strict diagonal dominance (hence positive definiteness) survives rounding
DOMINANCE_MARGIN = 1e-6

_EMBED_BLOCK = 1024


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insert/delete/substitute (two-row DP)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (ca != cb),
            )
        prev = cur
    return prev[-1]


def build_similarity_embedding(
    vocabulary: Vocabulary,
    embeddings: Mapping[str, np.ndarray],
    threshold: float = 0.0,
) -> SimilarityMatrix:
    """Similarity from word embeddings: s_ij = max(0, cosine), thresholded.

    Terms without an embedding (or with a zero embedding) stay similar only
    to themselves. Off-diagonal entries below the threshold are dropped.
    The result is symmetric and non-negative with a unit diagonal.

    Raises:
        DimensionMismatch: if embedding vectors have differing lengths.
        SoftVsmError: if the threshold is outside [0, 1].
    """
    if not 0.0 <= threshold <= 1.0:
        raise SoftVsmError(f"threshold must lie in [0, 1], got {threshold}")
    n = len(vocabulary)
    have: list[int] = []
    vecs: list[np.ndarray] = []
    dim: int | None = None
    for i, term in enumerate(vocabulary.terms):
        e = embeddings.get(term)
        if e is None:
            continue
        e = np.asarray(e, dtype=np.float64)
        if e.ndim != 1:
            raise DimensionMismatch(f"embedding for {term!r} is not a vector")
        if dim is None:
            dim = len(e)
        elif len(e) != dim:
            raise DimensionMismatch(
                f"embedding for {term!r} has length {len(e)}, expected {dim}"
            )
        norm = np.linalg.norm(e)
        if norm == 0.0:
            continue
        have.append(i)
        vecs.append(e / norm)

    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    vals = [np.ones(n)]
    if have:
        v = np.vstack(vecs)
        term_idx = np.array(have, dtype=np.int64)
        k = len(have)
        for start in range(0, k, _EMBED_BLOCK):
            stop = min(start + _EMBED_BLOCK, k)
            block = v[start:stop] @ v.T  # (stop-start) x k cosines
            np.clip(block, None, 1.0, out=block)
            bi, bj = np.nonzero((block > 0.0) & (block >= threshold))
            upper = (bi + start) < bj  # emit each unordered pair once
            bi, bj = bi[upper], bj[upper]
            if len(bi):
                gi = term_idx[bi + start]
                gj = term_idx[bj]
                s = block[bi, bj]
                rows.extend([gi, gj])
                cols.extend([gj, gi])
                vals.extend([s, s])
    m = CscMatrix.from_coo(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
    return SimilarityMatrix.from_csc(m, symmetric=True, nonnegative=True)


def build_similarity_edit(
    vocabulary: Vocabulary,
    alpha: float = DEFAULT_EDIT_SCALE,
    beta: float = DEFAULT_EDIT_EXPONENT,
    threshold: float = 0.0,
) -> SimilarityMatrix:
    """Similarity from edit distance: s_ij = alpha * (1 - lev/maxlen)^beta.

    All-pairs construction, intended for desk-scale vocabularies. Identical
    strings never occur (vocabulary terms are unique), so off-diagonal values
    are strictly below alpha. Entries below the threshold are dropped.

    Raises:
        SoftVsmError: if alpha is outside (0, 1], beta <= 0, or the threshold
            is outside [0, 1].
    """
    if not 0.0 < alpha <= 1.0:
        raise SoftVsmError(f"alpha must lie in (0, 1], got {alpha}")
    if beta <= 0.0:
        raise SoftVsmError(f"beta must be positive, got {beta}")
    if not 0.0 <= threshold <= 1.0:
        raise SoftVsmError(f"threshold must lie in [0, 1], got {threshold}")
    n = len(vocabulary)
    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    vals = [np.ones(n)]
    terms = vocabulary.terms
    off_r: list[int] = []
    off_c: list[int] = []
    off_v: list[float] = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = terms[i], terms[j]
            maxlen = max(len(a), len(b))
            if maxlen == 0:
                continue
            d = levenshtein(a, b)
            s = alpha * (1.0 - d / maxlen) ** beta
            if s > 0.0 and s >= threshold:
                off_r.extend((i, j))
                off_c.extend((j, i))
                off_v.extend((s, s))
    if off_r:
        rows.append(np.array(off_r, dtype=np.int64))
        cols.append(np.array(off_c, dtype=np.int64))
        vals.append(np.array(off_v))
    m = CscMatrix.from_coo(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
    return SimilarityMatrix.from_csc(m, symmetric=True, nonnegative=True)


@dataclass(frozen=True)
class SparsifyConfig:
    """Sparsification parameters.

    Attributes:
        max_per_column: entry budget C per column, diagonal included (>= 1).
        strategy: "topc_asymmetric" keeps each column's C largest-magnitude
            entries independently (output may be asymmetric);
            "greedy_symmetric" inserts mirrored pairs largest-first and skips
            any insertion that would push either endpoint past C.
        column_order: greedy processing order — "as_is" or
            "increasing_doc_freq" (rarer terms claim their budget first).
        dominance: "none", or "strict_diagonal" to rescale off-diagonal mass
            so every column sums strictly below the diagonal (guarantees the
            matrix is positive definite).
        threshold: entries with |s| below this are dropped before anything
            else.
    """

    max_per_column: int
    strategy: str = "greedy_symmetric"
    column_order: str = "increasing_doc_freq"
    dominance: str = "strict_diagonal"
    threshold: float = 0.0

    def __post_init__(self):
        if self.max_per_column < 1:
            raise SoftVsmError("max_per_column must be at least 1")
        if self.strategy not in ("topc_asymmetric", "greedy_symmetric"):
            raise SoftVsmError(f"unknown strategy {self.strategy!r}")
        if self.column_order not in ("as_is", "increasing_doc_freq"):
            raise SoftVsmError(f"unknown column_order {self.column_order!r}")
        if self.dominance not in ("none", "strict_diagonal"):
            raise SoftVsmError(f"unknown dominance mode {self.dominance!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise SoftVsmError("threshold must lie in [0, 1]")


def _column_entries(matrix: SimilarityMatrix, j: int, threshold: float):
    """Off-diagonal entries of column j surviving the magnitude threshold."""
    rows, v = matrix.col(j)
    keep = (rows != j) & (np.abs(v) >= threshold)
    return rows[keep], v[keep]


def sparsify(
    matrix: SimilarityMatrix,
    vocabulary: Vocabulary | None,
    config: SparsifyConfig,
) -> SimilarityMatrix:
    """Cap the number of stored entries per column at C.

    Returns the input object unchanged when nothing needs dropping or
    rescaling. Every output column holds at most C entries (diagonal
    included); with the greedy strategy the output is exactly symmetric.

    Raises:
        DimensionMismatch: if a vocabulary is given and its size differs
            from the matrix order.
        SoftVsmError: greedy strategy on an asymmetric matrix, or a column
            order that needs a vocabulary when none was given.
    """
    n = matrix.n
    if vocabulary is not None and len(vocabulary) != n:
        raise DimensionMismatch(
            f"vocabulary size {len(vocabulary)} does not match matrix order {n}"
        )
    cap = config.max_per_column

    if config.strategy == "greedy_symmetric":
        if not matrix.symmetric:
            raise SoftVsmError("greedy_symmetric requires a symmetric matrix")
        if config.column_order == "increasing_doc_freq":
            if vocabulary is None:
                raise SoftVsmError(
                    "column_order 'increasing_doc_freq' requires a vocabulary"
                )
            order = np.argsort(vocabulary.doc_freq, kind="stable")
        else:
            order = np.arange(n)
        counts = np.ones(n, dtype=np.int64)
        kept: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        placed: set[tuple[int, int]] = set()
        for j in order:
            rows, v = _column_entries(matrix, j, config.threshold)
            if not len(rows):
                continue
            for t in np.lexsort((rows, -np.abs(v))):
                i = int(rows[t])
                if (i, j) in placed:
                    continue
                if counts[j] >= cap:
                    break
                if counts[i] >= cap:
                    continue
                kept[j].append((i, float(v[t])))
                kept[i].append((j, float(v[t])))
                placed.add((j, i))  # the mirror entry, met again at column i
                counts[i] += 1
                counts[j] += 1
        out_symmetric = True
    else:  # topc_asymmetric
        kept = [[] for _ in range(n)]
        for j in range(n):
            rows, v = _column_entries(matrix, j, config.threshold)
            if len(rows) > cap - 1:
                pick = np.lexsort((rows, -np.abs(v)))[: cap - 1]
            else:
                pick = np.arange(len(rows))
            kept[j] = [(int(rows[t]), float(v[t])) for t in pick]
        out_symmetric = None  # decided after assembly

    # assemble CSC: diagonal plus kept off-diagonals, rows ascending
    indptr = np.zeros(n + 1, dtype=np.int64)
    idx_parts: list[np.ndarray] = []
    val_parts: list[np.ndarray] = []
    for j in range(n):
        entries = sorted(kept[j])
        rows_j = np.fromiter((r for r, _ in entries), dtype=np.int64, count=len(entries))
        vals_j = np.fromiter((x for _, x in entries), dtype=np.float64, count=len(entries))
        at = np.searchsorted(rows_j, j)
        rows_j = np.insert(rows_j, at, j)
        vals_j = np.insert(vals_j, at, 1.0)
        idx_parts.append(rows_j)
        val_parts.append(vals_j)
        indptr[j + 1] = indptr[j] + len(rows_j)
    indices = np.concatenate(idx_parts) if idx_parts else np.empty(0, dtype=np.int64)
    data = np.concatenate(val_parts) if val_parts else np.empty(0)

    structurally_unchanged = (
        np.array_equal(indptr, matrix.indptr)
        and np.array_equal(indices, matrix.indices)
        and np.array_equal(data, matrix.data)
    )

    if out_symmetric is None:
        trial = CscMatrix(n, indptr, indices, data, validate=False)
        out_symmetric = trial.transpose().equal_to(trial)

    rescaled = False
    if config.dominance == "strict_diagonal":
        col_of = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
        off = indices != col_of
        t = np.zeros(n)
        np.add.at(t, col_of[off], np.abs(data[off]))
        limit = 1.0 - DOMINANCE_MARGIN
        f = np.where(t > limit, limit / np.maximum(t, limit), 1.0)
        if np.any(f < 1.0):
            rescaled = True
            data = data.copy()
            if out_symmetric:
                factor = np.minimum(f[indices], f[col_of])
            else:
                factor = f[col_of]
            data[off] = data[off] * factor[off]

    if structurally_unchanged and not rescaled:
        return matrix

    nonneg = bool(data.min() >= 0.0) if len(data) else True
    return SimilarityMatrix(
        n,
        indptr,
        indices,
        data,
        symmetric=bool(out_symmetric),
        nonnegative=nonneg,
        validate=False,
    )


def is_strictly_diagonally_dominant(matrix: SimilarityMatrix) -> bool:
    """True iff every column's off-diagonal |mass| is strictly below its diagonal."""
    col_of = matrix._col_of()
    off = matrix.indices != col_of
    t = np.zeros(matrix.n)
    np.add.at(t, col_of[off], np.abs(matrix.data[off]))
    return bool(np.all(t < matrix.diagonal()))
