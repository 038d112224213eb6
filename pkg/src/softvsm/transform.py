"""Order-preserving coordinate transforms for external nearest-neighbor backends.

A generic vector store can rank by plain dot product or cosine similarity
only. These transforms bake the term-similarity matrix into the query side
(and a per-document normalization into the document side) so that the
backend's ranking coincides with the soft inner product or the Soft Cosine
Measure:

* dot-product backends: store W·y per document, search with Sᵀ·(W·x) —
  the dot product *is* the soft inner product, and dividing by the
  document's soft norm makes it a positive multiple of the SCM.
* cosine backends: append one coordinate so both sides are unit vectors
  whose cosine is a positive multiple of the SCM.

Because the document vectors of the dot-product variant never involve S,
swapping in a new similarity matrix only requires re-transforming queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AugmentationUndefined,
    SimilarityMatrix,
    SoftVsmError,
    SparseDocVector,
    TermWeights,
    ZeroNormDocument,
)
from .scm import _check_dims, inner_product_sparse

__all__ = [
    "QueryTransformed",
    "DocTransformed",
    "query_for_dot",
    "doc_for_scm",
    "query_for_cosine",
    "doc_for_cosine",
    "dot_transformed",
]

def _validated_sparse(indices, values, dim):
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if indices.ndim != 1 or values.ndim != 1 or len(indices) != len(values):
        raise SoftVsmError("indices and values must be parallel 1-d arrays")
    if len(indices):
        if indices[0] < 0 or indices[-1] >= dim:
            raise SoftVsmError("indices out of range")
        if np.any(np.diff(indices) <= 0):
            raise SoftVsmError("indices must be strictly increasing")
    if not np.all(np.isfinite(values)):
        raise SoftVsmError("non-finite coordinate")
    indices.flags.writeable = False
    values.flags.writeable = False
    return indices, values


class _TransformedBase:
    def __post_init__(self):
        idx, val = _validated_sparse(self.indices, self.values, self.dim)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        if self.augmented:
            norm = math.sqrt(float(np.dot(self.values, self.values)))
            if abs(norm - 1.0) > 1e-9:
                raise SoftVsmError(f"augmented vector norm {norm} is not 1")

    @property
    def coords(self) -> np.ndarray:
        """Dense coordinate vector (length dim)."""
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    @property
    def nnz(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class QueryTransformed(_TransformedBase):
    """A search-ready query vector.

    Plain variant (augmented=False): coordinates Sᵀ·(W·x) in ℝⁿ. Augmented
    variant: ℝⁿ⁺¹ with the first n coordinates Euclidean-normalized and the
    last exactly 0 (never stored), so the whole vector has unit norm.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int
    augmented: bool = False

    def __post_init__(self):
        super().__post_init__()
        if self.augmented and self.nnz and self.indices[-1] == self.dim - 1:
            raise SoftVsmError("augmented query must end with a zero coordinate")


@dataclass(frozen=True)
class DocTransformed(_TransformedBase):
    """A store-ready document vector.

    Plain variant: W·y divided by the document's soft norm √((Wy)ᵀS(Wy)).
    Augmented variant: one extra coordinate √(1 − ‖y′‖²) making the vector
    unit-norm.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int
    augmented: bool = False


def _weighted_support(x: SparseDocVector, w: np.ndarray):
    """Indices and values of W·x with exact zeros dropped."""
    vals = w[x.indices] * x.values
    keep = vals != 0.0
    return x.indices[keep], vals[keep]


def _matvec_into_rows(
    matrix: SimilarityMatrix, idx: np.ndarray, vals: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Sparse Sᵀ·v for v given by (idx, vals): Σᵢ vᵢ · (row i of S)."""
    cols = matrix if matrix.symmetric else matrix.transpose()
    parts_idx = []
    parts_val = []
    for i, v in zip(idx, vals):
        rows, svals = cols.col(int(i))
        parts_idx.append(rows)
        parts_val.append(svals * v)
    if not parts_idx:
        return np.empty(0, dtype=np.int64), np.empty(0)
    all_idx = np.concatenate(parts_idx)
    all_val = np.concatenate(parts_val)
    out_idx, inverse = np.unique(all_idx, return_inverse=True)
    out_val = np.bincount(inverse, weights=all_val, minlength=len(out_idx))
    keep = out_val != 0.0
    return out_idx[keep], out_val[keep]


def query_for_dot(
    x: SparseDocVector, weights: TermWeights, matrix: SimilarityMatrix
) -> QueryTransformed:
    """Transform a query so dot products against stored W·y vectors equal
    the soft inner product: coords = Sᵀ·(W·x), at most m·C non-zeros.

    Raises:
        ZeroNormDocument: for an empty query.
        DimensionMismatch: on dimension disagreement.
    """
    n = matrix.n
    _check_dims(n, x.dim, weights.dim)
    if x.nnz == 0:
        raise ZeroNormDocument("query")
    idx, vals = _weighted_support(x, weights.w)
    out_idx, out_val = _matvec_into_rows(matrix, idx, vals)
    return QueryTransformed(indices=out_idx, values=out_val, dim=n)


def doc_for_scm(
    y: SparseDocVector, weights: TermWeights, matrix: SimilarityMatrix
) -> DocTransformed:
    """Transform a document so dot(query_for_dot(x), ·) is a fixed positive
    multiple of SCM(x, ·): coords = (W·y) / √((Wy)ᵀS(Wy)).

    Raises:
        ZeroNormDocument: when the soft self-similarity is not positive.
        DimensionMismatch: on dimension disagreement.
    """
    n = matrix.n
    _check_dims(n, y.dim, weights.dim)
    self_y = inner_product_sparse(y, y, weights, matrix)
    if self_y <= 0.0:
        raise ZeroNormDocument("y")
    idx, vals = _weighted_support(y, weights.w)
    return DocTransformed(indices=idx, values=vals / math.sqrt(self_y), dim=n)


def query_for_cosine(
    x: SparseDocVector, weights: TermWeights, matrix: SimilarityMatrix
) -> QueryTransformed:
    """Augmented query for cosine-similarity backends: the normalized
    Sᵀ·(W·x) followed by one zero coordinate, a unit vector in ℝⁿ⁺¹.

    Requires a non-negative similarity matrix — the augmented document
    transform is only defined there.

    Raises:
        SoftVsmError: when the matrix carries negative similarities.
        ZeroNormDocument: when the transformed query has no mass.
        DimensionMismatch: on dimension disagreement.
    """
    if not matrix.nonnegative:
        raise SoftVsmError(
            "cosine-backend transform requires a non-negative similarity matrix"
        )
    plain = query_for_dot(x, weights, matrix)
    norm = math.sqrt(float(np.dot(plain.values, plain.values)))
    if norm <= 0.0:
        raise ZeroNormDocument("query")
    return QueryTransformed(
        indices=plain.indices,
        values=plain.values / norm,
        dim=matrix.n + 1,
        augmented=True,
    )


def doc_for_cosine(
    y: SparseDocVector, weights: TermWeights, matrix: SimilarityMatrix
) -> DocTransformed:
    """Augmented document for cosine-similarity backends: y′ = doc_for_scm
    coordinates plus a final coordinate √(1 − ‖y′‖²), a unit vector in ℝⁿ⁺¹.

    ‖y′‖² ≤ 1 is guaranteed for a non-negative matrix (document coordinates
    and weights are never negative); the bound is checked at runtime so an
    unsuitable matrix fails loudly instead of corrupting the ranking.

    Raises:
        ZeroNormDocument: when the soft self-similarity is not positive.
        AugmentationUndefined: when ‖y′‖² exceeds 1 beyond rounding, which
            indicates a similarity matrix the augmentation is undefined for.
        DimensionMismatch: on dimension disagreement.
    """
    plain = doc_for_scm(y, weights, matrix)
    t = float(np.dot(plain.values, plain.values))
    if t > 1.0 + 1e-12:
        raise AugmentationUndefined(
            f"augmentation undefined: transformed squared norm {t} exceeds 1"
        )
    last = math.sqrt(max(0.0, 1.0 - t))
    n = matrix.n
    if last > 0.0:
        idx = np.append(plain.indices, n)
        val = np.append(plain.values, last)
    else:
        idx, val = plain.indices, plain.values
    return DocTransformed(indices=idx, values=val, dim=n + 1, augmented=True)


def dot_transformed(a: QueryTransformed | DocTransformed, b: QueryTransformed | DocTransformed) -> float:
    """Sparse dot product of two transformed vectors of equal dimension."""
    _check_dims(a.dim, b.dim)
    if a.nnz > b.nnz:
        a, b = b, a
    if a.nnz == 0:
        return 0.0
    pos = np.searchsorted(b.indices, a.indices)
    pos = np.minimum(pos, b.nnz - 1)
    hit = b.indices[pos] == a.indices
    if not np.any(hit):
        return 0.0
    return float(np.dot(a.values[hit], b.values[pos[hit]]))
