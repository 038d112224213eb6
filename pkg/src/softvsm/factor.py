"""Orthonormalization of the term basis via sparse Cholesky factorization.

Factorizing the (permuted) similarity matrix as P'SP = FF' yields coordinates
in an orthonormal basis: the map x -> F'P'(Wx) turns the soft inner product
(Wx)'S(Wy) into a plain dot product. Small problems densify and call LAPACK;
larger ones run an up-looking column Cholesky over the CSC pattern, with an
optional reverse Cuthill-McKee ordering to keep the factor sparse.

Also provides the quartic-time baseline that recomputes one full elimination
per output column, for benchmarking the cubic factorization against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dpotrf

from .core import (
    CscMatrix,
    DimensionMismatch,
    NotPositiveDefinite,
    SimilarityMatrix,
    SoftVsmError,
    SparseDocVector,
    TermWeights,
)

__all__ = [
    "DENSE_THRESHOLD_DEFAULT",
    "CholeskyFactor",
    "cholesky",
    "rcm_order",
    "orthonormalize_gaussian",
    "transform_to_orthonormal",
    "dense_cholesky",
]

# below this order the matrix is densified and handed to LAPACK
DENSE_THRESHOLD_DEFAULT = 512


@dataclass(frozen=True)
class CholeskyFactor:
    """Result of factorizing S as P·(F·Fᵀ)·Pᵀ.

    Attributes:
        perm: permutation as an index array — position a of the permuted
            system corresponds to original index perm[a]; identity when no
            reordering was requested.
        factor: F, sparse lower-triangular with positive diagonal; within
            each column the diagonal entry comes first.
        n: order of the factored matrix.
    """

    perm: np.ndarray
    factor: CscMatrix
    n: int

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=np.int64)
        if sorted(p.tolist()) != list(range(self.n)):
            raise SoftVsmError("perm must be a bijection on 0..n-1")
        p.flags.writeable = False
        object.__setattr__(self, "perm", p)
        f = self.factor
        if f.n != self.n:
            raise DimensionMismatch("factor order differs from n")
        if self.n:
            if np.any(np.diff(f.indptr) < 1):
                raise SoftVsmError("factor has an empty column")
            heads = f.indptr[:-1]
            if not np.array_equal(f.indices[heads], np.arange(self.n)):
                raise SoftVsmError("each factor column must start at its diagonal")
            if np.any(f.data[heads] <= 0.0):
                raise SoftVsmError("factor diagonal must be positive")

    def reconstruct_dense(self) -> np.ndarray:
        """P·(F·Fᵀ)·Pᵀ as a dense array (test/diagnostic use, small n)."""
        f = self.factor.to_dense()
        s_perm = f @ f.T
        out = np.empty_like(s_perm)
        out[np.ix_(self.perm, self.perm)] = s_perm
        return out

    @property
    def fill(self) -> int:
        """Stored non-zeros in F."""
        return self.factor.nnz


def dense_cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a dense SPD matrix via LAPACK.

    Raises:
        NotPositiveDefinite: carrying the 0-based failing column.
    """
    c, info = dpotrf(a, lower=1)
    if info > 0:
        raise NotPositiveDefinite(info - 1)
    if info < 0:
        raise SoftVsmError(f"internal factorization failure (argument {-info})")
    return np.tril(c)


def _permuted(matrix: SimilarityMatrix, p: np.ndarray) -> CscMatrix:
    """Entries at [a, b] = matrix[p[a], p[b]]."""
    invp = np.empty_like(p)
    invp[p] = np.arange(len(p), dtype=np.int64)
    return CscMatrix.from_coo(
        matrix.n, invp[matrix.indices], invp[matrix._col_of()], matrix.data
    )


def _upper_column(m: CscMatrix, k: int) -> tuple[np.ndarray, np.ndarray]:
    rows, vals = m.col(k)
    stop = np.searchsorted(rows, k, side="right")
    return rows[:stop], vals[:stop]


def _sparse_cholesky(m: CscMatrix, p: np.ndarray) -> CscMatrix:
    """Up-looking column Cholesky of m (assumed symmetric), m = FF'.

    Row patterns come from walking the elimination tree, which is built
    incrementally: the parent links among vertices below k are final by the
    time step k consults them. One symbolic pass sizes the columns, one
    numeric pass fills them; the dense accumulator x returns to all-zeros
    after every step because each touched index is either cleared on
    processing or folded into the pivot.
    """
    n = m.n
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    patterns: list[np.ndarray] = []
    counts = np.ones(n, dtype=np.int64)

    for k in range(n):
        rows, _ = _upper_column(m, k)
        below = rows[rows < k].tolist()
        # extend the elimination tree with column k (path compression)
        for i in below:
            while i != -1 and i < k:
                nxt = int(ancestor[i])
                ancestor[i] = k
                if nxt == -1:
                    parent[i] = k
                i = nxt
        # reach: row pattern of L[k, :k] = paths from A's entries up the tree
        mark[k] = k
        pat: list[int] = []
        for i in below:
            while i != -1 and i < k and mark[i] != k:
                pat.append(i)
                mark[i] = k
                i = int(parent[i])
        pattern = np.sort(np.array(pat, dtype=np.int64))
        patterns.append(pattern)
        counts[pattern] += 1

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    li = np.empty(indptr[-1], dtype=np.int64)
    lx = np.empty(indptr[-1])
    fill_at = indptr[:-1].copy()  # next free slot per column

    x = np.zeros(n)
    for k in range(n):
        rows, vals = _upper_column(m, k)
        x[rows] = vals
        d = x[k]
        x[k] = 0.0
        for j in patterns[k]:
            start = indptr[j]
            stop = fill_at[j]
            lkj = x[j] / lx[start]
            x[j] = 0.0
            sl = slice(start + 1, stop)
            x[li[sl]] -= lx[sl] * lkj
            d -= lkj * lkj
            li[stop] = k
            lx[stop] = lkj
            fill_at[j] = stop + 1
        if not (d > 0.0) or not math.isfinite(d):
            raise NotPositiveDefinite(int(p[k]))
        head = indptr[k]
        li[head] = k
        lx[head] = math.sqrt(d)
        fill_at[k] = head + 1
    return CscMatrix(n, indptr, li, lx, validate=False)


def cholesky(
    matrix: SimilarityMatrix,
    permutation: str = "none",
    *,
    dense_threshold: int = DENSE_THRESHOLD_DEFAULT,
) -> CholeskyFactor:
    """Factorize a symmetric positive-definite similarity matrix.

    Args:
        matrix: symmetric similarity matrix (flag checked).
        permutation: "none" (identity) or "rcm" (reverse Cuthill-McKee on the
            sparsity graph, reducing factor fill on banded-ish patterns).
        dense_threshold: orders up to this run densified through LAPACK;
            larger ones use the sparse up-looking algorithm. Lower it to
            force the sparse path (tests do).

    Raises:
        SoftVsmError: asymmetric input or unknown permutation name.
        NotPositiveDefinite: with the failing column in original numbering.
    """
    if not matrix.symmetric:
        raise SoftVsmError("cholesky requires a symmetric matrix")
    n = matrix.n
    if permutation == "none":
        p = np.arange(n, dtype=np.int64)
        work: CscMatrix = matrix
    elif permutation == "rcm":
        p = rcm_order(matrix)
        work = _permuted(matrix, p)
    else:
        raise SoftVsmError(f"unknown permutation {permutation!r}")

    if n <= dense_threshold:
        try:
            f_dense = dense_cholesky(work.to_dense())
        except NotPositiveDefinite as e:
            raise NotPositiveDefinite(int(p[e.column])) from None
        f = CscMatrix.from_dense(f_dense)
    else:
        f = _sparse_cholesky(work, p)
    return CholeskyFactor(perm=p, factor=f, n=n)


def rcm_order(matrix: SimilarityMatrix) -> np.ndarray:
    """Reverse Cuthill-McKee ordering of the sparsity graph.

    Deterministic: components start at the lowest-index minimum-degree
    unvisited vertex, neighbors are visited by (degree, index), and each
    component's ordering is reversed in place — so a diagonal-only pattern
    comes back as the identity permutation.
    """
    if not matrix.symmetric:
        raise SoftVsmError("rcm_order requires a symmetric pattern")
    n = matrix.n
    nbrs: list[np.ndarray] = []
    for j in range(n):
        rows, _ = matrix.col(j)
        nbrs.append(rows[rows != j])
    deg = np.array([len(a) for a in nbrs], dtype=np.int64)
    by_degree = np.lexsort((np.arange(n), deg))
    visited = np.zeros(n, dtype=bool)
    out: list[int] = []
    cursor = 0
    while len(out) < n:
        while cursor < n and visited[by_degree[cursor]]:
            cursor += 1
        root = int(by_degree[cursor])
        visited[root] = True
        comp = [root]
        head = 0
        while head < len(comp):
            v = comp[head]
            head += 1
            cand = nbrs[v][~visited[nbrs[v]]]
            if len(cand):
                for u in cand[np.lexsort((cand, deg[cand]))].tolist():
                    visited[u] = True
                    comp.append(u)
        out.extend(reversed(comp))
    return np.array(out, dtype=np.int64)


def orthonormalize_gaussian(s: np.ndarray) -> np.ndarray:
    """Quartic-time baseline: E with E·Eᵀ = S, one full elimination per column.

    Every output column k triggers a complete fresh elimination of a copy of
    S, from which column k of the factor is taken: n passes of Θ(n³) work,
    Θ(n⁴) total, against which the single-factorization path is benchmarked.
    Intended for dense, modest-order inputs.

    Raises:
        SoftVsmError: non-square or asymmetric input.
        NotPositiveDefinite: elimination breakdown (non-positive pivot).
    """
    a = np.asarray(s, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("matrix must be square")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
        raise SoftVsmError("matrix must be symmetric")
    n = a.shape[0]
    e = np.zeros((n, n))
    for k in range(n):
        work = np.asfortranarray(a)  # fresh copy: each pass eliminates from scratch
        c, info = dpotrf(work, lower=1, overwrite_a=1)
        if info > 0:
            raise NotPositiveDefinite(info - 1)
        if info < 0:
            raise SoftVsmError(f"internal factorization failure (argument {-info})")
        e[k:, k] = c[k:, k]
    return e


def transform_to_orthonormal(
    x: SparseDocVector, weights: TermWeights, chol: CholeskyFactor
) -> np.ndarray:
    """Coordinates of a document in the orthonormal basis: Fᵀ·Pᵀ·(Wx).

    Dot products of transformed vectors equal the soft inner product
    (Wx)ᵀS(Wy) exactly (up to rounding), because S = (PF)(PF)ᵀ.

    Returns a dense length-n vector.

    Raises:
        DimensionMismatch: when x, weights, and the factor disagree on n.
    """
    n = chol.n
    if x.dim != n or weights.dim != n:
        raise DimensionMismatch(
            f"dimensions disagree: x has {x.dim}, weights {weights.dim}, factor {n}"
        )
    q = np.zeros(n)
    q[x.indices] = weights.w[x.indices] * x.values
    u = q[chol.perm]
    f = chol.factor
    contrib = f.data * u[f.indices]
    return np.bincount(f._col_of(), weights=contrib, minlength=n)
