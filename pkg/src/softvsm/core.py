"""Core containers for the sparse soft vector space model.

Documents live in term space as sparse non-negative count vectors. A diagonal
term-weight vector W and a term-similarity matrix S (unit diagonal, stored in
compressed sparse column form) together define the bilinear form

    <x, y> = (Wx)' S (Wy)

that the rest of the package evaluates, factorizes, and searches with.
"""

from __future__ import annotations

import hashlib
import math
import unicodedata
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SoftVsmError",
    "EmptyCorpusError",
    "DimensionMismatch",
    "NotPositiveDefinite",
    "ZeroNormDocument",
    "AugmentationUndefined",
    "FileFormatError",
    "tokenize",
    "Vocabulary",
    "build_vocabulary",
    "SparseDocVector",
    "vectorize",
    "detokenize",
    "TermWeights",
    "uniform_weights",
    "idf_weights",
    "CscMatrix",
    "SimilarityMatrix",
    "identity_similarity",
    "CorpusMatrix",
]


# ---------------------------------------------------------------------------
# Errors


class SoftVsmError(Exception):
    """Base class for every domain error raised by this package."""


class EmptyCorpusError(SoftVsmError):
    """Raised when an operation requires at least one document."""


class DimensionMismatch(SoftVsmError):
    """Raised when vector/matrix/vocabulary dimensions disagree."""


class NotPositiveDefinite(SoftVsmError):
    """Raised when a factorization hits a non-positive pivot.

    Attributes:
        column: index (in the input matrix's own numbering) of the column
            whose pivot failed.
    """

    def __init__(self, column: int):
        self.column = int(column)
        super().__init__(f"matrix not positive definite (column {self.column})")


class ZeroNormDocument(SoftVsmError):
    """Raised when a document (or query) has non-positive self-similarity."""

    def __init__(self, doc_id: str = "document"):
        self.doc_id = doc_id
        super().__init__(f"zero-norm document: {doc_id}")


class AugmentationUndefined(SoftVsmError):
    """Raised when the unit-sphere augmentation coordinate would be imaginary."""


class FileFormatError(SoftVsmError):
    """Raised when an on-disk artifact cannot be parsed."""


# ---------------------------------------------------------------------------
# Tokenization

# Apostrophes are word-internal/clitic characters ("i'", "don't") and are
# never stripped; every other leading/trailing punctuation character is.
_APOSTROPHES = frozenset({"'", "’"})


def _strippable(ch: str) -> bool:
    return ch not in _APOSTROPHES and unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase terms.

    Lowercases, splits on Unicode whitespace, then strips leading and
    trailing punctuation from each piece — except apostrophes, which stay,
    so clitic forms like ``i'`` remain distinct terms. Pieces that are
    punctuation-only vanish. Deterministic; never raises.
    """
    out: list[str] = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and _strippable(raw[start]):
            start += 1
        while end > start and _strippable(raw[end - 1]):
            end -= 1
        if end > start:
            out.append(raw[start:end])
    return out


# ---------------------------------------------------------------------------
# Vocabulary


@dataclass(frozen=True)
class Vocabulary:
    """Immutable term list in first-appearance order with document frequencies.

    Attributes:
        terms: unique terms, position = term index.
        doc_freq: int64 array, doc_freq[i] = number of documents containing
            terms[i] at least once (always >= 1 for a corpus-built vocabulary).
    """

    terms: tuple[str, ...]
    doc_freq: np.ndarray
    _index: Mapping[str, int] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if len(self.terms) != len(set(self.terms)):
            raise FileFormatError("vocabulary terms must be unique")
        if any(not t for t in self.terms):
            raise FileFormatError("vocabulary terms must be non-empty")
        df = np.asarray(self.doc_freq, dtype=np.int64)
        if df.shape != (len(self.terms),):
            raise DimensionMismatch(
                f"doc_freq length {df.shape} does not match {len(self.terms)} terms"
            )
        if len(df) and df.min() < 0:
            raise FileFormatError("document frequencies must be non-negative")
        df.flags.writeable = False
        object.__setattr__(self, "doc_freq", df)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def index_of(self, term: str) -> int:
        """Index of a term; raises KeyError for unknown terms."""
        return self._index[term]

    def get(self, term: str) -> int | None:
        return self._index.get(term)


def build_vocabulary(corpus: Iterable[Sequence[str]]) -> Vocabulary:
    """Collect unique terms from tokenized documents, in first-appearance order.

    Args:
        corpus: iterable of token lists, one per document.

    Returns:
        Vocabulary with per-term document frequencies (each counted at most
        once per document).

    Raises:
        EmptyCorpusError: if the corpus contains no documents at all.
    """
    order: dict[str, int] = {}
    freq: list[int] = []
    n_docs = 0
    for doc in corpus:
        n_docs += 1
        seen_here: set[int] = set()
        for term in doc:
            idx = order.get(term)
            if idx is None:
                idx = len(freq)
                order[term] = idx
                freq.append(0)
            if idx not in seen_here:
                seen_here.add(idx)
                freq[idx] += 1
    if n_docs == 0:
        raise EmptyCorpusError("empty corpus")
    return Vocabulary(
        terms=tuple(order), doc_freq=np.array(freq, dtype=np.int64)
    )


# ---------------------------------------------------------------------------
# Sparse document vectors


@dataclass(frozen=True)
class SparseDocVector:
    """Sparse non-negative vector over term indices.

    Attributes:
        indices: int64 array, strictly increasing, all < dim.
        values: float64 array, strictly positive, same length as indices.
        dim: dimension of the ambient term space.
    """

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.ndim != 1 or val.ndim != 1 or len(idx) != len(val):
            raise DimensionMismatch("indices and values must be 1-d and equal length")
        if len(idx):
            if np.any(np.diff(idx) <= 0):
                raise FileFormatError("vector indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise DimensionMismatch(
                    f"vector index out of range for dimension {self.dim}"
                )
            if val.min() <= 0:
                raise FileFormatError("vector values must be positive")
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    @classmethod
    def from_dense(cls, v: np.ndarray) -> "SparseDocVector":
        v = np.asarray(v, dtype=np.float64)
        idx = np.nonzero(v)[0]
        return cls(indices=idx, values=v[idx], dim=len(v))


def vectorize(doc: Sequence[str], vocabulary: Vocabulary) -> SparseDocVector:
    """Count-vectorize one tokenized document against a vocabulary.

    Unknown terms are dropped. The empty document (or one whose terms are
    all unknown) maps to the empty vector.

    Raises:
        EmptyCorpusError: if the vocabulary has no terms.
    """
    if len(vocabulary) == 0:
        raise EmptyCorpusError("empty vocabulary")
    counts: dict[int, float] = {}
    for term in doc:
        idx = vocabulary.get(term)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    if not counts:
        return SparseDocVector(
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0),
            dim=len(vocabulary),
        )
    idx = np.array(sorted(counts), dtype=np.int64)
    val = np.array([counts[i] for i in idx])
    return SparseDocVector(indices=idx, values=val, dim=len(vocabulary))


def detokenize(vector: SparseDocVector, vocabulary: Vocabulary) -> list[str]:
    """Expand a count vector back to a term multiset, sorted by term index.

    Values must be integral (counts). Together with vectorize this gives the
    round-trip: sorted token multiset in, identical multiset out.
    """
    if vector.dim != len(vocabulary):
        raise DimensionMismatch("vector dimension does not match vocabulary size")
    out: list[str] = []
    for i, v in zip(vector.indices, vector.values):
        c = int(round(v))
        if abs(v - c) > 1e-9 or c < 1:
            raise FileFormatError(f"non-integral count {v} at term index {i}")
        out.extend([vocabulary.terms[i]] * c)
    return out


# ---------------------------------------------------------------------------
# Term weights


@dataclass(frozen=True)
class TermWeights:
    """Diagonal of the change-of-basis weight matrix W; entries >= 0."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise DimensionMismatch("weights must be a 1-d array")
        if len(w) and w.min() < 0:
            raise FileFormatError("term weights must be non-negative")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return len(self.w)


def uniform_weights(n: int) -> TermWeights:
    """All-ones weights (plain bag-of-words)."""
    return TermWeights(w=np.ones(n))


def idf_weights(vocabulary: Vocabulary, total_docs: int) -> TermWeights:
    """Smoothed inverse document frequency weights: w_i = 1 + ln(N / df_i).

    Terms with zero document frequency get weight 1.

    Raises:
        EmptyCorpusError: if total_docs is zero.
        DimensionMismatch: if any doc_freq exceeds total_docs.
    """
    if total_docs == 0:
        raise EmptyCorpusError("empty corpus")
    df = vocabulary.doc_freq
    if len(df) and df.max() > total_docs:
        raise DimensionMismatch(
            "document frequency exceeds the total document count"
        )
    w = np.ones(len(df))
    seen = df > 0
    w[seen] = 1.0 + np.log(total_docs / df[seen])
    return TermWeights(w=w)


# ---------------------------------------------------------------------------
# Compressed-sparse-column matrices


class CscMatrix:
    """Square sparse matrix in compressed sparse column (CSC) storage.

    Within each column, row indices are strictly increasing and explicit
    zeros are not stored. The three arrays are frozen after construction.
    """

    __slots__ = ("n", "indptr", "indices", "data")

    def __init__(
        self,
        n: int,
        indptr: np.ndarray,
        indices: np.ndarray,
        data: np.ndarray,
        *,
        validate: bool = True,
    ):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        if validate:
            self._validate()
        for arr in (self.indptr, self.indices, self.data):
            arr.flags.writeable = False

    def _validate(self):
        if self.indptr.shape != (self.n + 1,):
            raise DimensionMismatch("indptr must have length n + 1")
        if self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise FileFormatError("indptr endpoints are inconsistent")
        if np.any(np.diff(self.indptr) < 0):
            raise FileFormatError("indptr must be non-decreasing")
        if len(self.indices) != len(self.data):
            raise DimensionMismatch("indices and data lengths differ")
        if len(self.indices):
            if self.indices.min() < 0 or self.indices.max() >= self.n:
                raise DimensionMismatch("row index out of range")
        if len(self.indices) > 1:
            column_start = np.zeros(len(self.indices), dtype=bool)
            starts = self.indptr[1:-1]
            column_start[starts[starts < len(self.indices)]] = True
            if np.any((np.diff(self.indices) <= 0) & ~column_start[1:]):
                raise FileFormatError("rows within a column must strictly increase")
        if len(self.data) and np.any(self.data == 0.0):
            raise FileFormatError("explicit zeros are not stored")

    @property
    def nnz(self) -> int:
        return len(self.data)

    def col(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Row indices and values of column j (views, do not mutate)."""
        sl = slice(self.indptr[j], self.indptr[j + 1])
        return self.indices[sl], self.data[sl]

    def col_nnz(self) -> np.ndarray:
        return np.diff(self.indptr)

    def _col_of(self) -> np.ndarray:
        """Column index of every stored entry, in storage order."""
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))

    def diagonal(self) -> np.ndarray:
        col_of = self._col_of()
        mask = self.indices == col_of
        d = np.zeros(self.n)
        d[col_of[mask]] = self.data[mask]
        return d

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for j in range(self.n):
            rows, vals = self.col(j)
            out[rows, j] = vals
        return out

    def transpose(self) -> "CscMatrix":
        n = self.n
        col_of = self._col_of()
        order = np.lexsort((col_of, self.indices))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.indices, minlength=n), out=indptr[1:])
        return CscMatrix(n, indptr, col_of[order], self.data[order], validate=False)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Dense matrix-vector product A @ x, visiting only columns where x != 0."""
        if len(x) != self.n:
            raise DimensionMismatch("vector length does not match matrix order")
        out = np.zeros(self.n)
        for j in np.nonzero(x)[0]:
            rows, vals = self.col(j)
            out[rows] += vals * x[j]
        return out

    @staticmethod
    def from_coo(
        n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray
    ) -> "CscMatrix":
        """Build from coordinate triples; duplicates are an error, zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        keep = vals != 0.0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        order = np.lexsort((rows, cols))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows) > 1:
            same = (np.diff(cols) == 0) & (np.diff(rows) == 0)
            if np.any(same):
                raise FileFormatError("duplicate coordinate entry")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(cols, minlength=n), out=indptr[1:])
        return CscMatrix(n, indptr, rows, vals)

    @staticmethod
    def from_dense(a: np.ndarray) -> "CscMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch("matrix must be square")
        cols, rows = np.nonzero(a.T)  # column-major enumeration
        return CscMatrix.from_coo(a.shape[0], rows, cols, a[rows, cols])

    def equal_to(self, other: "CscMatrix") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )


class SimilarityMatrix(CscMatrix):
    """Term-similarity matrix: CSC, unit diagonal, |entries| <= 1.

    Attributes:
        symmetric: True iff the stored matrix equals its transpose exactly.
        nonnegative: True iff every stored entry is >= 0.
    """

    __slots__ = ("symmetric", "nonnegative")

    def __init__(
        self,
        n: int,
        indptr: np.ndarray,
        indices: np.ndarray,
        data: np.ndarray,
        *,
        symmetric: bool,
        nonnegative: bool,
        validate: bool = True,
    ):
        super().__init__(n, indptr, indices, data, validate=validate)
        self.symmetric = bool(symmetric)
        self.nonnegative = bool(nonnegative)
        if validate:
            if len(self.data) and np.max(np.abs(self.data)) > 1.0 + 1e-12:
                raise FileFormatError("similarity entries must satisfy |s| <= 1")
            if not np.all(self.diagonal() == 1.0):
                raise FileFormatError("similarity matrix must have a unit diagonal")
            if self.nonnegative and len(self.data) and self.data.min() < 0:
                raise FileFormatError("nonnegative flag set but negative entry found")
            if self.symmetric and not self.transpose().equal_to(self):
                raise FileFormatError("symmetric flag set but matrix is asymmetric")

    @staticmethod
    def from_csc(m: CscMatrix, *, symmetric: bool, nonnegative: bool) -> "SimilarityMatrix":
        return SimilarityMatrix(
            m.n,
            m.indptr,
            m.indices,
            m.data,
            symmetric=symmetric,
            nonnegative=nonnegative,
        )

    @staticmethod
    def from_dense_sim(a: np.ndarray) -> "SimilarityMatrix":
        m = CscMatrix.from_dense(a)
        a = np.asarray(a, dtype=np.float64)
        return SimilarityMatrix.from_csc(
            m,
            symmetric=bool(np.array_equal(a, a.T)),
            nonnegative=bool(m.data.min() >= 0) if m.nnz else True,
        )

    def content_digest(self) -> str:
        """SHA-256 over the canonical byte representation (order, structure, values)."""
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(self.indptr.tobytes())
        h.update(self.indices.tobytes())
        h.update(self.data.tobytes())
        return h.hexdigest()


def identity_similarity(n: int) -> SimilarityMatrix:
    """The identity matrix: every term similar only to itself."""
    idx = np.arange(n, dtype=np.int64)
    return SimilarityMatrix(
        n,
        np.arange(n + 1, dtype=np.int64),
        idx,
        np.ones(n),
        symmetric=True,
        nonnegative=True,
        validate=False,
    )


# ---------------------------------------------------------------------------
# Corpus


@dataclass(frozen=True)
class CorpusMatrix:
    """A corpus as columns of sparse document vectors, with external ids.

    Attributes:
        columns: document vectors, all of the same dimension.
        doc_ids: unique external identifiers, parallel to columns.
    """

    columns: tuple[SparseDocVector, ...]
    doc_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "doc_ids", tuple(str(d) for d in self.doc_ids))
        if len(self.columns) != len(self.doc_ids):
            raise DimensionMismatch("one doc_id per column required")
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise FileFormatError("doc_ids must be unique")
        dims = {c.dim for c in self.columns}
        if len(dims) > 1:
            raise DimensionMismatch("documents have differing dimensions")

    @property
    def dim(self) -> int:
        if not self.columns:
            raise EmptyCorpusError("empty corpus")
        return self.columns[0].dim

    def __len__(self) -> int:
        return len(self.columns)

    @classmethod
    def from_token_docs(
        cls,
        docs: Sequence[Sequence[str]],
        vocabulary: Vocabulary,
        doc_ids: Sequence[str] | None = None,
    ) -> "CorpusMatrix":
        """Vectorize tokenized documents; default ids are d0, d1, ..."""
        if doc_ids is None:
            doc_ids = tuple(f"d{i}" for i in range(len(docs)))
        cols = tuple(vectorize(d, vocabulary) for d in docs)
        return cls(columns=cols, doc_ids=tuple(doc_ids))
