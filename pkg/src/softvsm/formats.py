"""File formats: Matrix Market matrices, word2vec text embeddings, and the
corpus/vocabulary/weights text files.

All floats are written with 17 significant digits (``%.17g``), which
round-trips IEEE double exactly, so save → load reproduces every matrix and
weight vector bit-for-bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import (
    CscMatrix,
    FileFormatError,
    SimilarityMatrix,
    TermWeights,
    Vocabulary,
    tokenize,
)
from .factor import CholeskyFactor

__all__ = [
    "write_matrix_market",
    "read_matrix_market",
    "write_similarity",
    "read_similarity",
    "read_embeddings",
    "read_corpus",
    "write_vocabulary",
    "read_vocabulary",
    "write_weights",
    "read_weights",
    "write_factor",
    "read_factor",
]

_MM_BANNER = "%%MatrixMarket"


def _require_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc


def write_matrix_market(path, matrix: CscMatrix, *, symmetric: bool = False) -> None:
    """Write a square sparse matrix in Matrix Market coordinate format.

    With symmetric=True only the lower triangle is stored under the
    ``symmetric`` qualifier (the matrix must actually be symmetric);
    otherwise every entry is stored under ``general``. Indices are 1-based.
    """
    rows = matrix.indices
    cols = matrix._col_of()
    vals = matrix.data
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        kind = "symmetric"
    else:
        kind = "general"
    lines = [f"{_MM_BANNER} matrix coordinate real {kind}\n"]
    lines.append(f"{matrix.n} {matrix.n} {len(vals)}\n")
    for r, c, v in zip(rows, cols, vals):
        lines.append(f"{r + 1} {c + 1} {v:.17g}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_matrix_market(path) -> tuple[CscMatrix, bool]:
    """Read a Matrix Market coordinate file; returns (matrix, symmetric).

    Symmetric files are expanded to full storage (both triangles).

    Raises:
        FileFormatError: on a malformed header, size line, or entry.
    """
    lines = _require_text(path).splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split()
    if (
        len(header) != 5
        or header[0] != _MM_BANNER
        or [h.lower() for h in header[1:4]] != ["matrix", "coordinate", "real"]
        or header[4].lower() not in ("general", "symmetric")
    ):
        raise FileFormatError(f"{path}: unsupported Matrix Market header {lines[0]!r}")
    symmetric = header[4].lower() == "symmetric"

    body = [
        ln for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise FileFormatError(f"{path}: missing size line")
    size = body[0].split()
    try:
        n_rows, n_cols, nnz = (int(f) for f in size)
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad size line {body[0]!r}") from exc
    if n_rows != n_cols:
        raise FileFormatError(f"{path}: matrix must be square, got {n_rows}x{n_cols}")
    if len(body) - 1 != nnz:
        raise FileFormatError(
            f"{path}: size line promises {nnz} entries, found {len(body) - 1}"
        )

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for i, ln in enumerate(body[1:]):
        fields = ln.split()
        if len(fields) != 3:
            raise FileFormatError(f"{path}: bad entry line {ln!r}")
        try:
            r, c, v = int(fields[0]), int(fields[1]), float(fields[2])
        except ValueError as exc:
            raise FileFormatError(f"{path}: bad entry line {ln!r}") from exc
        if not (1 <= r <= n_rows and 1 <= c <= n_cols):
            raise FileFormatError(f"{path}: index out of range in {ln!r}")
        rows[i], cols[i], vals[i] = r - 1, c - 1, v
    if symmetric:
        if np.any(rows < cols):
            raise FileFormatError(
                f"{path}: symmetric file stores entries above the diagonal"
            )
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return CscMatrix.from_coo(n_rows, rows, cols, vals), symmetric


def write_similarity(path, matrix: SimilarityMatrix) -> None:
    """Write a similarity matrix; the symmetric flag picks the MM qualifier."""
    write_matrix_market(path, matrix, symmetric=matrix.symmetric)


def read_similarity(path) -> SimilarityMatrix:
    """Read a similarity matrix; symmetry comes from the file header and
    non-negativity from the data. Validates unit diagonal and |s| <= 1.
    """
    matrix, symmetric = read_matrix_market(path)
    nonnegative = bool(matrix.data.min() >= 0.0) if matrix.nnz else True
    return SimilarityMatrix.from_csc(
        matrix, symmetric=symmetric, nonnegative=nonnegative
    )


def read_embeddings(path) -> dict[str, np.ndarray]:
    """Read word2vec text format: a "count dim" line, then per line one
    term and dim reals, whitespace-separated.

    Raises:
        FileFormatError: on malformed counts, dimensions, or duplicates.
    """
    lines = _require_text(path).splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty embeddings file")
    head = lines[0].split()
    if len(head) != 2:
        raise FileFormatError(f"{path}: first line must be 'count dim'")
    try:
        count, dim = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FileFormatError(f"{path}: first line must be 'count dim'") from exc
    if count < 0 or dim < 1:
        raise FileFormatError(f"{path}: bad count/dim {count}/{dim}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise FileFormatError(
            f"{path}: header promises {count} vectors, found {len(body)}"
        )
    out: dict[str, np.ndarray] = {}
    for ln in body:
        fields = ln.split()
        if len(fields) != dim + 1:
            raise FileFormatError(
                f"{path}: expected a term and {dim} values, got {len(fields)} fields"
            )
        term = fields[0]
        if term in out:
            raise FileFormatError(f"{path}: duplicate term {term!r}")
        try:
            out[term] = np.array([float(f) for f in fields[1:]])
        except ValueError as exc:
            raise FileFormatError(f"{path}: bad vector for {term!r}") from exc
    return out


def read_corpus(path) -> list[list[str]]:
    """Read a corpus file (UTF-8, one document per line) as token lists."""
    return [tokenize(line) for line in _require_text(path).splitlines()]


def write_vocabulary(path, vocabulary: Vocabulary) -> None:
    """One term per line (line number = index) with a tab-separated
    document-frequency column."""
    lines = []
    for term, df in zip(vocabulary.terms, vocabulary.doc_freq):
        if "\t" in term or "\n" in term or "\r" in term:
            raise FileFormatError(f"term may not contain tabs or newlines: {term!r}")
        lines.append(f"{term}\t{int(df)}\n")
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_vocabulary(path) -> Vocabulary:
    """Inverse of write_vocabulary.

    Raises:
        FileFormatError: on malformed lines or duplicate terms.
    """
    terms: list[str] = []
    doc_freq: list[int] = []
    for lineno, line in enumerate(_require_text(path).splitlines(), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FileFormatError(
                f"{path}:{lineno}: expected 'term<TAB>doc_freq'"
            )
        try:
            doc_freq.append(int(parts[1]))
        except ValueError as exc:
            raise FileFormatError(
                f"{path}:{lineno}: bad doc_freq {parts[1]!r}"
            ) from exc
        terms.append(parts[0])
    try:
        return Vocabulary(
            terms=tuple(terms), doc_freq=np.array(doc_freq, dtype=np.int64)
        )
    except Exception as exc:
        raise FileFormatError(f"{path}: invalid vocabulary: {exc}") from exc


def write_weights(path, vocabulary: Vocabulary, weights: TermWeights) -> None:
    """One 'term<TAB>weight' line per vocabulary term (17 significant digits)."""
    if weights.dim != len(vocabulary):
        raise FileFormatError("weights and vocabulary sizes differ")
    lines = [
        f"{term}\t{w:.17g}\n" for term, w in zip(vocabulary.terms, weights.w)
    ]
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_weights(path, vocabulary: Vocabulary) -> TermWeights:
    """Read 'term<TAB>weight' lines into vocabulary order.

    Every vocabulary term must be assigned exactly once; unknown terms are
    rejected.

    Raises:
        FileFormatError: on malformed lines, unknown terms, duplicates, or
            missing terms.
    """
    w = np.full(len(vocabulary), np.nan)
    for lineno, line in enumerate(_require_text(path).splitlines(), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FileFormatError(f"{path}:{lineno}: expected 'term<TAB>weight'")
        idx = vocabulary.get(parts[0])
        if idx is None:
            raise FileFormatError(f"{path}:{lineno}: unknown term {parts[0]!r}")
        if not np.isnan(w[idx]):
            raise FileFormatError(f"{path}:{lineno}: duplicate term {parts[0]!r}")
        try:
            w[idx] = float(parts[1])
        except ValueError as exc:
            raise FileFormatError(
                f"{path}:{lineno}: bad weight {parts[1]!r}"
            ) from exc
    missing = np.isnan(w)
    if np.any(missing):
        term = vocabulary.terms[int(np.nonzero(missing)[0][0])]
        raise FileFormatError(f"{path}: no weight for term {term!r}")
    return TermWeights(w)


def write_factor(factor: CholeskyFactor, matrix_path, perm_path) -> None:
    """Export a factorization: the lower-triangular factor as a general
    Matrix Market file plus a permutation file, one 0-based index per line.
    """
    write_matrix_market(matrix_path, factor.factor, symmetric=False)
    Path(perm_path).write_text(
        "".join(f"{int(p)}\n" for p in factor.perm), encoding="utf-8"
    )


def read_factor(matrix_path, perm_path) -> CholeskyFactor:
    """Inverse of write_factor.

    Raises:
        FileFormatError: on malformed files or an invalid permutation.
    """
    matrix, _ = read_matrix_market(matrix_path)
    perm = []
    for lineno, line in enumerate(_require_text(perm_path).splitlines(), start=1):
        try:
            perm.append(int(line.strip()))
        except ValueError as exc:
            raise FileFormatError(
                f"{perm_path}:{lineno}: bad permutation entry {line!r}"
            ) from exc
    try:
        return CholeskyFactor(
            perm=np.array(perm, dtype=np.int64), factor=matrix, n=matrix.n
        )
    except Exception as exc:
        raise FileFormatError(f"invalid factorization files: {exc}") from exc
