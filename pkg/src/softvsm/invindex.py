"""Inverted index with similarity-driven query expansion and exact SCM ranking.

The index maps each vocabulary term to a posting — the sorted list of
documents containing it. A query is first expanded to the non-zero support
of Sᵀx, so documents sharing only *similar* terms with the query still make
the candidate set; candidates are then scored with the exact Soft Cosine
Measure (no approximation or pruning) using per-document norms precomputed
at build time.

Scoring sweeps the postings of the expanded terms into a dense
document-score accumulator, so a search never reconstructs document
vectors: the numerator (Wx)ᵀS(Wy) is Σⱼ zⱼ·wⱼ·tf(y,j) with z = Sᵀ(Wx).

The norms bake in the similarity matrix current at build time; swapping S
requires a rebuild (callers can compare `matrix_digest` to detect drift).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    CorpusMatrix,
    DimensionMismatch,
    FileFormatError,
    SimilarityMatrix,
    SoftVsmError,
    SparseDocVector,
    TermWeights,
    Vocabulary,
    ZeroNormDocument,
)
from .formats import read_vocabulary, write_vocabulary
from .scm import inner_product_sparse
from .transform import _matvec_into_rows

__all__ = [
    "Posting",
    "InvertedIndex",
    "index_corpus",
    "expand_query",
    "search",
    "save_index",
    "load_index",
]

FORMAT_VERSION = "1"

_METADATA_FILE = "metadata.json"
_VOCABULARY_FILE = "vocabulary.tsv"
_NORMS_FILE = "norms.tsv"
_POSTINGS_FILE = "postings.tsv"


@dataclass(frozen=True)
class Posting:
    """Documents containing one term, by corpus position.

    Attributes:
        term_index: the term's vocabulary index.
        positions: corpus positions, strictly increasing.
        frequencies: term counts per document, parallel to positions, >= 1.
    """

    term_index: int
    positions: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.int64)
        freq = np.ascontiguousarray(self.frequencies, dtype=np.float64)
        if pos.ndim != 1 or freq.ndim != 1 or len(pos) != len(freq):
            raise FileFormatError("posting positions/frequencies must be parallel")
        if len(pos):
            if pos[0] < 0:
                raise FileFormatError("negative document position")
            if np.any(np.diff(pos) <= 0):
                raise FileFormatError("posting positions must be strictly increasing")
            if freq.min() < 1.0:
                raise FileFormatError("term frequencies must be >= 1")
        pos.flags.writeable = False
        freq.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "frequencies", freq)

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class InvertedIndex:
    """Immutable searchable index over one corpus.

    Attributes:
        vocabulary: the term space the index was built over.
        doc_ids: external document ids in corpus-position order.
        postings: one Posting per vocabulary term.
        doc_norms: √((Wy)ᵀS(Wy)) per document, strictly positive.
        matrix_digest: content digest of the similarity matrix used at
            build time (compare before querying to detect a stale index).
        weights_digest: digest of the term weights used at build time.
    """

    vocabulary: Vocabulary
    doc_ids: tuple[str, ...]
    postings: tuple[Posting, ...]
    doc_norms: np.ndarray
    matrix_digest: str
    weights_digest: str

    def __post_init__(self):
        object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
        object.__setattr__(self, "postings", tuple(self.postings))
        norms = np.ascontiguousarray(self.doc_norms, dtype=np.float64)
        norms.flags.writeable = False
        object.__setattr__(self, "doc_norms", norms)
        n_terms = len(self.vocabulary)
        count = len(self.doc_ids)
        if len(set(self.doc_ids)) != count:
            raise FileFormatError("doc_ids must be unique")
        if len(self.postings) != n_terms:
            raise DimensionMismatch("one posting per vocabulary term required")
        if len(norms) != count:
            raise DimensionMismatch("one norm per document required")
        if count and norms.size and norms.min() <= 0:
            raise FileFormatError("document norms must be strictly positive")
        for t, p in enumerate(self.postings):
            if p.term_index != t:
                raise FileFormatError(f"posting {t} carries term_index {p.term_index}")
            if len(p) and p.positions[-1] >= count:
                raise FileFormatError("posting references a missing document")

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)


def weights_digest(weights: TermWeights) -> str:
    """SHA-256 over the weight vector's canonical byte representation."""
    h = hashlib.sha256()
    h.update(np.int64(weights.dim).tobytes())
    h.update(weights.w.tobytes())
    return h.hexdigest()


def index_corpus(
    corpus: CorpusMatrix,
    weights: TermWeights,
    matrix: SimilarityMatrix,
    vocabulary: Vocabulary,
) -> InvertedIndex:
    """Build an index: complete sorted postings plus per-document soft norms.

    Raises:
        ZeroNormDocument: naming any document whose soft self-similarity is
            not positive (an empty document always fails).
        DimensionMismatch: when corpus, weights, matrix, and vocabulary
            disagree on the vocabulary size.
    """
    n = matrix.n
    if len(vocabulary) != n or weights.dim != n:
        raise DimensionMismatch("vocabulary, weights, and matrix sizes must agree")
    if len(corpus) and corpus.dim != n:
        raise DimensionMismatch("corpus dimension does not match the matrix")

    by_term_pos: list[list[int]] = [[] for _ in range(n)]
    by_term_freq: list[list[float]] = [[] for _ in range(n)]
    norms = np.empty(len(corpus))
    for p, (doc, doc_id) in enumerate(zip(corpus.columns, corpus.doc_ids)):
        self_sim = inner_product_sparse(doc, doc, weights, matrix)
        if self_sim <= 0.0:
            raise ZeroNormDocument(doc_id)
        norms[p] = np.sqrt(self_sim)
        for i, v in zip(doc.indices, doc.values):
            by_term_pos[i].append(p)
            by_term_freq[i].append(float(v))

    postings = tuple(
        Posting(
            term_index=t,
            positions=np.array(by_term_pos[t], dtype=np.int64),
            frequencies=np.array(by_term_freq[t]),
        )
        for t in range(n)
    )
    return InvertedIndex(
        vocabulary=vocabulary,
        doc_ids=corpus.doc_ids,
        postings=postings,
        doc_norms=norms,
        matrix_digest=matrix.content_digest(),
        weights_digest=weights_digest(weights),
    )


def expand_query(x: SparseDocVector, matrix: SimilarityMatrix) -> set[int]:
    """Term indices whose postings can contain a non-zero-scoring document:
    the non-zero support of Sᵀx over the query's binary support (≤ m·C).
    """
    if x.dim != matrix.n:
        raise DimensionMismatch("query dimension does not match the matrix")
    idx, _ = _matvec_into_rows(matrix, x.indices, np.ones(x.nnz))
    return {int(i) for i in idx}


def search(
    index: InvertedIndex,
    query: SparseDocVector,
    weights: TermWeights,
    matrix: SimilarityMatrix,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k documents by SCM, descending; ties broken by ascending doc_id.

    Exactly reproduces a brute-force soft_cosine ranking over every indexed
    document: candidates (union of postings over the expanded terms) are
    scored by one accumulator sweep, and every other document scores 0.

    The similarity matrix and weights must be the ones the index was built
    with (compare the stored digests); norms are not recomputed here.

    Raises:
        SoftVsmError: when k < 1.
        ZeroNormDocument: for a query with support but zero soft norm.
        DimensionMismatch: on dimension disagreement.
    """
    if k < 1:
        raise SoftVsmError(f"k must be >= 1, got {k}")
    n = matrix.n
    if query.dim != n or weights.dim != n or len(index.vocabulary) != n:
        raise DimensionMismatch("query, weights, matrix, and index sizes must agree")
    if index.doc_count == 0 or query.nnz == 0:
        return []

    w = weights.w
    q_idx, q_val = query.indices, w[query.indices] * query.values
    keep = q_val != 0.0
    z_idx, z_val = _matvec_into_rows(matrix, q_idx[keep], q_val[keep])
    self_q = inner_product_sparse(query, query, weights, matrix)
    if self_q <= 0.0:
        raise ZeroNormDocument("query")

    acc = np.zeros(index.doc_count)
    for j, zj in zip(z_idx, z_val):
        posting = index.postings[j]
        if len(posting):
            acc[posting.positions] += (zj * w[j]) * posting.frequencies

    scores = acc / (np.sqrt(self_q) * index.doc_norms)
    order = sorted(range(index.doc_count), key=lambda p: (-scores[p], index.doc_ids[p]))
    return [(index.doc_ids[p], float(scores[p])) for p in order[:k]]


def _safe_field(text: str, what: str) -> str:
    if "\t" in text or "\n" in text or "\r" in text:
        raise FileFormatError(f"{what} may not contain tabs or newlines: {text!r}")
    return text


def save_index(index: InvertedIndex, directory) -> None:
    """Persist the index as a versioned directory of TSV/JSON files.

    Layout: metadata.json (version, doc_count, digests), vocabulary.tsv
    (term, doc_freq), norms.tsv (doc_id, norm — line order defines document
    positions), postings.tsv (term_index, doc_id, tf, sorted). All floats
    are written with 17 significant digits, so a load reproduces search
    scores bit-for-bit.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    meta = {
        "format_version": FORMAT_VERSION,
        "doc_count": index.doc_count,
        "matrix_digest": index.matrix_digest,
        "weights_digest": index.weights_digest,
    }
    (directory / _METADATA_FILE).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )

    write_vocabulary(directory / _VOCABULARY_FILE, index.vocabulary)

    norm_lines = [
        f"{_safe_field(doc_id, 'doc id')}\t{norm:.17g}\n"
        for doc_id, norm in zip(index.doc_ids, index.doc_norms)
    ]
    (directory / _NORMS_FILE).write_text("".join(norm_lines))

    triples = []
    for posting in index.postings:
        for p, tf in zip(posting.positions, posting.frequencies):
            triples.append((posting.term_index, index.doc_ids[p], tf))
    triples.sort(key=lambda t: (t[0], t[1]))
    posting_lines = [f"{t}\t{doc_id}\t{tf:.17g}\n" for t, doc_id, tf in triples]
    (directory / _POSTINGS_FILE).write_text("".join(posting_lines))


def _split_line(line: str, n_fields: int, path: Path, lineno: int) -> list[str]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != n_fields:
        raise FileFormatError(
            f"{path.name}:{lineno}: expected {n_fields} tab-separated fields"
        )
    return parts


def load_index(directory) -> InvertedIndex:
    """Load an index persisted by save_index.

    Raises:
        FileFormatError: on a missing file, unsupported version, or any
            malformed line.
    """
    directory = Path(directory)
    try:
        meta = json.loads((directory / _METADATA_FILE).read_text())
    except OSError as exc:
        raise FileFormatError(f"cannot read index metadata: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"malformed index metadata: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported index format version {meta.get('format_version')!r}"
        )

    vocabulary = read_vocabulary(directory / _VOCABULARY_FILE)
    n_terms = len(vocabulary)

    doc_ids: list[str] = []
    norms: list[float] = []
    path = directory / _NORMS_FILE
    try:
        norms_text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read norms: {exc}") from exc
    for lineno, line in enumerate(norms_text.splitlines(), start=1):
        doc_id, norm = _split_line(line, 2, path, lineno)
        try:
            norms.append(float(norm))
        except ValueError as exc:
            raise FileFormatError(f"{path.name}:{lineno}: bad norm {norm!r}") from exc
        doc_ids.append(doc_id)
    if len(doc_ids) != meta.get("doc_count"):
        raise FileFormatError(
            f"metadata says {meta.get('doc_count')} documents, "
            f"norms file has {len(doc_ids)}"
        )
    position = {doc_id: p for p, doc_id in enumerate(doc_ids)}

    by_term: dict[int, list[tuple[int, float]]] = {}
    path = directory / _POSTINGS_FILE
    try:
        postings_text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read postings: {exc}") from exc
    for lineno, line in enumerate(postings_text.splitlines(), start=1):
        t_str, doc_id, tf_str = _split_line(line, 3, path, lineno)
        try:
            t = int(t_str)
            tf = float(tf_str)
        except ValueError as exc:
            raise FileFormatError(f"{path.name}:{lineno}: bad numeric field") from exc
        if not 0 <= t < n_terms:
            raise FileFormatError(f"{path.name}:{lineno}: term index {t} out of range")
        if doc_id not in position:
            raise FileFormatError(f"{path.name}:{lineno}: unknown document {doc_id!r}")
        by_term.setdefault(t, []).append((position[doc_id], tf))

    postings = []
    for t in range(n_terms):
        entries = sorted(by_term.get(t, []))
        postings.append(
            Posting(
                term_index=t,
                positions=np.array([p for p, _ in entries], dtype=np.int64),
                frequencies=np.array([tf for _, tf in entries]),
            )
        )

    return InvertedIndex(
        vocabulary=vocabulary,
        doc_ids=tuple(doc_ids),
        postings=tuple(postings),
        doc_norms=np.array(norms),
        matrix_digest=str(meta.get("matrix_digest", "")),
        weights_digest=str(meta.get("weights_digest", "")),
    )
