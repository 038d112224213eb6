"""Sparse soft vector space model.

Document similarity that respects term-term similarity: sparse similarity
matrix construction, column-capped sparsification, sparse Cholesky
orthonormalization, linear-time soft inner products, rank-preserving
coordinate transforms, and an inverted index with similarity-driven query
expansion.
"""

from .core import (
    AugmentationUndefined,
    CorpusMatrix,
    CscMatrix,
    DimensionMismatch,
    EmptyCorpusError,
    FileFormatError,
    NotPositiveDefinite,
    SimilarityMatrix,
    SoftVsmError,
    SparseDocVector,
    TermWeights,
    Vocabulary,
    ZeroNormDocument,
    build_vocabulary,
    detokenize,
    identity_similarity,
    idf_weights,
    tokenize,
    uniform_weights,
    vectorize,
)

from .factor import (
    CholeskyFactor,
    cholesky,
    orthonormalize_gaussian,
    rcm_order,
    transform_to_orthonormal,
)
from .invindex import (
    InvertedIndex,
    Posting,
    expand_query,
    index_corpus,
    load_index,
    save_index,
    search,
)
from .scm import batch_inner, batch_scm, inner_product_sparse, soft_cosine
from .simatrix import (
    SparsifyConfig,
    build_similarity_edit,
    build_similarity_embedding,
    is_strictly_diagonally_dominant,
    levenshtein,
    sparsify,
)
from .transform import (
    DocTransformed,
    QueryTransformed,
    doc_for_cosine,
    doc_for_scm,
    dot_transformed,
    query_for_cosine,
    query_for_dot,
)

from . import bench, formats

__version__ = "0.1.0"

__all__ = [
    "AugmentationUndefined",
    "CholeskyFactor",
    "CorpusMatrix",
    "CscMatrix",
    "DimensionMismatch",
    "DocTransformed",
    "QueryTransformed",
    "EmptyCorpusError",
    "FileFormatError",
    "InvertedIndex",
    "NotPositiveDefinite",
    "Posting",
    "SimilarityMatrix",
    "SoftVsmError",
    "SparseDocVector",
    "SparsifyConfig",
    "TermWeights",
    "Vocabulary",
    "ZeroNormDocument",
    "batch_inner",
    "batch_scm",
    "bench",
    "build_similarity_edit",
    "build_similarity_embedding",
    "build_vocabulary",
    "cholesky",
    "detokenize",
    "doc_for_cosine",
    "doc_for_scm",
    "dot_transformed",
    "expand_query",
    "formats",
    "identity_similarity",
    "idf_weights",
    "index_corpus",
    "inner_product_sparse",
    "is_strictly_diagonally_dominant",
    "levenshtein",
    "load_index",
    "orthonormalize_gaussian",
    "query_for_cosine",
    "query_for_dot",
    "rcm_order",
    "save_index",
    "search",
    "soft_cosine",
    "sparsify",
    "tokenize",
    "transform_to_orthonormal",
    "uniform_weights",
    "vectorize",
    "__version__",
]
