"""Command-line front end tying the pipeline together.

Subcommands cover the full workflow: similarity-matrix construction
(`build-matrix`), sparsification (`sparsify`), factorization (`factorize`),
corpus indexing (`index`), top-k retrieval (`query`), pairwise score matrices
(`sim`), the factorization benchmark (`bench`), and transformed-vector export
for external ANN systems (`export-vectors`).

Conventions shared by every subcommand:

* exit code 0 on success, 1 on a domain or I/O error (message on stderr),
  2 on a usage error;
* ``--config FILE`` reads ``key = value`` defaults (same keys as the long
  flags); explicit flags override the file;
* identical inputs produce byte-identical outputs, except for measured
  timings in `bench`.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

from . import bench as bench_mod
from . import formats
from .core import (
    CorpusMatrix,
    SoftVsmError,
    TermWeights,
    Vocabulary,
    build_vocabulary,
    idf_weights,
    tokenize,
    uniform_weights,
    vectorize,
)
from .factor import DENSE_THRESHOLD_DEFAULT, cholesky
from .invindex import index_corpus, load_index, save_index, search, weights_digest
from .scm import batch_scm
from .simatrix import (
    DEFAULT_EDIT_EXPONENT,
    DEFAULT_EDIT_SCALE,
    SparsifyConfig,
    build_similarity_edit,
    build_similarity_embedding,
    sparsify,
)
from .transform import doc_for_cosine, doc_for_scm

__all__ = ["main"]


class _UsageError(Exception):
    """Bad flag combination or config entry; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Option tables
#
# One declaration drives argparse registration, config-file merging, the
# flag-beats-config precedence, and required-flag checks. At the argparse
# level every option defaults to None; real defaults are applied only after
# the config file has had its chance.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Opt:
    flag: str
    help: str
    convert: Callable[[str], object] = str
    default: object = None
    required: bool = False
    choices: tuple[str, ...] | None = None

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _csv_names(text: str) -> tuple[str, ...]:
    values = tuple(part.strip() for part in text.split(",") if part.strip())
    if not values:
        raise argparse.ArgumentTypeError("expected at least one name")
    return values


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")


_WEIGHT_OPTS = (
    _Opt(
        "--weights",
        "term-weighting scheme (default: uniform)",
        choices=("uniform", "idf"),
    ),
    _Opt(
        "--weights-file",
        "TSV of term<TAB>weight covering the whole vocabulary "
        "(mutually exclusive with --weights)",
    ),
)

_COMMAND_OPTIONS: dict[str, tuple[_Opt, ...]] = {
    "build-matrix": (
        _Opt(
            "--source",
            "where similarities come from",
            choices=("embedding", "edit", "file"),
            required=True,
        ),
        _Opt("--vocab", "vocabulary TSV (term<TAB>doc_freq)"),
        _Opt("--corpus", "corpus file (one document per line) to derive the vocabulary from"),
        _Opt("--embeddings", "word2vec-format text embeddings (for --source embedding)"),
        _Opt("--matrix", "existing similarity-matrix file (for --source file)"),
        _Opt(
            "--threshold",
            "drop off-diagonal similarities below this value (default: 0)",
            convert=_float,
            default=0.0,
        ),
        _Opt(
            "--alpha",
            f"edit-similarity scale in (0, 1] (default: {DEFAULT_EDIT_SCALE})",
            convert=_float,
            default=DEFAULT_EDIT_SCALE,
        ),
        _Opt(
            "--beta",
            f"edit-similarity exponent > 0 (default: {DEFAULT_EDIT_EXPONENT})",
            convert=_float,
            default=DEFAULT_EDIT_EXPONENT,
        ),
        _Opt("--out", "output matrix file", required=True),
    ),
    "sparsify": (
        _Opt("--matrix", "input similarity-matrix file", required=True),
        _Opt(
            "--max-per-column",
            "nonzero budget per column, diagonal included",
            convert=_int,
            required=True,
        ),
        _Opt(
            "--strategy",
            "selection strategy (default: greedy_symmetric)",
            choices=("topc_asymmetric", "greedy_symmetric"),
            default="greedy_symmetric",
        ),
        _Opt(
            "--order",
            "column processing order; increasing_doc_freq needs --vocab (default: as_is)",
            choices=("as_is", "increasing_doc_freq"),
            default="as_is",
        ),
        _Opt(
            "--dominance",
            "rescale off-diagonals for strict diagonal dominance (default: none)",
            choices=("none", "strict_diagonal"),
            default="none",
        ),
        _Opt(
            "--threshold",
            "drop entries with magnitude below this before selecting (default: 0)",
            convert=_float,
            default=0.0,
        ),
        _Opt("--vocab", "vocabulary TSV supplying document frequencies"),
        _Opt("--out", "output matrix file", required=True),
    ),
    "factorize": (
        _Opt("--matrix", "input similarity-matrix file", required=True),
        _Opt(
            "--permutation",
            "fill-reducing ordering (default: none)",
            choices=("none", "rcm"),
            default="none",
        ),
        _Opt(
            "--dense-threshold",
            "below this dimension, factorize densely "
            f"(default: {DENSE_THRESHOLD_DEFAULT})",
            convert=_int,
            default=DENSE_THRESHOLD_DEFAULT,
        ),
        _Opt("--out-factor", "output file for the triangular factor", required=True),
        _Opt("--out-perm", "output file for the permutation", required=True),
    ),
    "index": (
        _Opt("--corpus", "corpus file, one document per line", required=True),
        _Opt("--matrix", "similarity-matrix file", required=True),
        *_WEIGHT_OPTS,
        _Opt("--out", "output index directory", required=True),
    ),
    "query": (
        _Opt("--index", "index directory written by `index`", required=True),
        _Opt("--matrix", "similarity-matrix file used to build the index", required=True),
        *_WEIGHT_OPTS,
        _Opt("--k", "number of results (default: 10)", convert=_int, default=10),
    ),
    "sim": (
        _Opt("--corpus", "corpus file, one document per line", required=True),
        _Opt("--matrix", "similarity-matrix file", required=True),
        *_WEIGHT_OPTS,
        _Opt("--out", "write the TSV here instead of stdout"),
    ),
    "bench": (
        _Opt(
            "--sizes",
            "comma-separated matrix dimensions (default: 100,500,1000)",
            convert=_csv_ints,
            default=(100, 500, 1000),
        ),
        _Opt("--iters", "timed iterations per point (default: 10)", convert=_int, default=10),
        _Opt(
            "--algorithms",
            "comma-separated subset of cholesky,gaussian (default: both)",
            convert=_csv_names,
            default=("cholesky", "gaussian"),
        ),
        _Opt("--seed", "matrix-generation seed (default: 0)", convert=_int, default=0),
        _Opt(
            "--format",
            "output format (default: tsv)",
            choices=("tsv", "json-lines"),
            default="tsv",
        ),
        _Opt("--out", "write the report here instead of stdout"),
    ),
    "export-vectors": (
        _Opt("--corpus", "corpus file, one document per line", required=True),
        _Opt("--matrix", "similarity-matrix file", required=True),
        *_WEIGHT_OPTS,
        _Opt(
            "--variant",
            "dot: n coordinates for dot-product backends; "
            "cosine: n+1 unit-norm coordinates for cosine backends (default: dot)",
            choices=("dot", "cosine"),
            default="dot",
        ),
        _Opt("--out", "write the TSV here instead of stdout"),
    ),
}

_COMMAND_HELP = {
    "build-matrix": "build a term-similarity matrix from embeddings, edit distance, or a file",
    "sparsify": "cap the nonzeros per column of a similarity matrix",
    "factorize": "Cholesky-factorize a similarity matrix for orthonormal coordinates",
    "index": "build an inverted index over a corpus",
    "query": "rank indexed documents against a query string",
    "sim": "print the pairwise soft-cosine matrix of a corpus",
    "bench": "time dense Cholesky against the iterated-elimination baseline",
    "export-vectors": "emit transformed document vectors for external ANN systems",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softvsm",
        description="Sparse soft vector-space retrieval toolkit.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command, opts in _COMMAND_OPTIONS.items():
        sub = subparsers.add_parser(command, help=_COMMAND_HELP[command])
        if command == "query":
            sub.add_argument("text", help="query text; tokenized like corpus documents")
        for opt in opts:
            kwargs: dict = {"help": opt.help, "default": None}
            if opt.choices is not None:
                kwargs["choices"] = opt.choices
            if opt.convert is not str:
                kwargs["type"] = opt.convert
            sub.add_argument(opt.flag, **kwargs)
        sub.add_argument(
            "--config",
            default=None,
            help="key = value file of flag defaults; explicit flags win",
        )
    return parser


# ---------------------------------------------------------------------------
# Config merging
# ---------------------------------------------------------------------------


def _load_config(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, _, value = line.partition("=")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _merge_config(ns: argparse.Namespace, opts: tuple[_Opt, ...]) -> None:
    """Fill flags the command line left unset from the config file."""
    if ns.config is None:
        return
    by_dest = {opt.dest: opt for opt in opts}
    for key, raw in _load_config(ns.config).items():
        opt = by_dest.get(key)
        if opt is None:
            raise _UsageError(f"unknown config key {key!r} for command {ns.command!r}")
        if getattr(ns, opt.dest) is not None:
            continue  # explicit flag wins
        try:
            value = opt.convert(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise _UsageError(f"config key {key!r}: {exc}") from None
        if opt.choices is not None and value not in opt.choices:
            raise _UsageError(
                f"config key {key!r}: invalid choice {value!r} (choose from {opt.choices})"
            )
        setattr(ns, opt.dest, value)


def _finalize(ns: argparse.Namespace, opts: tuple[_Opt, ...]) -> None:
    """Apply documented defaults and enforce required flags, post-config."""
    for opt in opts:
        if getattr(ns, opt.dest) is None:
            if opt.required:
                raise _UsageError(f"{opt.flag} is required for {ns.command}")
            setattr(ns, opt.dest, opt.default)


# ---------------------------------------------------------------------------
# Shared loading helpers
# ---------------------------------------------------------------------------


def _load_corpus(path: str) -> tuple[CorpusMatrix, Vocabulary]:
    """Read a corpus file into count vectors with stable line-derived ids.

    Ids are `d` plus the 1-based line number, zero-padded so lexicographic
    order matches document order.
    """
    docs = formats.read_corpus(path)
    vocabulary = build_vocabulary(docs)
    width = max(1, len(str(len(docs))))
    doc_ids = tuple(f"d{i:0{width}d}" for i in range(1, len(docs) + 1))
    columns = tuple(vectorize(doc, vocabulary) for doc in docs)
    return CorpusMatrix(columns=columns, doc_ids=doc_ids), vocabulary


def _resolve_weights(
    ns: argparse.Namespace, vocabulary: Vocabulary, total_docs: int
) -> TermWeights:
    if ns.weights_file is not None:
        if ns.weights is not None:
            raise _UsageError("--weights and --weights-file are mutually exclusive")
        return formats.read_weights(ns.weights_file, vocabulary)
    scheme = "uniform" if ns.weights is None else ns.weights
    if scheme == "idf":
        return idf_weights(vocabulary, total_docs)
    return uniform_weights(len(vocabulary.terms))


def _emit(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommand runners
# ---------------------------------------------------------------------------


def _vocab_for_build(ns: argparse.Namespace) -> Vocabulary:
    if (ns.vocab is None) == (ns.corpus is None):
        raise _UsageError(f"--source {ns.source} requires exactly one of --vocab or --corpus")
    if ns.vocab is not None:
        return formats.read_vocabulary(ns.vocab)
    return build_vocabulary(formats.read_corpus(ns.corpus))


def _cmd_build_matrix(ns: argparse.Namespace) -> int:
    if ns.source == "file":
        if ns.matrix is None:
            raise _UsageError("--source file requires --matrix")
        matrix = formats.read_similarity(ns.matrix)
    elif ns.source == "embedding":
        vocabulary = _vocab_for_build(ns)
        if ns.embeddings is None:
            raise _UsageError("--source embedding requires --embeddings")
        embeddings = formats.read_embeddings(ns.embeddings)
        matrix = build_similarity_embedding(vocabulary, embeddings, ns.threshold)
    else:
        vocabulary = _vocab_for_build(ns)
        matrix = build_similarity_edit(vocabulary, ns.alpha, ns.beta, ns.threshold)
    formats.write_similarity(ns.out, matrix)
    print(f"wrote {ns.out}: n={matrix.n} nnz={matrix.nnz}")
    return 0


def _cmd_sparsify(ns: argparse.Namespace) -> int:
    matrix = formats.read_similarity(ns.matrix)
    vocabulary = formats.read_vocabulary(ns.vocab) if ns.vocab is not None else None
    config = SparsifyConfig(
        max_per_column=ns.max_per_column,
        strategy=ns.strategy,
        column_order=ns.order,
        dominance=ns.dominance,
        threshold=ns.threshold,
    )
    result = sparsify(matrix, vocabulary, config)
    formats.write_similarity(ns.out, result)
    print(f"wrote {ns.out}: n={result.n} nnz={result.nnz} (from {matrix.nnz})")
    return 0


def _cmd_factorize(ns: argparse.Namespace) -> int:
    matrix = formats.read_similarity(ns.matrix)
    factor = cholesky(matrix, ns.permutation, dense_threshold=ns.dense_threshold)
    formats.write_factor(factor, ns.out_factor, ns.out_perm)
    print(f"wrote {ns.out_factor} and {ns.out_perm}: n={factor.n} factor_nnz={factor.factor.nnz}")
    return 0


def _cmd_index(ns: argparse.Namespace) -> int:
    corpus, vocabulary = _load_corpus(ns.corpus)
    matrix = formats.read_similarity(ns.matrix)
    weights = _resolve_weights(ns, vocabulary, len(corpus))
    index = index_corpus(corpus, weights, matrix, vocabulary)
    save_index(index, ns.out)
    print(f"indexed {len(corpus)} documents over {len(vocabulary.terms)} terms -> {ns.out}")
    return 0


def _cmd_query(ns: argparse.Namespace) -> int:
    index = load_index(ns.index)
    matrix = formats.read_similarity(ns.matrix)
    if matrix.content_digest() != index.matrix_digest:
        raise SoftVsmError(
            "similarity matrix does not match this index (digest mismatch); "
            "pass the matrix the index was built with, or rebuild the index"
        )
    weights = _resolve_weights(ns, index.vocabulary, index.doc_count)
    if weights_digest(weights) != index.weights_digest:
        raise SoftVsmError(
            "term weights do not match this index (digest mismatch); "
            "pass the weights the index was built with, or rebuild the index"
        )
    query = vectorize(tokenize(ns.text), index.vocabulary)
    hits = search(index, query, weights, matrix, ns.k)
    lines = ["rank\tdoc_id\tscore\n"]
    lines += [
        f"{rank}\t{doc_id}\t{score:.6f}\n"
        for rank, (doc_id, score) in enumerate(hits, 1)
    ]
    sys.stdout.write("".join(lines))
    return 0


def _cmd_sim(ns: argparse.Namespace) -> int:
    corpus, vocabulary = _load_corpus(ns.corpus)
    matrix = formats.read_similarity(ns.matrix)
    weights = _resolve_weights(ns, vocabulary, len(corpus))
    scores = batch_scm(corpus, corpus, weights, matrix)
    lines = ["\t" + "\t".join(corpus.doc_ids) + "\n"]
    for i, doc_id in enumerate(corpus.doc_ids):
        lines.append(doc_id + "\t" + "\t".join(f"{v:.12g}" for v in scores[i]) + "\n")
    _emit(ns.out, "".join(lines))
    return 0


def _cmd_bench(ns: argparse.Namespace) -> int:
    report = bench_mod.run_bench(
        ns.sizes, iterations=ns.iters, algorithms=ns.algorithms, seed=ns.seed
    )
    text = report.to_tsv() if ns.format == "tsv" else report.to_json_lines()
    _emit(ns.out, text)
    return 0


def _cmd_export_vectors(ns: argparse.Namespace) -> int:
    corpus, vocabulary = _load_corpus(ns.corpus)
    matrix = formats.read_similarity(ns.matrix)
    weights = _resolve_weights(ns, vocabulary, len(corpus))
    transform = doc_for_scm if ns.variant == "dot" else doc_for_cosine
    lines = []
    for doc_id, column in zip(corpus.doc_ids, corpus.columns):
        coords = transform(column, weights, matrix).coords
        lines.append(doc_id + "\t" + "\t".join(f"{v:.12g}" for v in coords) + "\n")
    _emit(ns.out, "".join(lines))
    return 0


_RUNNERS: dict[str, Callable[[argparse.Namespace], int]] = {
    "build-matrix": _cmd_build_matrix,
    "sparsify": _cmd_sparsify,
    "factorize": _cmd_factorize,
    "index": _cmd_index,
    "query": _cmd_query,
    "sim": _cmd_sim,
    "bench": _cmd_bench,
    "export-vectors": _cmd_export_vectors,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point. Returns the process exit code instead of raising."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    opts = _COMMAND_OPTIONS[ns.command]
    try:
        _merge_config(ns, opts)
        _finalize(ns, opts)
        return _RUNNERS[ns.command](ns)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (SoftVsmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
