"""Benchmark harness: single-factorization vs. column-at-a-time elimination.

Times two ways of producing an orthonormal-basis factor E (with E·Eᵀ = S)
from a dense strictly diagonally dominant similarity matrix:

* ``cholesky`` — one dense Cholesky factorization, Θ(n³);
* ``gaussian`` — the quartic baseline that re-eliminates the whole matrix
  for every output column, Θ(n⁴).

Wall-clock seconds are measured with ``time.perf_counter`` over a warmup
run plus ``iterations`` timed runs, with BLAS pinned to one thread so the
scaling trend is not blurred by thread scheduling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .core import SoftVsmError
from .factor import dense_cholesky, orthonormalize_gaussian

__all__ = [
    "BenchRow",
    "BenchReport",
    "random_dominant_dense",
    "run_bench",
    "GAUSSIAN_SIZE_LIMIT",
]

GAUSSIAN_SIZE_LIMIT = 1500
_ALGORITHMS = ("cholesky", "gaussian")


@dataclass(frozen=True)
class BenchRow:
    """One (matrix order, algorithm) measurement."""

    n: int
    algorithm: str
    iterations: int
    mean_seconds: float
    std_seconds: float

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise SoftVsmError(f"unknown algorithm {self.algorithm!r}")
        if self.iterations < 1:
            raise SoftVsmError("iterations must be >= 1")
        if self.mean_seconds < 0 or self.std_seconds < 0:
            raise SoftVsmError("negative timing")


@dataclass(frozen=True)
class BenchReport:
    """All measurements of one run, with derived per-n speedup ratios."""

    rows: tuple[BenchRow, ...]

    def speedups(self) -> dict[int, float]:
        """gaussian mean / cholesky mean for every n measured with both."""
        by_key = {(r.n, r.algorithm): r.mean_seconds for r in self.rows}
        out = {}
        for (n, algorithm), mean in sorted(by_key.items()):
            if algorithm == "gaussian" and (n, "cholesky") in by_key:
                cholesky_mean = by_key[(n, "cholesky")]
                if cholesky_mean > 0:
                    out[n] = mean / cholesky_mean
        return out

    def to_tsv(self) -> str:
        """TSV with a speedup column filled on gaussian rows."""
        speedups = self.speedups()
        lines = ["n\talgorithm\titerations\tmean_seconds\tstd_seconds\tspeedup\n"]
        for r in self.rows:
            ratio = (
                f"{speedups[r.n]:.2f}"
                if r.algorithm == "gaussian" and r.n in speedups
                else ""
            )
            lines.append(
                f"{r.n}\t{r.algorithm}\t{r.iterations}"
                f"\t{r.mean_seconds:.6e}\t{r.std_seconds:.6e}\t{ratio}\n"
            )
        return "".join(lines)

    def to_json_lines(self) -> str:
        import json

        speedups = self.speedups()
        lines = []
        for r in self.rows:
            obj = {
                "n": r.n,
                "algorithm": r.algorithm,
                "iterations": r.iterations,
                "mean_seconds": r.mean_seconds,
                "std_seconds": r.std_seconds,
                "speedup": speedups.get(r.n)
                if r.algorithm == "gaussian"
                else None,
            }
            lines.append(json.dumps(obj, sort_keys=True) + "\n")
        return "".join(lines)


def random_dominant_dense(n: int, rng: np.random.Generator) -> np.ndarray:
    """Dense symmetric matrix, unit diagonal, strictly diagonally dominant:
    uniform off-diagonal entries rescaled so every row's off-diagonal mass
    is at most 0.9."""
    a = rng.uniform(0.0, 1.0, size=(n, n))
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 0.0)
    row_mass = np.abs(a).sum(axis=1)
    limit = row_mass.max()
    if limit > 0:
        a *= 0.9 / limit
    np.fill_diagonal(a, 1.0)
    return a


def _run_once(algorithm: str, matrix: np.ndarray) -> float:
    t0 = time.perf_counter()
    if algorithm == "cholesky":
        dense_cholesky(matrix)
    else:
        orthonormalize_gaussian(matrix)
    return time.perf_counter() - t0


def run_bench(
    sizes,
    iterations: int = 10,
    algorithms=("cholesky", "gaussian"),
    seed: int = 0,
) -> BenchReport:
    """Measure every (n, algorithm) pair on one random dominant matrix per n.

    Raises:
        SoftVsmError: for unknown algorithms, iterations < 1, or a gaussian
            request beyond n = 1500 (the quartic baseline would run for
            hours).
    """
    sizes = [int(n) for n in sizes]
    algorithms = tuple(algorithms)
    for algorithm in algorithms:
        if algorithm not in _ALGORITHMS:
            raise SoftVsmError(f"unknown algorithm {algorithm!r}")
    if iterations < 1:
        raise SoftVsmError("iterations must be >= 1")
    if any(n < 1 for n in sizes):
        raise SoftVsmError("matrix order must be >= 1")
    if "gaussian" in algorithms and any(n > GAUSSIAN_SIZE_LIMIT for n in sizes):
        raise SoftVsmError(
            f"gaussian baseline is limited to n <= {GAUSSIAN_SIZE_LIMIT}"
        )

    rng = np.random.default_rng(seed)
    rows = []
    with threadpool_limits(limits=1):
        for n in sizes:
            matrix = random_dominant_dense(n, rng)
            for algorithm in algorithms:
                _run_once(algorithm, matrix)  # warmup
                times = np.array(
                    [_run_once(algorithm, matrix) for _ in range(iterations)]
                )
                rows.append(
                    BenchRow(
                        n=n,
                        algorithm=algorithm,
                        iterations=iterations,
                        mean_seconds=float(times.mean()),
                        std_seconds=float(times.std()),
                    )
                )
    return BenchReport(rows=tuple(rows))
