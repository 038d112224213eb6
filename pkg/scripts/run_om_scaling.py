#!/usr/bin/env python3
"""Inner-product cost vs matrix order: flat when support and column caps are fixed.

Builds banded similarity matrices of growing order n, keeps the query/document
support size m and the per-column cap C fixed, and times the sparse weighted
inner product. The per-operation time stays flat as n grows by orders of
magnitude — the cost depends on m·C, not on n.

Example:
    python3 scripts/run_om_scaling.py --orders 1000,10000,100000 --support 20
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from softvsm import SparseDocVector, TermWeights, inner_product_sparse
from softvsm.core import SimilarityMatrix


def banded(n: int, half_bandwidth: int, rng: np.random.Generator) -> SimilarityMatrix:
    """Symmetric banded similarity matrix built with vectorized COO assembly."""
    from softvsm.core import CscMatrix

    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]
    vals = [np.ones(n)]
    for d in range(1, half_bandwidth + 1):
        v = rng.uniform(0.05, 1.0, size=n - d) * 0.9 / (2 * half_bandwidth)
        upper = np.arange(n - d, dtype=np.int64)
        rows.extend([upper, upper + d])
        cols.extend([upper + d, upper])
        vals.extend([v, v])
    m = CscMatrix.from_coo(n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))
    return SimilarityMatrix.from_csc(m, symmetric=True, nonnegative=True)


def support_vector(rng: np.random.Generator, dim: int, m: int) -> SparseDocVector:
    idx = np.sort(rng.choice(dim, size=m, replace=False)).astype(np.int64)
    return SparseDocVector(indices=idx, values=rng.uniform(0.1, 5.0, size=m), dim=dim)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--orders",
        default="1000,10000,100000",
        help="comma-separated matrix orders n (default: 1000,10000,100000)",
    )
    parser.add_argument("--support", type=int, default=20, help="non-zeros per vector (m)")
    parser.add_argument("--half-bandwidth", type=int, default=4, help="C = 2·hb + 1")
    parser.add_argument("--pairs", type=int, default=50, help="vector pairs per order")
    parser.add_argument("--repeats", type=int, default=30, help="timing repeats (min taken)")
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    rng = np.random.default_rng(args.seed)
    orders = [int(s) for s in args.orders.split(",") if s.strip()]
    print("n\tcolumn_cap\tper_op_microseconds")
    per_op = {}
    for n in orders:
        matrix = banded(n, args.half_bandwidth, rng)
        weights = TermWeights(rng.uniform(0.5, 2.0, n))
        batch = [
            (support_vector(rng, n, args.support), support_vector(rng, n, args.support))
            for _ in range(args.pairs)
        ]
        timings = []
        for _ in range(args.repeats):
            start = time.perf_counter()
            for x, y in batch:
                inner_product_sparse(x, y, weights, matrix)
            timings.append(time.perf_counter() - start)
        per_op[n] = min(timings) / args.pairs
        cap = int(matrix.col_nnz().max())
        print(f"{n}\t{cap}\t{per_op[n] * 1e6:.2f}")
    spread = max(per_op.values()) / min(per_op.values())
    print(f"# max/min per-op spread across orders: {spread:.2f}x (flat if close to 1)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
