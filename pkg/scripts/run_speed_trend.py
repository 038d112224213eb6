#!/usr/bin/env python3
"""Factorization speed trend: single Cholesky vs the quartic baseline.

Times both kernels across a size sweep, prints the raw report, then a
trend summary: per-algorithm fitted scaling exponent (log-log least
squares) and the speedup at each size. On a quiet machine the fitted
exponents land near 3 (cholesky) and 4 (gaussian), and the speedup grows
roughly linearly in n.

Example:
    python3 scripts/run_speed_trend.py --sizes 100,200,300,400,500,1000 --iters 10
"""

from __future__ import annotations

import argparse

import numpy as np

from softvsm.bench import run_bench


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes",
        default="100,200,300,400,500,1000",
        help="comma-separated matrix dimensions (default: 100,200,300,400,500,1000)",
    )
    parser.add_argument("--iters", type=int, default=10, help="timed iterations per point")
    parser.add_argument("--seed", type=int, default=0, help="matrix-generation seed")
    parser.add_argument(
        "--algorithms",
        default="cholesky,gaussian",
        help="comma-separated subset of cholesky,gaussian",
    )
    return parser.parse_args()


def fitted_exponent(sizes: list[int], times: list[float]) -> float:
    slope, _ = np.polyfit(np.log(sizes), np.log(times), 1)
    return float(slope)


def main() -> int:
    args = parse_args()
    sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    report = run_bench(sizes, iterations=args.iters, algorithms=algorithms, seed=args.seed)
    print(report.to_tsv(), end="")

    print("\n# trend summary")
    for algorithm in algorithms:
        rows = [r for r in report.rows if r.algorithm == algorithm]
        if len(rows) >= 2:
            exponent = fitted_exponent([r.n for r in rows], [r.mean_seconds for r in rows])
            print(f"# {algorithm}: fitted time ~ n^{exponent:.2f} over n={sizes}")
    speedups = report.speedups()
    if speedups:
        pairs = ", ".join(f"n={n}: {ratio:.0f}x" for n, ratio in sorted(speedups.items()))
        print(f"# cholesky speedup over the baseline: {pairs}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
