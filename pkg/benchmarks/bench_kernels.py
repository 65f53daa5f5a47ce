#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernel backends.

Times run_walk over a random CSR graph and lcs_length over random token
arrays, then verifies both backends produced bit-identical outputs.

    python3 benchmarks/bench_kernels.py [--nodes 400] [--walks 20000] [--seed 0]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from memscrub.kernels import backends


def build_random_csr(n_nodes: int, out_degree: int, seed: int):
    rng = random.Random(seed)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    indices = []
    weights = []
    for u in range(n_nodes):
        dsts = rng.sample(range(n_nodes), out_degree)
        for dst in sorted(dsts):
            indices.append(dst)
            weights.append(rng.uniform(0.05, 1.0))
        indptr[u + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(weights, dtype=np.float64)


def bench_walks(impl, indptr, indices, weights, n_nodes, walks, max_len):
    visits = np.zeros(n_nodes, dtype=np.int64)
    state = 1
    paths = []
    started = time.perf_counter()
    for i in range(walks):
        path, state = impl.run_walk(
            indptr, indices, weights, visits, i % n_nodes, max_len, 1.0, -1, True, state
        )
        paths.append(tuple(path))
    elapsed = time.perf_counter() - started
    return elapsed, (tuple(paths), visits.tolist(), state)


def bench_lcs(impl, pairs):
    total = 0
    started = time.perf_counter()
    for a, b in pairs:
        total += impl.lcs_length(a, b)
    elapsed = time.perf_counter() - started
    return elapsed, total


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=400)
    parser.add_argument("--degree", type=int, default=8)
    parser.add_argument("--walks", type=int, default=20000)
    parser.add_argument("--max-len", type=int, default=5)
    parser.add_argument("--lcs-pairs", type=int, default=200)
    parser.add_argument("--lcs-len", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    impls = backends()
    if len(impls) < 2:
        print("note: only the pure backend is available; timing it alone")

    indptr, indices, weights = build_random_csr(args.nodes, args.degree, args.seed)
    rng = np.random.default_rng(args.seed)
    pairs = [
        (
            rng.integers(0, 50, size=args.lcs_len).astype(np.int64),
            rng.integers(0, 50, size=args.lcs_len).astype(np.int64),
        )
        for _ in range(args.lcs_pairs)
    ]

    walk_results = {}
    lcs_results = {}
    print(f"{'backend':<8} {'walks/s':>12} {'lcs pairs/s':>12}")
    for name, impl in sorted(impls.items()):
        walk_time, walk_out = bench_walks(
            impl, indptr, indices, weights, args.nodes, args.walks, args.max_len
        )
        lcs_time, lcs_total = bench_lcs(impl, pairs)
        walk_results[name] = walk_out
        lcs_results[name] = lcs_total
        print(f"{name:<8} {args.walks / walk_time:>12.0f} {args.lcs_pairs / lcs_time:>12.1f}")

    if len(impls) == 2:
        assert walk_results["pure"] == walk_results["native"], "walk outputs diverged"
        assert lcs_results["pure"] == lcs_results["native"], "lcs outputs diverged"
        print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
