#!/usr/bin/env python3
"""Benchmark every dual-build kernel: numba @njit vs the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 5] [--json out.json]

Each kernel pair is timed on a representative workload after a warmup call
(which also absorbs JIT compilation).  The active build for normal runs is
chosen by the FERFUSE_NUMBA env flag; this script always times both.
"""

import argparse
import json
import time

import numpy as np

from ferfuse import kernels
from ferfuse.accel import HAVE_NUMBA, USE_NUMBA

RNG = np.random.default_rng(2024)


def _workloads():
    x = RNG.normal(size=(400, 64))
    y = RNG.normal(size=(300, 64))
    yield "pairwise_sq", (x, y), {}

    a = RNG.integers(0, 256, size=(300, 32), dtype=np.uint8)
    b = RNG.integers(0, 256, size=(300, 32), dtype=np.uint8)
    yield "hamming_matrix", (a, b), {}

    m = RNG.normal(size=(80, 80))
    m = 0.5 * (m + m.T)
    yield "jacobi_eig", (m, 1e-10, 100), {}

    n = 300
    indptr = [0]
    indices = []
    weights = []
    for i in range(n):
        nbrs = RNG.choice([j for j in range(n) if j != i], size=8, replace=False)
        indices.extend(int(j) for j in nbrs)
        weights.extend(RNG.uniform(0.5, 2.0, size=8))
        indptr.append(len(indices))
    yield "dijkstra_all", (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(weights, dtype=np.float64),
        n,
    ), {}

    img = np.round(RNG.random((128, 128)) * 8) / 8.0
    yield "fast_response", (img, 20 / 255, 9), {}

    yv = RNG.normal(size=(250, 2))
    p = RNG.random((250, 250))
    p = 0.5 * (p + p.T)
    np.fill_diagonal(p, 0.0)
    p /= p.sum()
    yield "tsne_grad", (yv, p), {}

    n_pts, n_edges = 300, 4000
    emb = RNG.normal(size=(n_pts, 2))
    head = RNG.integers(0, n_pts, size=n_edges).astype(np.int64)
    tail = RNG.integers(0, n_pts, size=n_edges).astype(np.int64)
    edge_ids = np.arange(n_edges, dtype=np.int64)
    neg = RNG.integers(0, 5, size=n_edges)
    offsets = np.zeros(n_edges + 1, dtype=np.int64)
    np.cumsum(neg, out=offsets[1:])
    targets = RNG.integers(0, n_pts, size=int(offsets[-1])).astype(np.int64)
    yield "umap_epoch", (emb, head, tail, edge_ids, targets, offsets, 1.577, 0.895, 0.5), {
        "copy_arg0": True
    }

    xs = RNG.normal(size=(2000, 8))
    ys = RNG.integers(0, 6, size=2000).astype(np.int64)
    yield "best_split", (xs, ys, 6), {}


def _time(fn, args, copy_arg0=False, repeats=5):
    best = np.inf
    for _ in range(repeats):
        call_args = (args[0].copy(), *args[1:]) if copy_arg0 else args
        t0 = time.perf_counter()
        fn(*call_args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write results as JSON")
    args = parser.parse_args()

    print(f"numba available: {HAVE_NUMBA}; active build: {'numba' if USE_NUMBA else 'numpy'}")
    rows = []
    for name, call_args, opts in _workloads():
        nb, np_fallback = kernels.KERNEL_PAIRS[name]
        copy0 = opts.get("copy_arg0", False)
        t_np = _time(np_fallback, call_args, copy0, args.repeats)
        if HAVE_NUMBA:
            _time(nb, call_args, copy0, repeats=1)  # warmup/compile
            t_nb = _time(nb, call_args, copy0, args.repeats)
            speedup = t_np / t_nb if t_nb > 0 else float("inf")
        else:
            t_nb, speedup = float("nan"), float("nan")
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": speedup})

    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for r in rows:
        print(
            f"{r['kernel'].ljust(width)}  {r['numpy_s'] * 1e3:9.2f}ms  "
            f"{r['numba_s'] * 1e3:9.2f}ms  {r['speedup']:7.1f}x"
        )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
        print(f"written: {args.json}")


if __name__ == "__main__":
    main()
