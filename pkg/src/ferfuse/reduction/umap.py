"""Uniform manifold approximation: fuzzy neighbor graph + sampled descent.

The graph stage binary-searches a per-point bandwidth so the smoothed
neighbor weights sum to log2(n_neighbors), symmetrizes with the fuzzy
union a + b - a*b, and the layout stage runs negative-sampling
stochastic descent against the low-dimensional kernel
1 / (1 + a * dist^(2b)) whose (a, b) are least-squares fit from min_dist
once per run.  All sampling is planned with a seeded generator outside
the hot kernel, so runs are reproducible on either kernel build.
"""

import numpy as np

from .. import kernels
from ..numerics import as_matrix, knn_graph
from .base import FittedReducer, ReducerSpec
from .tsne import _pca_init

SMOOTH_ITERS = 64
SMOOTH_TARGET_TOL = 1e-5


def smooth_knn_weights(distances, n_neighbors):
    """Per-point (rho, sigma): rho is the nearest-other distance and sigma
    solves sum_j exp(-max(0, d_ij - rho) / sigma) = log2(n_neighbors)."""
    n = distances.shape[0]
    target = np.log2(n_neighbors)
    rho = distances[:, 0].copy()
    sigma = np.empty(n)
    for i in range(n):
        lo, hi = 0.0, np.inf
        mid = 1.0
        d = distances[i] - rho[i]
        d = np.maximum(d, 0.0)
        for _ in range(SMOOTH_ITERS):
            s = float(np.exp(-d / mid).sum())
            if abs(s - target) < SMOOTH_TARGET_TOL:
                break
            if s > target:
                hi = mid
                mid = 0.5 * (lo + hi)
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else 0.5 * (lo + hi)
        sigma[i] = mid
    return rho, sigma


def fuzzy_graph(g, rho, sigma):
    """Symmetric membership matrix entries as (head, tail, weight) COO;
    both edge directions are listed, matching the sampling schedule."""
    n = g.n_points
    strengths = {}
    for i in range(n):
        si = sigma[i] if sigma[i] > 0 else 1e-12
        for pos in range(g.k):
            j = int(g.indices[i, pos])
            d = max(g.distances[i, pos] - rho[i], 0.0)
            strengths[(i, j)] = float(np.exp(-d / si))
    merged = {}
    for (i, j), a in strengths.items():
        if (j, i) in merged or (i, j) in merged:
            continue
        b = strengths.get((j, i), 0.0)
        w = a + b - a * b
        if w > 0:
            merged[(i, j)] = w
    heads = []
    tails = []
    weights = []
    for (i, j), w in sorted(merged.items()):
        heads.extend((i, j))
        tails.extend((j, i))
        weights.extend((w, w))
    return (
        np.asarray(heads, dtype=np.int64),
        np.asarray(tails, dtype=np.int64),
        np.asarray(weights, dtype=np.float64),
    )


def fit_ab(min_dist, spread=1.0):
    """Least-squares (a, b) for 1/(1 + a x^(2b)) against the target decay
    curve; deterministic nested grid refinement."""
    xs = np.linspace(0.0, 3.0 * spread, 300)
    target = np.where(xs <= min_dist, 1.0, np.exp(-(xs - min_dist) / spread))

    def sse(a, b):
        q = 1.0 / (1.0 + a * xs ** (2.0 * b))
        return float(((q - target) ** 2).sum())

    a_lo, a_hi = 0.2, 10.0
    b_lo, b_hi = 0.3, 3.0
    best = (1.0, 1.0)
    for _ in range(6):
        a_grid = np.linspace(a_lo, a_hi, 25)
        b_grid = np.linspace(b_lo, b_hi, 25)
        errs = [(sse(a, b), a, b) for a in a_grid for b in b_grid]
        _, a_best, b_best = min(errs)
        best = (a_best, b_best)
        a_step = (a_hi - a_lo) / 24
        b_step = (b_hi - b_lo) / 24
        a_lo, a_hi = max(1e-3, a_best - a_step), a_best + a_step
        b_lo, b_hi = max(1e-3, b_best - b_step), b_best + b_step
    return best


def umap_fit(x, spec: ReducerSpec) -> FittedReducer:
    m = as_matrix(x, "umap input")
    n = m.shape[0]
    if spec.n_neighbors >= n:
        raise ValueError(f"n_neighbors {spec.n_neighbors} needs more than {spec.n_neighbors} points")
    g = knn_graph(m, spec.n_neighbors)
    rho, sigma = smooth_knn_weights(g.distances, spec.n_neighbors)
    head, tail, weights = fuzzy_graph(g, rho, sigma)
    a, b = fit_ab(spec.min_dist)
    y = np.ascontiguousarray(_pca_init(m, spec))

    eps = weights.max() / weights  # epochs between samples, per edge
    eps_neg = eps / spec.negative_samples
    next_sample = eps.copy()
    next_neg = eps_neg.copy()
    rng = np.random.default_rng(spec.seed)
    n_edges = len(head)
    for epoch in range(1, spec.n_epochs + 1):
        alpha = 1.0 - (epoch - 1) / spec.n_epochs
        due = np.nonzero(next_sample <= epoch)[0].astype(np.int64)
        if len(due) == 0:
            continue
        neg_counts = ((epoch - next_neg[due]) / eps_neg[due]).astype(np.int64)
        np.maximum(neg_counts, 0, out=neg_counts)
        offsets = np.zeros(len(due) + 1, dtype=np.int64)
        np.cumsum(neg_counts, out=offsets[1:])
        targets = rng.integers(0, n, size=int(offsets[-1]), dtype=np.int64)
        y = kernels.umap_epoch(y, head, tail, due, targets, offsets, a, b, alpha)
        next_sample[due] += eps[due]
        next_neg[due] += neg_counts * eps_neg[due]
    diagnostics = {
        "curve_a": float(a),
        "curve_b": float(b),
        "n_edges": int(n_edges),
        "cross_entropy_final": _cross_entropy(y, head, tail, weights, a, b),
    }
    return FittedReducer(spec=spec, train_x=m, embedding=y, diagnostics=diagnostics)


def _cross_entropy(y, head, tail, weights, a, b, eps=1e-12):
    """Edge-wise fuzzy cross-entropy of the final layout (diagnostic)."""
    diffs = y[head] - y[tail]
    sq = np.einsum("ij,ij->i", diffs, diffs)
    q = 1.0 / (1.0 + a * sq**b)
    q = np.clip(q, eps, 1.0 - eps)
    w = np.clip(weights, eps, 1.0 - eps)
    ce = w * np.log(w / q) + (1.0 - w) * np.log((1.0 - w) / (1.0 - q))
    return float(ce.sum())
