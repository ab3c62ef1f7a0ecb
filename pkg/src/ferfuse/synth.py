"""Synthetic datasets and evaluation helpers used by tests and sweeps."""

import numpy as np

from . import kernels


def three_gaussian_clusters(n: int = 150, seed: int = 11, dim: int = 10, separation: float = 10.0):
    """Three unit-variance Gaussian blobs with centers ``separation`` apart."""
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(3, dim))
    centers = raw / np.linalg.norm(raw, axis=1, keepdims=True) * separation
    sizes = [n // 3, n // 3, n - 2 * (n // 3)]
    points = np.concatenate(
        [centers[i] + rng.normal(size=(sizes[i], dim)) for i in range(3)]
    )
    labels = np.concatenate([np.full(sizes[i], i, dtype=np.int64) for i in range(3)])
    return points, labels


def swiss_roll(n: int = 400, seed: int = 5, height: float = 10.0):
    """3-D swiss roll; returns (points, unrolled 2-D coordinates).

    The default height keeps the sheet dense enough at n=400 that a
    k=12 neighbor graph stays on-manifold (no cross-sheet shortcuts).
    """
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    h = height * rng.random(n)
    points = np.stack([t * np.cos(t), h, t * np.sin(t)], axis=1)
    unrolled = np.stack([t, h], axis=1)
    return points, unrolled


def signal_in_noise(
    n: int = 400,
    n_classes: int = 8,
    signal_dim: int = 10,
    total_dim: int = 60,
    separation: float = 3.0,
    noise: float = 1.0,
    train_fraction: float = 0.7,
    seed: int = 0,
):
    """Class signal living in a ``signal_dim``-dimensional subspace of a
    ``total_dim``-dimensional noisy space.

    Class means are random points in the signal subspace, rotated into the
    ambient space by a random orthonormal frame; isotropic noise covers
    every ambient dimension.  Returns (x, labels, train_mask).
    """
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(n_classes, signal_dim))
    means = means / np.linalg.norm(means, axis=1, keepdims=True) * separation
    frame, _ = np.linalg.qr(rng.normal(size=(total_dim, signal_dim)))
    labels = np.arange(n, dtype=np.int64) % n_classes
    x = means[labels] @ frame.T + rng.normal(0.0, noise, size=(n, total_dim))
    train_mask = np.zeros(n, dtype=bool)
    order = rng.permutation(n)
    train_mask[order[: int(round(train_fraction * n))]] = True
    return x, labels, train_mask


def knn_purity(embedding, labels):
    """Fraction of points whose nearest other point shares their label."""
    emb = np.ascontiguousarray(embedding, dtype=np.float64)
    d = kernels.pairwise_sq(emb, emb)
    np.fill_diagonal(d, np.inf)
    nn = np.argmin(d, axis=1)
    labels = np.asarray(labels)
    return float((labels[nn] == labels).mean())


def _ranks(values):
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    ranks[order] = np.arange(len(values), dtype=np.float64)
    return ranks


def spearman(a, b):
    """Rank correlation (plain ranks; suited to continuous data)."""
    ra = _ranks(np.asarray(a, dtype=np.float64).ravel())
    rb = _ranks(np.asarray(b, dtype=np.float64).ravel())
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt((ra**2).sum() * (rb**2).sum())
    return float((ra * rb).sum() / denom) if denom > 0 else 0.0
