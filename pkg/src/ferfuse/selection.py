"""K-means clustering, class centers, and fixed-size descriptor pooling."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyClassError, KTooLargeError


@dataclass(frozen=True)
class Centroids:
    k: int
    vectors: np.ndarray
    inertia: float


def _lex_order(rows):
    """Row order sorted lexicographically, first column most significant."""
    if rows.shape[0] <= 1:
        return np.arange(rows.shape[0])
    keys = tuple(rows[:, c] for c in reversed(range(rows.shape[1])))
    return np.lexsort(keys)


def _plusplus_seed(points, k, rng):
    n = points.shape[0]
    centers = np.empty(k, dtype=np.int64)
    centers[0] = rng.integers(n)
    closest = kernels.pairwise_sq(points, points[centers[0] : centers[0] + 1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining points coincide with a center; pick the first
            # index not already chosen for determinism
            taken = set(centers[:c].tolist())
            pick = next(i for i in range(n) if i not in taken)
            centers[c] = pick
        else:
            r = rng.random() * total
            pos = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            centers[c] = min(pos, n - 1)
        d_new = kernels.pairwise_sq(points, points[centers[c] : centers[c] + 1]).ravel()
        np.minimum(closest, d_new, out=closest)
    return centers


def kmeans_fit(points, k: int, max_iter: int = 100, seed: int = 0) -> Centroids:
    """Lloyd's algorithm with k-means++ seeding.

    Deterministic for a fixed seed.  Empty clusters are reseeded to the
    point farthest from its assigned centroid.  Inertia is checked to be
    non-increasing across iterations.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if k > n:
        raise KTooLargeError(f"k={k} with only {n} points")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = pts[_plusplus_seed(pts, k, rng)].copy()
    prev_assign = None
    prev_inertia = np.inf
    inertia = np.inf
    for _ in range(max_iter):
        d = kernels.pairwise_sq(pts, centroids)
        assign = np.argmin(d, axis=1)
        inertia = float(d[np.arange(n), assign].sum())
        assert inertia <= prev_inertia * (1 + 1e-12) + 1e-12, (
            f"inertia increased: {prev_inertia} -> {inertia}"
        )
        prev_inertia = inertia
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        for c in range(k):
            mask = assign == c
            if mask.any():
                centroids[c] = pts[mask].mean(axis=0)
            else:
                dist_own = d[np.arange(n), assign]
                far = int(np.argmax(dist_own))
                centroids[c] = pts[far]
                assign[far] = c
                d = kernels.pairwise_sq(pts, centroids)
    return Centroids(k=k, vectors=centroids, inertia=inertia)


def class_prototypes(features, labels, n_classes: int | None = None) -> Centroids:
    """Per-class mean feature vectors (one prototype row per class)."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1 if y.size else 0
    protos = np.empty((n_classes, x.shape[1]))
    inertia = 0.0
    for c in range(n_classes):
        mask = y == c
        if not mask.any():
            raise EmptyClassError(c)
        rows = x[mask]
        protos[c] = rows.mean(axis=0)
        inertia += float(((rows - protos[c]) ** 2).sum())
    return Centroids(k=n_classes, vectors=protos, inertia=inertia)


def pool_descriptors(descriptors, k: int, seed: int = 0):
    """Pool a variable-size descriptor set into exactly k rows.

    n >= k: k-means centroids, rows sorted lexicographically so the
    flattened vector is order-stable.  0 < n < k: rows sorted then repeated
    cyclically.  n == 0: zero matrix.
    """
    m = np.ascontiguousarray(descriptors, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("descriptor matrix must be 2-D")
    n, d = m.shape
    if n == 0:
        return np.zeros((k, d))
    if n == k:
        return m[_lex_order(m)].copy()
    if n < k:
        ordered = m[_lex_order(m)]
        return ordered[np.arange(k) % n].copy()
    cents = kmeans_fit(m, k, seed=seed).vectors
    return cents[_lex_order(cents)].copy()
