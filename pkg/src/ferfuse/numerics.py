"""Deterministic linear-algebra and graph kernels shared by the reducers.

Matrices are plain 2-D float64 ``numpy.ndarray``s throughout the package;
``as_matrix`` is the single validation choke point.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DisconnectedGraphError,
    KTooLargeError,
    NoConvergenceError,
    NonSymmetricError,
)

JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-9


def as_matrix(a, name="matrix"):
    """Coerce to a C-contiguous float64 2-D array with finite entries."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class SymEigResult:
    """Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.

    Column ``i`` of ``eigenvectors`` pairs with ``eigenvalues[i]``; each
    column is unit-norm with its largest-magnitude component positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class NeighborGraph:
    """k nearest neighbors per point: ids and matching metric distances.

    ``indices[i]`` never contains ``i``; ``distances[i]`` is sorted
    ascending.
    """

    k: int
    indices: np.ndarray
    distances: np.ndarray

    @property
    def n_points(self):
        return self.indices.shape[0]


def sym_eig(a) -> SymEigResult:
    """Full eigendecomposition of a symmetric matrix via cyclic Jacobi.

    Raises NonSymmetricError when the asymmetry exceeds the tolerated
    bound and NoConvergenceError past the sweep cap.
    """
    m = as_matrix(a, "sym_eig input")
    n, c = m.shape
    if n != c:
        raise NonSymmetricError(f"matrix is {n}x{c}, not square")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise NonSymmetricError(f"asymmetry {asym:.3e} exceeds tolerance")
    sym = 0.5 * (m + m.T)
    diag, vecs, _, converged = kernels.jacobi_eig(sym, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise NoConvergenceError(f"jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    order = np.argsort(-diag, kind="stable")
    values = diag[order]
    vectors = vecs[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    # deterministic sign: largest-magnitude component of each column positive
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    return SymEigResult(eigenvalues=values, eigenvectors=vectors)


def knn_graph(points, k: int, metric: str = "euclidean") -> NeighborGraph:
    """k nearest others per point; distance ties break to the smaller index."""
    if metric == "euclidean":
        pts = as_matrix(points, "points")
        n = pts.shape[0]
    elif metric == "hamming":
        pts = np.ascontiguousarray(points, dtype=np.uint8)
        if pts.ndim != 2:
            raise ValueError("hamming points must be a 2-D byte matrix")
        n = pts.shape[0]
    else:
        raise ValueError(f"unknown metric {metric!r}")
    if k >= n:
        raise KTooLargeError(f"k={k} with only {n} points")
    if k < 1:
        raise ValueError("k must be >= 1")
    if metric == "euclidean":
        d = kernels.pairwise_sq(pts, pts)
        np.sqrt(d, out=d)
    else:
        d = kernels.hamming_matrix(pts, pts).astype(np.float64)
    np.fill_diagonal(d, np.inf)
    cols = np.arange(n)
    indices = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        order = np.lexsort((cols, d[i]))[:k]
        indices[i] = order
        dists[i] = d[i, order]
    return NeighborGraph(k=k, indices=indices, distances=dists)


def _symmetrized_csr(g: NeighborGraph):
    """Union-symmetrized adjacency as CSR arrays (edge kept if either end
    lists it; duplicate edges keep the smaller weight)."""
    n = g.n_points
    adj = [dict() for _ in range(n)]
    for i in range(n):
        for j_pos in range(g.k):
            j = int(g.indices[i, j_pos])
            w = float(g.distances[i, j_pos])
            if j == i:
                continue
            prev = adj[i].get(j)
            if prev is None or w < prev:
                adj[i][j] = w
            prev = adj[j].get(i)
            if prev is None or w < prev:
                adj[j][i] = w
    indptr = np.zeros(n + 1, dtype=np.int64)
    idx = []
    wts = []
    for i in range(n):
        keys = sorted(adj[i])
        indptr[i + 1] = indptr[i] + len(keys)
        idx.extend(keys)
        wts.extend(adj[i][j] for j in keys)
    return indptr, np.asarray(idx, dtype=np.int64), np.asarray(wts, dtype=np.float64)


def connected_components(indptr, indices, n):
    """Component label per node, by breadth-first sweep."""
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            u = stack.pop()
            for e in range(indptr[u], indptr[u + 1]):
                v = int(indices[e])
                if labels[v] < 0:
                    labels[v] = current
                    stack.append(v)
        current += 1
    return labels, current


def geodesic_distances(g: NeighborGraph):
    """All-pairs shortest paths along the symmetrized neighbor graph.

    Raises DisconnectedGraphError with component sizes when the graph is
    not connected; the caller decides how to restrict.
    """
    n = g.n_points
    indptr, indices, weights = _symmetrized_csr(g)
    labels, n_comp = connected_components(indptr, indices, n)
    if n_comp > 1:
        sizes = np.bincount(labels, minlength=n_comp).tolist()
        raise DisconnectedGraphError(sizes, labels)
    dist = kernels.dijkstra_all(indptr, indices, weights, n)
    return dist
