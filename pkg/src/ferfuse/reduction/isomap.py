"""Isometric mapping: geodesic distances + classical MDS.

A disconnected neighbor graph is handled by restricting to the largest
component (recorded in the diagnostics); the out-of-sample transform
covers the dropped rows.
"""

import numpy as np

from ..errors import DisconnectedGraphError
from ..numerics import as_matrix, geodesic_distances, knn_graph, sym_eig
from .base import FittedReducer, ReducerSpec


def classical_mds(dist, d):
    """Embed a distance matrix by double-centering: Y = V sqrt(lambda)."""
    n = dist.shape[0]
    sq = dist**2
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ sq @ j
    eig = sym_eig(b)
    vals = np.maximum(eig.eigenvalues[:d], 0.0)
    return eig.eigenvectors[:, :d] * np.sqrt(vals), eig.eigenvalues


def isomap_fit(x, spec: ReducerSpec) -> FittedReducer:
    m = as_matrix(x, "isomap input")
    kept = np.arange(m.shape[0])
    g = knn_graph(m, spec.graph_k)
    dropped = 0
    try:
        dist = geodesic_distances(g)
    except DisconnectedGraphError as err:
        largest = int(np.argmax(err.component_sizes))
        kept = np.nonzero(err.labels == largest)[0]
        dropped = m.shape[0] - len(kept)
        g = knn_graph(m[kept], min(spec.graph_k, len(kept) - 1))
        dist = geodesic_distances(g)
    y, eigenvalues = classical_mds(dist, spec.dim)
    return FittedReducer(
        spec=spec,
        train_x=m[kept],
        embedding=y,
        state={"geodesic": dist, "kept": kept},
        diagnostics={
            "dropped_rows": dropped,
            "top_eigenvalues": eigenvalues[: spec.dim].tolist(),
        },
    )
