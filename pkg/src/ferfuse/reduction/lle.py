"""Locally linear embedding.

Per-point reconstruction weights solve the neighborhood Gram system with
a trace-scaled Tikhonov term (1e-3, the usual conditioning fix) under the
sum-to-one constraint; the embedding is read off the bottom eigenvectors
of (I - W)^T (I - W), discarding the constant one.
"""

import numpy as np

from ..numerics import as_matrix, knn_graph, sym_eig
from .base import FittedReducer, ReducerSpec

REGULARIZATION = 1e-3


def reconstruction_weights(x, graph):
    n = x.shape[0]
    w = np.zeros((n, n))
    for i in range(n):
        nbrs = graph.indices[i]
        z = x[nbrs] - x[i]
        gram = z @ z.T
        trace = np.trace(gram)
        gram = gram + REGULARIZATION * (trace if trace > 0 else 1.0) * np.eye(len(nbrs))
        wi = np.linalg.solve(gram, np.ones(len(nbrs)))
        w[i, nbrs] = wi / wi.sum()
    return w


def lle_fit(x, spec: ReducerSpec) -> FittedReducer:
    m = as_matrix(x, "lle input")
    n = m.shape[0]
    k = spec.graph_k
    if k < spec.dim + 1:
        raise ValueError(f"n_neighbors {k} must be >= dim+1 = {spec.dim + 1}")
    graph = knn_graph(m, k)
    w = reconstruction_weights(m, graph)
    iw = np.eye(n) - w
    quad = iw.T @ iw
    eig = sym_eig(quad)
    # eigenvalues are sorted descending: the tail holds the bottom of the
    # spectrum, with the constant eigenvector (eigenvalue ~ 0) last
    cols = [n - 2 - j for j in range(spec.dim)]
    y = eig.eigenvectors[:, cols] * np.sqrt(n)
    return FittedReducer(
        spec=spec,
        train_x=m,
        embedding=y,
        state={"weights": w},
        diagnostics={
            "bottom_eigenvalues": eig.eigenvalues[-(spec.dim + 1) :][::-1].tolist(),
        },
    )
