"""Metric MDS by SMACOF stress majorization.

Stress is the root of the summed squared discrepancies between the given
distances and the embedded ones (upper triangle).  Majorization updates
never increase it; iteration stops at a relative decrease below
``smacof_tol`` or the iteration cap.
"""

import numpy as np

from .. import kernels
from ..numerics import as_matrix
from .base import FittedReducer, ReducerSpec
from .isomap import classical_mds
from .pca import pca_fit


def stress_value(dist, y):
    emb = np.sqrt(kernels.pairwise_sq(y, y))
    iu = np.triu_indices(dist.shape[0], k=1)
    return float(np.sqrt(((dist[iu] - emb[iu]) ** 2).sum()))


def _guttman_update(dist, y):
    n = dist.shape[0]
    emb = np.sqrt(kernels.pairwise_sq(y, y))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(emb > 0, dist / emb, 0.0)
    np.fill_diagonal(ratio, 0.0)
    b = -ratio
    np.fill_diagonal(b, ratio.sum(axis=1))
    return b @ y / n


def mds_embed(x, spec: ReducerSpec, input_type: str = "points") -> FittedReducer:
    """Fit from raw points or directly from a distance matrix."""
    m = as_matrix(x, "mds input")
    if input_type == "points":
        dist = np.sqrt(kernels.pairwise_sq(m, m))
        train_x = m
        try:
            init = pca_fit(m, ReducerSpec(method="pca", dim=min(spec.dim, m.shape[1]))).embedding
        except Exception:
            init = None
        if init is not None and init.shape[1] < spec.dim:
            init = np.pad(init, ((0, 0), (0, spec.dim - init.shape[1])))
    elif input_type == "distance":
        if m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        if np.abs(np.diag(m)).max() > 0:
            raise ValueError("distance matrix must have a zero diagonal")
        if np.abs(m - m.T).max() > 1e-9 * max(1.0, float(np.abs(m).max())):
            raise ValueError("distance matrix must be symmetric")
        dist = 0.5 * (m + m.T)
        train_x = dist
        init = None
    else:
        raise ValueError(f"unknown input_type {input_type!r}")
    if init is None:
        # classical solution doubles as the "PCA of the implied
        # configuration" when only distances are available
        init, _ = classical_mds(dist, spec.dim)
    y = init
    trace = [stress_value(dist, y)]
    for _ in range(spec.max_smacof_iter):
        y = _guttman_update(dist, y)
        s = stress_value(dist, y)
        trace.append(s)
        prev = trace[-2]
        if prev > 0 and (prev - s) / prev < spec.smacof_tol:
            break
        if prev == 0.0:
            break
    return FittedReducer(
        spec=spec,
        train_x=train_x,
        embedding=y,
        diagnostics={"stress_final": trace[-1], "stress_trace": trace},
    )
