"""Principal component analysis on top of the Jacobi eigensolver.

When there are fewer rows than columns the eigenproblem is solved on the
N x N Gram matrix instead of the D x D covariance; the recovered
components are identical up to round-off and the sweep stays tractable
for wide fused feature matrices.
"""

import numpy as np

from ..errors import DegenerateInputError
from ..numerics import as_matrix, sym_eig
from .base import FittedReducer, ReducerSpec


def _fix_signs(components):
    lead = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[lead, np.arange(components.shape[1])])
    signs[signs == 0] = 1.0
    return components * signs


def pca_fit(x, spec: ReducerSpec) -> FittedReducer:
    m = as_matrix(x, "pca input")
    n, dim_in = m.shape
    d = spec.dim
    if n < 2:
        raise ValueError("pca needs at least 2 rows")
    if d > dim_in:
        raise ValueError(f"dim {d} exceeds input dimension {dim_in}")
    if np.all(m == m[0]):
        raise DegenerateInputError("all rows identical")
    mean = m.mean(axis=0)
    centered = m - mean
    total_var = float((centered**2).sum()) / (n - 1)
    if dim_in <= n:
        cov = centered.T @ centered / (n - 1)
        eig = sym_eig(cov)
        components = eig.eigenvectors[:, :d]
        eigenvalues = eig.eigenvalues
    else:
        gram = centered @ centered.T / (n - 1)
        eig = sym_eig(gram)
        rank_vals = eig.eigenvalues
        if d > n - 1 or rank_vals[d - 1] <= 1e-12 * max(rank_vals[0], 1e-300):
            raise ValueError(
                f"dim {d} exceeds the rank available from {n} samples"
            )
        components = centered.T @ eig.eigenvectors[:, :d]
        components /= np.sqrt(rank_vals[:d] * (n - 1))
        eigenvalues = rank_vals
    components = _fix_signs(components)
    embedding = centered @ components
    top = eigenvalues[:d]
    diagnostics = {
        "eigenvalues": top.tolist(),
        "explained_variance_ratio": (top / total_var).tolist() if total_var > 0 else [0.0] * d,
    }
    return FittedReducer(
        spec=spec,
        train_x=m,
        embedding=embedding,
        state={"mean": mean, "components": components, "eigenvalues": top},
        diagnostics=diagnostics,
    )


def pca_inverse(fit: FittedReducer, y):
    """Back-project embedded rows to the input space."""
    return np.asarray(y) @ fit.state["components"].T + fit.state["mean"]
