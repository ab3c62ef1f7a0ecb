"""Unified fit/transform interface shared by the six reducers."""

from dataclasses import dataclass, field, asdict

import numpy as np

from .. import blobio, kernels
from ..errors import DimensionMismatchError
from ..numerics import as_matrix

METHODS = ("pca", "tsne", "umap", "isomap", "mds", "lle")
OUT_OF_SAMPLE_K = 5


@dataclass(frozen=True)
class ReducerSpec:
    """Method choice plus every tunable the reducers read.

    Irrelevant fields are simply ignored by a given method, which keeps
    ablation grids trivial to declare.
    """

    method: str = "pca"
    dim: int = 16
    seed: int = 0
    # tsne
    perplexity: float = 30.0
    learning_rate: float = 200.0
    n_iter: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    # umap
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 200
    negative_samples: int = 5
    # isomap / lle neighbor count
    graph_k: int = 12
    # mds
    max_smacof_iter: int = 300
    smacof_tol: float = 1e-6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass
class FittedReducer:
    """Training inputs + embedding, with per-method extra state."""

    spec: ReducerSpec
    train_x: np.ndarray
    embedding: np.ndarray
    state: dict = field(default_factory=dict)  # name -> ndarray
    diagnostics: dict = field(default_factory=dict)  # json-serializable

    def __post_init__(self):
        y = self.embedding
        if y.ndim != 2 or y.shape[1] != self.spec.dim:
            raise ValueError(f"embedding shape {y.shape} != dim {self.spec.dim}")
        if not np.isfinite(y).all():
            raise ValueError("embedding has non-finite values")


def transform(fit: FittedReducer, x_new):
    """Map new rows into the fitted embedding space.

    PCA projects exactly; the other methods use a barycentric
    out-of-sample extension: the inverse-distance-weighted average of the
    embeddings of the 5 nearest training points.  A row that exactly
    matches a training point gets that point's embedding.
    """
    x = as_matrix(x_new, "transform input")
    if x.shape[1] != fit.train_x.shape[1]:
        raise DimensionMismatchError(
            f"expected {fit.train_x.shape[1]} columns, got {x.shape[1]}"
        )
    if fit.spec.method == "pca":
        return (x - fit.state["mean"]) @ fit.state["components"]
    n_train = fit.train_x.shape[0]
    k = min(OUT_OF_SAMPLE_K, n_train)
    d = kernels.pairwise_sq(x, fit.train_x)
    out = np.empty((x.shape[0], fit.spec.dim))
    cols = np.arange(n_train)
    for i in range(x.shape[0]):
        row = d[i]
        nearest = np.lexsort((cols, row))[:k]
        nd = row[nearest]
        if nd[0] == 0.0:
            out[i] = fit.embedding[nearest[0]]
            continue
        w = 1.0 / np.sqrt(nd)
        w /= w.sum()
        out[i] = w @ fit.embedding[nearest]
    return out


def save_reducer(fit: FittedReducer, path):
    arrays = {"train_x": fit.train_x, "embedding": fit.embedding}
    for name, arr in fit.state.items():
        arrays[f"state:{name}"] = arr
    meta = {"spec": asdict(fit.spec), "diagnostics": fit.diagnostics}
    blobio.write_blob(path, f"reducer:{fit.spec.method}", arrays, meta)


def load_reducer(path) -> FittedReducer:
    kind, arrays, meta = blobio.read_blob(path)
    if not kind.startswith("reducer:"):
        raise ValueError(f"{path}: blob kind {kind!r} is not a reducer")
    spec = ReducerSpec(**meta["spec"])
    state = {
        name.split(":", 1)[1]: arr
        for name, arr in arrays.items()
        if name.startswith("state:")
    }
    return FittedReducer(
        spec=spec,
        train_x=arrays["train_x"],
        embedding=arrays["embedding"],
        state=state,
        diagnostics=meta.get("diagnostics", {}),
    )
