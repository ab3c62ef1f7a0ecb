"""Six dimensionality reducers behind one fit/transform interface."""

from .base import (
    METHODS,
    FittedReducer,
    ReducerSpec,
    load_reducer,
    save_reducer,
    transform,
)
from .isomap import isomap_fit
from .lle import lle_fit
from .mds import mds_embed
from .pca import pca_fit, pca_inverse
from .tsne import tsne_fit
from .umap import umap_fit

_FITTERS = {
    "pca": pca_fit,
    "tsne": tsne_fit,
    "umap": umap_fit,
    "isomap": isomap_fit,
    "mds": mds_embed,
    "lle": lle_fit,
}


def fit_reducer(x, spec: ReducerSpec) -> FittedReducer:
    """Dispatch to the reducer named by ``spec.method``."""
    return _FITTERS[spec.method](x, spec)


__all__ = [
    "METHODS",
    "FittedReducer",
    "ReducerSpec",
    "fit_reducer",
    "isomap_fit",
    "lle_fit",
    "load_reducer",
    "mds_embed",
    "pca_fit",
    "pca_inverse",
    "save_reducer",
    "transform",
    "tsne_fit",
    "umap_fit",
]
