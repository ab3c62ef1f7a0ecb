"""k-nearest-neighbor voting with fully deterministic tie rules."""

import numpy as np

from .. import kernels
from ..errors import KTooLargeError


def knn_predict(train_x, train_y, query, k: int = 5):
    """Euclidean majority vote.  Distance ties break to the smaller train
    index, vote ties to the smaller class index."""
    tx = np.ascontiguousarray(train_x, dtype=np.float64)
    ty = np.asarray(train_y, dtype=np.int64)
    q = np.ascontiguousarray(query, dtype=np.float64)
    n = tx.shape[0]
    if k > n:
        raise KTooLargeError(f"k={k} with {n} training points")
    d = kernels.pairwise_sq(q, tx)
    cols = np.arange(n)
    n_classes = int(ty.max()) + 1
    out = np.empty(q.shape[0], dtype=np.int64)
    for i in range(q.shape[0]):
        nearest = np.lexsort((cols, d[i]))[:k]
        votes = np.bincount(ty[nearest], minlength=n_classes)
        out[i] = int(np.argmax(votes))
    return out
