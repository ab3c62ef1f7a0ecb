"""Random forest: bagged gini-split decision trees with feature subsampling.

Trees are flat arrays (feature/threshold/children per node plus a class
histogram) so models serialize to bit-stable blobs; all randomness flows
from one seed through spawned per-tree substreams.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .. import blobio, kernels
from ..errors import DimensionMismatchError, SingleClassError


@dataclass
class DecisionTree:
    feature: np.ndarray  # (n_nodes,) split feature, -1 at leaves
    threshold: np.ndarray  # (n_nodes,)
    left: np.ndarray  # child node ids, -1 at leaves
    right: np.ndarray
    histogram: np.ndarray  # (n_nodes, n_classes) class counts at the node

    @property
    def n_nodes(self):
        return len(self.feature)

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.empty(x.shape[0], dtype=np.int64)
        for i in range(x.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if x[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = int(np.argmax(self.histogram[node]))
        return out


@dataclass
class ForestModel:
    trees: list
    n_trees: int
    seed: int
    m_try: int
    n_features: int
    n_classes: int
    max_depth: int | None = None
    oob_info: dict = field(default_factory=dict)


def _grow_tree(x, y, n_classes, max_depth, m_try, rng):
    n_features = x.shape[1]
    feature = []
    threshold = []
    left = []
    right = []
    histogram = []
    stack = [(np.arange(x.shape[0]), 0, -1, False)]
    # nodes are appended in DFS order; parent links patched as we go
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if is_right:
                right[parent] = node_id
            else:
                left[parent] = node_id
        counts = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        histogram.append(counts)
        pure = counts.max() == len(idx)
        depth_capped = max_depth is not None and depth >= max_depth
        if pure or depth_capped or len(idx) < 2:
            continue
        feats = rng.choice(n_features, size=min(m_try, n_features), replace=False)
        sub = np.ascontiguousarray(x[np.ix_(idx, feats)])
        f_pos, thr, _, found = kernels.best_split(sub, y[idx], n_classes)
        if not found:
            continue
        f_global = int(feats[f_pos])
        mask = x[idx, f_global] <= thr
        feature[node_id] = f_global
        threshold[node_id] = float(thr)
        # push right first so the left child is visited (and numbered) first
        stack.append((idx[~mask], depth + 1, node_id, True))
        stack.append((idx[mask], depth + 1, node_id, False))
    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        histogram=np.asarray(histogram, dtype=np.int64),
    )


def rf_train(
    x,
    y,
    n_trees: int = 100,
    max_depth: int | None = 16,
    m_try: int | None = None,
    seed: int = 0,
) -> ForestModel:
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if len(np.unique(y)) < 2:
        raise SingleClassError("training labels contain a single class")
    n, d = x.shape
    n_classes = int(y.max()) + 1
    if m_try is None:
        m_try = math.ceil(math.sqrt(d))
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(streams[t])
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(x[boot], y[boot], n_classes, max_depth, m_try, rng))
    return ForestModel(
        trees=trees,
        n_trees=n_trees,
        seed=seed,
        m_try=m_try,
        n_features=d,
        n_classes=n_classes,
        max_depth=max_depth,
    )


def rf_predict(model: ForestModel, x):
    """Majority vote over trees; ties go to the smaller class index."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"expected {model.n_features} features, got {x.shape[1]}"
        )
    votes = np.zeros((x.shape[0], model.n_classes), dtype=np.int64)
    for tree in model.trees:
        pred = tree.predict(x)
        votes[np.arange(x.shape[0]), pred] += 1
    return np.argmax(votes, axis=1)


def save_forest(model: ForestModel, path):
    arrays = {}
    offsets = [0]
    for part in ("feature", "threshold", "left", "right"):
        arrays[part] = np.concatenate([getattr(t, part) for t in model.trees])
    arrays["histogram"] = np.concatenate([t.histogram for t in model.trees])
    for t in model.trees:
        offsets.append(offsets[-1] + t.n_nodes)
    arrays["offsets"] = np.asarray(offsets, dtype=np.int64)
    meta = {
        "n_trees": model.n_trees,
        "seed": model.seed,
        "m_try": model.m_try,
        "n_features": model.n_features,
        "n_classes": model.n_classes,
        "max_depth": model.max_depth,
    }
    blobio.write_blob(path, "forest", arrays, meta)


def load_forest(path) -> ForestModel:
    kind, arrays, meta = blobio.read_blob(path)
    if kind != "forest":
        raise ValueError(f"{path}: blob kind {kind!r} is not a forest")
    offsets = arrays["offsets"]
    trees = []
    for t in range(meta["n_trees"]):
        lo, hi = offsets[t], offsets[t + 1]
        trees.append(
            DecisionTree(
                feature=arrays["feature"][lo:hi],
                threshold=arrays["threshold"][lo:hi],
                left=arrays["left"][lo:hi],
                right=arrays["right"][lo:hi],
                histogram=arrays["histogram"][lo:hi],
            )
        )
    return ForestModel(trees=trees, **meta)
