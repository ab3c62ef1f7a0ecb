"""Confusion matrices, accuracy, and per-class statistics."""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMatrixError, LabelOutOfRangeError, LengthMismatchError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (C, C) ints, rows true, cols predicted

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def n_classes(self):
        return self.counts.shape[0]


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise LengthMismatchError(f"{t.shape} vs {p.shape}")
    if t.size and (t.min() < 0 or t.max() >= n_classes or p.min() < 0 or p.max() >= n_classes):
        raise LabelOutOfRangeError(f"labels must lie in 0..{n_classes - 1}")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts=counts)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrixError("confusion matrix is empty")
    return float(np.trace(cm.counts)) / cm.total


def per_class_stats(cm: ConfusionMatrix):
    """precision/recall/support per class (0 where undefined)."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    pred_tot = counts.sum(axis=0)
    true_tot = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        recall = np.where(true_tot > 0, tp / true_tot, 0.0)
    return [
        {
            "class": int(c),
            "precision": float(precision[c]),
            "recall": float(recall[c]),
            "support": int(true_tot[c]),
        }
        for c in range(cm.n_classes)
    ]


def confusion_csv(cm: ConfusionMatrix) -> str:
    lines = [",".join(["true\\pred"] + [str(c) for c in range(cm.n_classes)])]
    for r in range(cm.n_classes):
        lines.append(",".join([str(r)] + [str(int(v)) for v in cm.counts[r]]))
    return "\n".join(lines) + "\n"
