"""FER-style CSV ingestion: 48x48 grayscale faces, 8 emotion labels.

CSV rows are ``label,pixel string,usage``: the pixel string holds H*W
space-separated integers in 0..255, usage ``Training`` maps to the train
split and anything else to test.  Pixels are scaled to [0, 1].
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LabelOutOfRangeError, MalformedRowError, ZeroStdError

HEIGHT = 48
WIDTH = 48
N_CLASSES = 8
CLASS_NAMES = (
    "angry",
    "contempt",
    "disgust",
    "fear",
    "happy",
    "sad",
    "surprise",
    "neutral",
)


@dataclass
class LabeledDataset:
    """Images (N, H, W) in [0, 1], integer labels, per-row split tag."""

    images: np.ndarray
    labels: np.ndarray
    split: np.ndarray  # array of "train" / "test" strings

    def __post_init__(self):
        n = len(self.images)
        if not (len(self.labels) == len(self.split) == n):
            raise ValueError("images/labels/split lengths differ")

    def __len__(self):
        return len(self.images)

    @property
    def train_mask(self):
        return self.split == "train"

    @property
    def test_mask(self):
        return self.split == "test"

    def class_histogram(self):
        return np.bincount(self.labels, minlength=N_CLASSES)


def load_fer_csv(path, height: int = HEIGHT, width: int = WIDTH) -> LabeledDataset:
    """Load a FER CSV file.  A leading header row is skipped if present."""
    path = Path(path)
    n_px = height * width
    images = []
    labels = []
    split = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if line_no == 1 and not row[0].strip().lstrip("-").isdigit():
                continue  # header
            if len(row) < 3:
                raise MalformedRowError(line_no, f"expected 3 columns, got {len(row)}")
            try:
                label = int(row[0])
            except ValueError:
                raise MalformedRowError(line_no, f"bad label {row[0]!r}") from None
            if not 0 <= label < N_CLASSES:
                raise LabelOutOfRangeError(f"line {line_no}: label {label} not in 0..{N_CLASSES - 1}")
            px = row[1].split()
            if len(px) != n_px:
                raise MalformedRowError(line_no, f"expected {n_px} pixels, got {len(px)}")
            try:
                values = np.array(px, dtype=np.float64)
            except ValueError:
                raise MalformedRowError(line_no, "non-integer pixel value") from None
            if values.min() < 0 or values.max() > 255:
                raise MalformedRowError(line_no, "pixel value outside 0..255")
            images.append((values / 255.0).reshape(height, width))
            labels.append(label)
            split.append("train" if row[2].strip() == "Training" else "test")
    return LabeledDataset(
        images=np.array(images) if images else np.empty((0, height, width)),
        labels=np.array(labels, dtype=np.int64),
        split=np.array(split, dtype=object) if split else np.empty(0, dtype=object),
    )


def save_fer_csv(ds: LabeledDataset, path, header: bool = True):
    """Write a dataset back out; load_fer_csv round-trips it exactly."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["emotion", "pixels", "Usage"])
        for img, label, tag in zip(ds.images, ds.labels, ds.split):
            ints = np.rint(img * 255.0).astype(np.int64).ravel()
            usage = "Training" if tag == "train" else "PublicTest"
            writer.writerow([int(label), " ".join(str(v) for v in ints), usage])


def normalize(img, mean: float, std: float):
    """Elementwise (img - mean) / std."""
    if std <= 0:
        raise ZeroStdError(f"std must be positive, got {std}")
    return (np.asarray(img, dtype=np.float64) - mean) / std


def train_stats(ds: LabeledDataset):
    """Dataset-wide mean/std over the train split pixels (test split used
    as fallback when no train rows exist)."""
    mask = ds.train_mask
    if not mask.any():
        mask = np.ones(len(ds), dtype=bool)
    px = ds.images[mask]
    mean = float(px.mean())
    std = float(px.std())
    if std == 0.0:
        std = 1.0
    return mean, std
