"""Deterministic fixture generation for the bundled desk-scale dataset.

Each class pairs a global shading ramp (4 patterns, class % 4) with a
class-specific local glyph stamped twice (bright and dark copies) in the
image interior, so global context and local structure carry complementary
evidence.  The bundled "deep" features are a fixed random two-layer
projection of a blurred copy of the image plus seeded feature noise: a
deliberately imperfect global-context stand-in with deep-feature shape
and determinism, so the pipeline and its ablations run without the
exporter component.
"""

from pathlib import Path

import numpy as np

from .dataset import HEIGHT, N_CLASSES, WIDTH, LabeledDataset, save_fer_csv
from .fusion import save_deep_features
from .orb import generate_pattern, pattern_to_text
from .sift import gaussian_blur

TINY_SEED = 1
TINY_PER_CLASS = 25
PIXEL_NOISE = 0.005
JITTER = 1
SURROGATE_SEED = 77
SURROGATE_HIDDEN = 128
SURROGATE_DIM = 64
SURROGATE_BLUR = 3.0
SURROGATE_NOISE = 0.5


def _shading(pattern: int, h: int, w: int):
    ys, xs = np.mgrid[0:h, 0:w]
    ramp_y = ys / (h - 1)
    ramp_x = xs / (w - 1)
    if pattern == 0:
        return ramp_y
    if pattern == 1:
        return 1.0 - ramp_y
    if pattern == 2:
        return ramp_x
    return 1.0 - ramp_x


def class_glyph(kind: int):
    """9x9 binary glyph, one distinct local structure per class."""
    g = np.zeros((9, 9))
    c = 4
    ys, xs = np.mgrid[0:9, 0:9]
    if kind == 0:  # disc
        g[(ys - c) ** 2 + (xs - c) ** 2 <= 9] = 1
    elif kind == 1:  # square
        g[1:8, 1:8] = 1
    elif kind == 2:  # horizontal bar
        g[3:6, :] = 1
    elif kind == 3:  # vertical bar
        g[:, 3:6] = 1
    elif kind == 4:  # plus
        g[3:6, :] = 1
        g[:, 3:6] = 1
    elif kind == 5:  # X
        for i in range(9):
            g[i, max(0, i - 1) : min(9, i + 2)] = 1
            g[i, max(0, 7 - i) : min(9, 10 - i)] = 1
    elif kind == 6:  # ring
        r2 = (ys - c) ** 2 + (xs - c) ** 2
        g[(r2 <= 16) & (r2 >= 6)] = 1
    elif kind == 7:  # L corner
        g[1:8, 1:4] = 1
        g[5:8, 1:8] = 1
    else:
        raise ValueError(f"no glyph for class {kind}")
    return g


def _stamp(img, cy, cx, g, bright: bool):
    h, w = g.shape
    y0, x0 = cy - h // 2, cx - w // 2
    region = img[y0 : y0 + h, x0 : x0 + w]
    img[y0 : y0 + h, x0 : x0 + w] = np.where(g > 0, 1.0 if bright else 0.0, region)


def make_tiny_dataset(seed: int = TINY_SEED, per_class: int = TINY_PER_CLASS) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    images = []
    labels = []
    split = []
    n_train = int(round(per_class * 0.7))
    for cls in range(N_CLASSES):
        g = class_glyph(cls)
        for i in range(per_class):
            img = 0.2 + 0.45 * _shading(cls % 4, HEIGHT, WIDTH)
            jy, jx = rng.integers(-JITTER, JITTER + 1, size=2)
            jy2, jx2 = rng.integers(-JITTER, JITTER + 1, size=2)
            _stamp(img, 20 + jy, 20 + jx, g, bright=True)
            _stamp(img, 27 + jy2, 27 + jx2, g, bright=False)
            img = img + rng.normal(0.0, PIXEL_NOISE, size=img.shape)
            img = np.clip(np.rint(img * 255.0), 0, 255) / 255.0
            images.append(img)
            labels.append(cls)
            split.append("train" if i < n_train else "test")
    return LabeledDataset(
        images=np.array(images),
        labels=np.array(labels, dtype=np.int64),
        split=np.array(split, dtype=object),
    )


def surrogate_deep_features(images, seed: int = SURROGATE_SEED, dim: int = SURROGATE_DIM):
    """Fixed random projection of a blurred image copy, plus seeded noise.

    The blur biases the features toward global context, the noise keeps
    them honestly imperfect; both are deterministic.
    """
    rng = np.random.default_rng(seed)
    blurred = np.array([gaussian_blur(im, SURROGATE_BLUR) for im in images])
    n_px = blurred.shape[1] * blurred.shape[2]
    w1 = rng.normal(0.0, 1.0 / np.sqrt(n_px), size=(n_px, SURROGATE_HIDDEN))
    b1 = rng.normal(0.0, 0.1, size=SURROGATE_HIDDEN)
    w2 = rng.normal(0.0, 1.0 / np.sqrt(SURROGATE_HIDDEN), size=(SURROGATE_HIDDEN, dim))
    hidden = np.maximum(blurred.reshape(len(images), -1) @ w1 + b1, 0.0)
    feats = hidden @ w2
    feats = feats + rng.normal(0.0, SURROGATE_NOISE * feats.std(), size=feats.shape)
    return feats.astype(np.float32)


def write_fixtures(out_dir):
    """Write fer_tiny.csv, fer_tiny_deep.hyf, and orb_pattern.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = make_tiny_dataset()
    csv_path = out / "fer_tiny.csv"
    save_fer_csv(ds, csv_path)
    ids = [str(i) for i in range(len(ds))]
    deep_path = out / "fer_tiny_deep.hyf"
    save_deep_features(deep_path, ids, surrogate_deep_features(ds.images))
    pattern_path = out / "orb_pattern.txt"
    pattern_path.write_text(pattern_to_text(generate_pattern()))
    return {"csv": csv_path, "deep": deep_path, "pattern": pattern_path}
