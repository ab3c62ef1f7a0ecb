"""FAST corner detection and rotation-steered binary descriptors.

The 256 intensity test pairs live in a 31x31 patch, are drawn once from a
fixed seed, and ship frozen as package data (``data/orb_pattern.txt``) so
descriptors are a bit-exact contract.  Each bit is a strict greater-than
comparison on box-smoothed intensities; the pair coordinates are rotated
by the keypoint orientation before sampling.
"""

from importlib import resources

import numpy as np

from . import kernels
from .features import DescriptorSet, Keypoint

PATCH_RADIUS = 15  # test pairs stay inside this disc
BORDER_MARGIN = 16  # keypoints closer than this to a border are dropped
N_PAIRS = 256
PATTERN_SEED = 42
DEFAULT_THRESHOLD = 20.0 / 255.0
DEFAULT_N_CONTIG = 9
SMOOTH_SIDE = 5

_pattern_cache = None


def generate_pattern(seed: int = PATTERN_SEED, n_pairs: int = N_PAIRS):
    """Draw the test-pair pattern: integer Gaussian offsets (sigma =
    patch/5), redrawn until both endpoints fall inside the patch disc so
    rotated samples never leave a BORDER_MARGIN-wide band."""
    rng = np.random.default_rng(seed)
    sigma = (2 * PATCH_RADIUS + 1) / 5.0
    pairs = np.empty((n_pairs, 4), dtype=np.int64)
    for i in range(n_pairs):
        while True:
            pt = np.rint(rng.normal(0.0, sigma, size=4)).astype(np.int64)
            if pt[0] ** 2 + pt[1] ** 2 <= PATCH_RADIUS**2 and pt[2] ** 2 + pt[3] ** 2 <= PATCH_RADIUS**2:
                pairs[i] = pt
                break
    return pairs


def pattern_to_text(pairs):
    return "\n".join(" ".join(str(v) for v in row) for row in pairs) + "\n"


def load_pattern():
    """The frozen in-repo pattern (256 lines of ``ax ay bx by``)."""
    global _pattern_cache
    if _pattern_cache is None:
        text = resources.files("ferfuse").joinpath("data/orb_pattern.txt").read_text()
        rows = [line.split() for line in text.strip().splitlines()]
        _pattern_cache = np.array(rows, dtype=np.int64)
        if _pattern_cache.shape != (N_PAIRS, 4):
            raise ValueError(f"pattern file has shape {_pattern_cache.shape}")
    return _pattern_cache


def box_smooth(img, side: int = SMOOTH_SIDE):
    """Separable box filter with reflect padding."""
    k = np.full(side, 1.0 / side)
    r = side // 2
    padded = np.pad(img, ((0, 0), (r, r)), mode="reflect")
    rows = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 1, padded)
    padded = np.pad(rows, ((r, r), (0, 0)), mode="reflect")
    return np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 0, padded)


def _centroid_orientation(img, x: int, y: int):
    """Intensity-centroid angle from first-order patch moments."""
    h, w = img.shape
    radius = min(PATCH_RADIUS, x, y, w - 1 - x, h - 1 - y)
    radius = max(radius, 3)
    us = np.arange(-radius, radius + 1)
    du, dv = np.meshgrid(us, us)
    disc = du**2 + dv**2 <= radius**2
    patch = img[y - radius : y + radius + 1, x - radius : x + radius + 1]
    m10 = float((du * patch)[disc].sum())
    m01 = float((dv * patch)[disc].sum())
    if m10 == 0.0 and m01 == 0.0:
        return 0.0
    return float(np.mod(np.arctan2(m01, m10), 2.0 * np.pi))


def fast_detect(
    img,
    threshold: float = DEFAULT_THRESHOLD,
    n_contig: int = DEFAULT_N_CONTIG,
) -> list:
    """FAST segment-test corners with 3x3 non-max suppression.

    A pixel passes when at least ``n_contig`` contiguous circle pixels are
    all brighter than center+threshold or all darker than
    center-threshold.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if not 9 <= n_contig <= 12:
        raise ValueError("n_contig must be in 9..12")
    image = np.asarray(img, dtype=np.float64)
    response = kernels.fast_response(image, threshold, n_contig)
    ys, xs = np.nonzero(response > 0)
    if len(ys) == 0:
        return []
    order = np.lexsort((xs, ys, -response[ys, xs]))
    kept = []
    occupied = set()
    for i in order:
        y, x = int(ys[i]), int(xs[i])
        if any((y + dy, x + dx) in occupied for dy in (-1, 0, 1) for dx in (-1, 0, 1)):
            continue
        occupied.add((y, x))
        kept.append(
            Keypoint(
                x=float(x),
                y=float(y),
                scale=1.0,
                orientation=_centroid_orientation(image, x, y),
                response=float(response[y, x]),
            )
        )
    kept.sort(key=lambda kp: (kp.y, kp.x))
    return kept


def orb_describe(img, keypoints, pattern=None) -> DescriptorSet:
    """256-bit descriptors for keypoints at least BORDER_MARGIN from the
    border (others are dropped).  Bits pack MSB-first into 32 bytes."""
    image = np.asarray(img, dtype=np.float64)
    h, w = image.shape
    if pattern is None:
        pattern = load_pattern()
    smoothed = box_smooth(image)
    ax, ay, bx, by = (pattern[:, i].astype(np.float64) for i in range(4))
    kept = []
    rows = []
    for kp in keypoints:
        x = int(round(kp.x))
        y = int(round(kp.y))
        if not (
            BORDER_MARGIN <= x <= w - 1 - BORDER_MARGIN
            and BORDER_MARGIN <= y <= h - 1 - BORDER_MARGIN
        ):
            continue
        c = np.cos(kp.orientation)
        s = np.sin(kp.orientation)
        rax = np.rint(ax * c - ay * s).astype(np.int64)
        ray = np.rint(ax * s + ay * c).astype(np.int64)
        rbx = np.rint(bx * c - by * s).astype(np.int64)
        rby = np.rint(bx * s + by * c).astype(np.int64)
        va = smoothed[y + ray, x + rax]
        vb = smoothed[y + rby, x + rbx]
        bits = (va > vb).astype(np.uint8)
        rows.append(np.packbits(bits))
        kept.append(kp)
    mat = np.array(rows, dtype=np.uint8) if rows else np.empty((0, N_PAIRS // 8), dtype=np.uint8)
    return DescriptorSet(keypoints=kept, vectors=mat, binary=True)


def detect_and_describe(
    img,
    threshold: float = DEFAULT_THRESHOLD,
    n_contig: int = DEFAULT_N_CONTIG,
    max_keypoints: int | None = None,
) -> DescriptorSet:
    kps = fast_detect(img, threshold, n_contig)
    if max_keypoints is not None and len(kps) > max_keypoints:
        kps = sorted(kps, key=lambda kp: (-kp.response, kp.y, kp.x))[:max_keypoints]
        kps.sort(key=lambda kp: (kp.y, kp.x))
    return orb_describe(img, kps)
