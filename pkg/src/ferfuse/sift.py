"""Scale-invariant keypoints and gradient-histogram descriptors.

Difference-of-Gaussian pyramid, 26-neighbor extrema detection with a
contrast threshold, dominant-orientation assignment, and the classic
4x4-cell / 8-orientation-bin descriptor (128 values, unit norm, entries
capped at 0.2).

Simplifications for small inputs (defaults tuned for 48x48 faces): no
sub-pixel extremum refinement and no edge-response rejection; the
descriptor samples a fixed 16x16 window in octave coordinates and skips
samples falling outside the image.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmallError
from .features import DescriptorSet, Keypoint

DEFAULT_OCTAVES = 3
DEFAULT_SCALES = 3
DEFAULT_SIGMA0 = 1.6
DEFAULT_CONTRAST = 0.03

N_SPATIAL = 4
N_ORIENT = 8
WINDOW = 16  # descriptor window side, octave pixels
DESCRIPTOR_CAP = 0.2
MIN_OCTAVE_SIDE = 8


def gaussian_kernel(sigma: float):
    """1-D Gaussian truncated at 4*sigma, normalized to sum 1."""
    radius = max(1, int(np.ceil(4.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img, sigma: float):
    """Separable Gaussian blur with reflect padding."""
    k = gaussian_kernel(sigma)
    r = (len(k) - 1) // 2
    padded = np.pad(img, ((0, 0), (r, r)), mode="reflect")
    rows = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 1, padded)
    padded = np.pad(rows, ((r, r), (0, 0)), mode="reflect")
    return np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 0, padded)


@dataclass
class Octave:
    gaussians: np.ndarray  # (scales+3, h, w)
    dogs: np.ndarray  # (scales+2, h, w)
    sigmas: np.ndarray  # octave-local sigma per gaussian level
    factor: int  # 2**octave_index, maps octave coords to base coords


def dog_pyramid(
    img,
    octaves: int = DEFAULT_OCTAVES,
    scales_per_octave: int = DEFAULT_SCALES,
    sigma0: float = DEFAULT_SIGMA0,
):
    """Difference-of-Gaussian scale space.

    Per octave: gaussian levels at sigma0 * k**s with
    k = 2**(1/scales_per_octave); DoG planes are differences of adjacent
    levels.  Each octave halves the image; raises ImageTooSmallError when
    an octave would drop below 8x8.
    """
    if octaves < 1:
        raise ValueError("octaves must be >= 1")
    if sigma0 <= 0:
        raise ValueError("sigma0 must be positive")
    base = np.asarray(img, dtype=np.float64)
    k = 2.0 ** (1.0 / scales_per_octave)
    n_levels = scales_per_octave + 3
    sigmas = sigma0 * k ** np.arange(n_levels)
    result = []
    for o in range(octaves):
        h, w = base.shape
        if h < MIN_OCTAVE_SIDE or w < MIN_OCTAVE_SIDE:
            raise ImageTooSmallError(
                f"octave {o} is {h}x{w}, below {MIN_OCTAVE_SIDE}x{MIN_OCTAVE_SIDE}"
            )
        gaussians = np.stack([gaussian_blur(base, s) for s in sigmas])
        dogs = gaussians[1:] - gaussians[:-1]
        result.append(Octave(gaussians=gaussians, dogs=dogs, sigmas=sigmas.copy(), factor=2**o))
        # next octave starts from the level at twice the base sigma
        base = gaussians[scales_per_octave][::2, ::2]
    return result


def _local_extrema(dogs, contrast):
    """(scale, y, x) of 26-neighbor maxima/minima above the contrast bar."""
    s, h, w = dogs.shape
    hits = []
    for si in range(1, s - 1):
        cube = dogs[si - 1 : si + 2]
        center = dogs[si, 1 : h - 1, 1 : w - 1]
        strong = np.abs(center) >= contrast
        if not strong.any():
            continue
        neighborhood_max = np.full(center.shape, -np.inf)
        neighborhood_min = np.full(center.shape, np.inf)
        for ds in range(3):
            for dy in range(3):
                for dx in range(3):
                    if ds == 1 and dy == 1 and dx == 1:
                        continue
                    block = cube[ds, dy : dy + h - 2, dx : dx + w - 2]
                    np.maximum(neighborhood_max, block, out=neighborhood_max)
                    np.minimum(neighborhood_min, block, out=neighborhood_min)
        is_max = center > neighborhood_max
        is_min = center < neighborhood_min
        ys, xs = np.nonzero(strong & (is_max | is_min))
        for y, x in zip(ys, xs):
            hits.append((si, y + 1, x + 1))
    return hits


def _gradients(plane):
    gy, gx = np.gradient(plane)
    return gx, gy


def _dominant_orientation(gx, gy, x, y, sigma_local):
    """Peak of the 36-bin gradient-orientation histogram around (x, y)."""
    h, w = gx.shape
    radius = max(2, int(round(3.0 * 1.5 * sigma_local)))
    y0, y1 = max(0, y - radius), min(h, y + radius + 1)
    x0, x1 = max(0, x - radius), min(w, x + radius + 1)
    wy = np.arange(y0, y1) - y
    wx = np.arange(x0, x1) - x
    du, dv = np.meshgrid(wx, wy)
    gxs = gx[y0:y1, x0:x1]
    gys = gy[y0:y1, x0:x1]
    mag = np.hypot(gxs, gys)
    weight = np.exp(-(du**2 + dv**2) / (2.0 * (1.5 * sigma_local) ** 2))
    ang = np.mod(np.arctan2(gys, gxs), 2.0 * np.pi)
    bins = np.minimum((ang / (2.0 * np.pi) * 36).astype(np.int64), 35)
    hist = np.bincount(bins.ravel(), weights=(mag * weight).ravel(), minlength=36)
    if hist.max() <= 0:
        return 0.0
    peak = int(np.argmax(hist))
    left = hist[(peak - 1) % 36]
    right = hist[(peak + 1) % 36]
    center = hist[peak]
    denom = left - 2.0 * center + right
    offset = 0.0 if denom == 0 else 0.5 * (left - right) / denom
    theta = (peak + 0.5 + offset) * (2.0 * np.pi / 36)
    return float(np.mod(theta, 2.0 * np.pi))


# descriptor sample grid: 16x16 offsets at half-pixel centers
_GRID = np.arange(WINDOW, dtype=np.float64) - (WINDOW - 1) / 2.0
_DU, _DV = np.meshgrid(_GRID, _GRID)
_SAMPLE_WEIGHT = np.exp(-(_DU**2 + _DV**2) / (2.0 * (WINDOW / 2.0) ** 2))


def _bilinear(plane, ys, xs):
    h, w = plane.shape
    valid = (ys >= 0) & (ys <= h - 1) & (xs >= 0) & (xs <= w - 1)
    ysc = np.clip(ys, 0, h - 1)
    xsc = np.clip(xs, 0, w - 1)
    y0 = np.floor(ysc).astype(np.int64)
    x0 = np.floor(xsc).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = ysc - y0
    fx = xsc - x0
    out = (
        plane[y0, x0] * (1 - fy) * (1 - fx)
        + plane[y0, x1] * (1 - fy) * fx
        + plane[y1, x0] * fy * (1 - fx)
        + plane[y1, x1] * fy * fx
    )
    return np.where(valid, out, 0.0)


def _descriptor(gx, gy, x, y, theta):
    """128-vector: 4x4 spatial cells x 8 orientation bins, trilinear soft
    assignment, unit norm with entries capped at 0.2.

    Returns None when the gradient histogram is too sparse to satisfy the
    cap and the unit norm simultaneously (needs at least 1/0.2^2 = 25
    non-zero bins); such keypoints are dropped.
    """
    c, s = np.cos(theta), np.sin(theta)
    rx = x + c * _DU - s * _DV
    ry = y + s * _DU + c * _DV
    sgx = _bilinear(gx, ry, rx)
    sgy = _bilinear(gy, ry, rx)
    mag = np.hypot(sgx, sgy) * _SAMPLE_WEIGHT
    ang = np.mod(np.arctan2(sgy, sgx) - theta, 2.0 * np.pi)
    # cell coordinates in [ -0.5, 3.5 ] so each sample spreads over at most
    # two cells per axis
    cu = (_DU + (WINDOW - 1) / 2.0) / (WINDOW / N_SPATIAL) - 0.5
    cv = (_DV + (WINDOW - 1) / 2.0) / (WINDOW / N_SPATIAL) - 0.5
    ob = ang / (2.0 * np.pi / N_ORIENT)
    hist = np.zeros((N_SPATIAL, N_SPATIAL, N_ORIENT))
    cu0 = np.floor(cu).astype(np.int64)
    cv0 = np.floor(cv).astype(np.int64)
    ob0 = np.floor(ob).astype(np.int64)
    fu = cu - cu0
    fv = cv - cv0
    fo = ob - ob0
    for du_bin, wu in ((0, 1 - fu), (1, fu)):
        us = cu0 + du_bin
        u_ok = (us >= 0) & (us < N_SPATIAL)
        for dv_bin, wv in ((0, 1 - fv), (1, fv)):
            vs = cv0 + dv_bin
            v_ok = (vs >= 0) & (vs < N_SPATIAL)
            for do_bin, wo in ((0, 1 - fo), (1, fo)):
                os_ = (ob0 + do_bin) % N_ORIENT
                wgt = mag * wu * wv * wo
                ok = u_ok & v_ok & (wgt > 0)
                np.add.at(hist, (vs[ok], us[ok], os_[ok]), wgt[ok])
    return _capped_unit_norm(hist.ravel())


def _capped_unit_norm(raw):
    """Scale the histogram so entries cap at 0.2 and the norm is exactly 1.

    Solves ||min(s * h, cap)|| = 1 for the scale s: with the m largest
    entries saturated, s^2 * (sum of the remaining squares) = 1 - m*cap^2.
    Infeasible histograms (fewer than 1/cap^2 = 25 non-zero bins) return
    None and the keypoint is dropped.
    """
    cap = DESCRIPTOR_CAP
    nnz = np.count_nonzero(raw)
    if nnz * cap * cap < 1.0 - 1e-12:
        return None
    order = np.argsort(-raw, kind="stable")
    h = raw[order]
    sq = h**2
    suffix = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    for m in range(len(h) + 1):
        mass = 1.0 - cap * cap * m
        rest = suffix[m]
        if rest <= 0.0:
            if abs(mass) < 1e-12:
                return np.minimum(np.where(raw > 0, cap, 0.0), cap)
            break
        if mass <= 0.0:
            break
        s = np.sqrt(mass / rest)
        upper_ok = m == 0 or s * h[m - 1] >= cap * (1 - 1e-12)
        lower_ok = m == len(h) or s * h[m] <= cap * (1 + 1e-12)
        if upper_ok and lower_ok:
            return np.minimum(s * raw, cap)
    return None


def sift_detect_describe(
    img,
    octaves: int = DEFAULT_OCTAVES,
    scales_per_octave: int = DEFAULT_SCALES,
    sigma0: float = DEFAULT_SIGMA0,
    contrast_threshold: float = DEFAULT_CONTRAST,
    max_keypoints: int | None = None,
) -> DescriptorSet:
    """Detect DoG extrema and describe them; an empty set is legal."""
    pyramid = dog_pyramid(img, octaves, scales_per_octave, sigma0)
    k = 2.0 ** (1.0 / scales_per_octave)
    keypoints = []
    vectors = []
    for octave in pyramid:
        grads = {}
        for si, y, x in _local_extrema(octave.dogs, contrast_threshold):
            if si not in grads:
                grads[si] = _gradients(octave.gaussians[si])
            gx, gy = grads[si]
            sigma_local = sigma0 * k**si
            theta = _dominant_orientation(gx, gy, x, y, sigma_local)
            vec = _descriptor(gx, gy, float(x), float(y), theta)
            if vec is None:
                continue
            keypoints.append(
                Keypoint(
                    x=float(x * octave.factor),
                    y=float(y * octave.factor),
                    scale=float(sigma_local * octave.factor),
                    orientation=theta,
                    response=float(abs(octave.dogs[si, y, x])),
                )
            )
            vectors.append(vec)
    if max_keypoints is not None and len(keypoints) > max_keypoints:
        order = sorted(
            range(len(keypoints)),
            key=lambda i: (-keypoints[i].response, keypoints[i].y, keypoints[i].x),
        )[:max_keypoints]
        order.sort()
        keypoints = [keypoints[i] for i in order]
        vectors = [vectors[i] for i in order]
    mat = np.array(vectors) if vectors else np.empty((0, N_SPATIAL * N_SPATIAL * N_ORIENT))
    return DescriptorSet(keypoints=keypoints, vectors=mat, binary=False)
