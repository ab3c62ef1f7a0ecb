import numpy as np
import pytest

from ferfuse.kernels import CIRCLE_DX, CIRCLE_DY, hamming_matrix
from ferfuse.orb import (
    BORDER_MARGIN,
    detect_and_describe,
    fast_detect,
    generate_pattern,
    load_pattern,
    orb_describe,
    pattern_to_text,
)
from ferfuse.features import Keypoint


def textured_image(seed=3, size=48, n_blobs=12):
    rng = np.random.default_rng(seed)
    img = np.zeros((size, size))
    ys, xs = np.mgrid[0:size, 0:size]
    for _ in range(n_blobs):
        cy, cx = rng.integers(18, 30, size=2)
        s = rng.uniform(1.0, 2.5)
        a = rng.uniform(0.4, 1.0)
        img += a * np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * s * s))
    return np.clip(img, 0.0, 1.0)


def segment_test_oracle(img, threshold, n_contig):
    """Exhaustive 16-point segment test over every interior pixel."""
    h, w = img.shape
    corners = np.zeros((h, w), dtype=bool)
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            p = img[y, x]
            ring = [img[y + CIRCLE_DY[t], x + CIRCLE_DX[t]] for t in range(16)]
            for flags in ([v > p + threshold for v in ring], [v < p - threshold for v in ring]):
                doubled = flags + flags
                run = best = 0
                for f in doubled:
                    run = run + 1 if f else 0
                    best = max(best, run)
                if best >= n_contig:
                    corners[y, x] = True
    return corners


class TestFastDetect:
    def test_uniform_image_no_keypoints(self):
        assert fast_detect(np.full((48, 48), 0.5)) == []

    def test_single_bright_pixel(self):
        img = np.zeros((48, 48))
        img[20, 30] = 1.0
        kps = fast_detect(img, threshold=20 / 255)
        assert [(kp.x, kp.y) for kp in kps] == [(30.0, 20.0)]

    def test_white_square_corners(self):
        img = np.zeros((48, 48))
        img[19:29, 19:29] = 1.0
        kps = fast_detect(img)
        found = {(kp.x, kp.y) for kp in kps}
        for corner in ((19, 19), (19, 28), (28, 19), (28, 28)):
            assert any(
                abs(x - corner[1]) <= 2 and abs(y - corner[0]) <= 2 for x, y in found
            )

    @pytest.mark.parametrize("seed,size", [(0, 32), (1, 32), (2, 48), (3, 64)])
    def test_matches_segment_test_oracle(self, seed, size):
        rng = np.random.default_rng(seed)
        img = np.round(rng.random((size, size)) * 8) / 8.0  # flat regions + edges
        oracle = segment_test_oracle(img, 20 / 255, 9)
        from ferfuse.kernels import fast_response

        resp = fast_response(img, 20 / 255, 9)
        assert np.array_equal(resp > 0, oracle)

    def test_orientation_range(self):
        for kp in fast_detect(textured_image()):
            assert 0.0 <= kp.orientation < 2 * np.pi


class TestOrbDescribe:
    def test_flat_patch_all_bits_zero(self):
        img = np.full((48, 48), 0.5)
        kp = Keypoint(x=24.0, y=24.0)
        ds = orb_describe(img, [kp])
        assert len(ds) == 1
        assert np.all(ds.vectors == 0)

    def test_same_image_distance_zero(self):
        img = textured_image()
        a = detect_and_describe(img)
        b = detect_and_describe(img)
        assert len(a) == len(b) > 0
        assert np.array_equal(a.vectors, b.vectors)

    def test_border_keypoints_dropped(self):
        img = textured_image()
        near = Keypoint(x=5.0, y=5.0)
        inside = Keypoint(x=24.0, y=24.0)
        ds = orb_describe(img, [near, inside])
        assert len(ds) == 1
        assert ds.keypoints[0] is inside

    def test_rotation_90_median_hamming(self):
        img = textured_image()
        rot = np.rot90(img).copy()
        d1 = detect_and_describe(img)
        d2 = detect_and_describe(rot)
        assert len(d1) > 5
        w = img.shape[1]
        dists = []
        for i, kp in enumerate(d1.keypoints):
            tx, ty = kp.y, w - 1 - kp.x  # rot90 target location
            best, best_d = None, np.inf
            for j, kq in enumerate(d2.keypoints):
                dd = (kq.x - tx) ** 2 + (kq.y - ty) ** 2
                if dd < best_d:
                    best_d, best = dd, j
            if best is not None and best_d <= 4.0:
                dists.append(hamming_matrix(d1.vectors[i : i + 1], d2.vectors[best : best + 1])[0, 0])
        assert len(dists) >= 5
        assert np.median(dists) < 64

    def test_monotone_affine_remap_keeps_bits(self):
        """Bits depend on intensity order: a positive affine remap (which
        commutes with the box smoothing) leaves descriptors unchanged."""
        img = textured_image(seed=9)
        kps = fast_detect(img)
        base = orb_describe(img, kps)
        remapped = orb_describe(0.5 * img + 0.2, kps)
        assert len(base) == len(remapped) > 0
        assert np.array_equal(base.vectors, remapped.vectors)


class TestPattern:
    def test_frozen_pattern_matches_generator(self):
        assert np.array_equal(load_pattern(), generate_pattern())

    def test_fixture_copy_matches(self, fixtures_dir):
        text = (fixtures_dir / "orb_pattern.txt").read_text()
        assert text == pattern_to_text(load_pattern())

    def test_pattern_inside_patch_disc(self):
        p = load_pattern()
        assert p.shape == (256, 4)
        assert (p[:, 0] ** 2 + p[:, 1] ** 2).max() <= 15**2
        assert (p[:, 2] ** 2 + p[:, 3] ** 2).max() <= 15**2

    def test_rotated_samples_stay_in_margin(self):
        p = load_pattern().astype(np.float64)
        for theta in np.linspace(0, 2 * np.pi, 17):
            c, s = np.cos(theta), np.sin(theta)
            rx = np.rint(p[:, 0] * c - p[:, 1] * s)
            ry = np.rint(p[:, 0] * s + p[:, 1] * c)
            assert np.abs(rx).max() <= BORDER_MARGIN
            assert np.abs(ry).max() <= BORDER_MARGIN
