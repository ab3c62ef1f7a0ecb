import numpy as np
import pytest

from ferfuse.errors import ImageTooSmallError
from ferfuse.sift import (
    dog_pyramid,
    gaussian_kernel,
    sift_detect_describe,
)


def gaussian_blob(sigma, size=48, center=None):
    cy = cx = (size - 1) / 2.0 if center is None else None
    if center is not None:
        cy, cx = center
    ys, xs = np.mgrid[0:size, 0:size]
    return np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2.0 * sigma**2))


class TestDogPyramid:
    def test_constant_image_all_zero(self):
        pyr = dog_pyramid(np.full((48, 48), 0.37))
        for octave in pyr:
            assert np.abs(octave.dogs).max() < 1e-12

    def test_impulse_equals_kernel_difference(self):
        img = np.zeros((48, 48))
        img[24, 24] = 1.0
        pyr = dog_pyramid(img, octaves=1)
        octave = pyr[0]
        s0, s1 = octave.sigmas[0], octave.sigmas[1]
        # direct kernel-subtraction oracle: outer products of the 1-D kernels
        k0 = gaussian_kernel(s0)
        k1 = gaussian_kernel(s1)
        g0 = np.outer(k0, k0)
        g1 = np.outer(k1, k1)
        expected = np.zeros((48, 48))
        r1 = (len(k1) - 1) // 2
        expected[24 - r1 : 24 + r1 + 1, 24 - r1 : 24 + r1 + 1] += g1
        r0 = (len(k0) - 1) // 2
        expected[24 - r0 : 24 + r0 + 1, 24 - r0 : 24 + r0 + 1] -= g0
        assert np.allclose(octave.dogs[0], expected, atol=1e-12)

    def test_blob_extremum_at_center(self):
        pyr = dog_pyramid(gaussian_blob(2.0))
        best = None
        for octave in pyr:
            flat = np.abs(octave.dogs)
            idx = np.unravel_index(np.argmax(flat), flat.shape)
            value = flat[idx]
            if best is None or value > best[0]:
                best = (value, idx, octave.factor)
        _, (_, y, x), factor = best
        assert abs(y * factor - 23.5) <= 1.5
        assert abs(x * factor - 23.5) <= 1.5

    def test_image_too_small(self):
        with pytest.raises(ImageTooSmallError):
            dog_pyramid(np.zeros((48, 48)), octaves=4)


class TestSiftDetectDescribe:
    def test_constant_image_empty(self):
        ds = sift_detect_describe(np.full((48, 48), 0.5))
        assert len(ds) == 0
        assert ds.vectors.shape == (0, 128)

    def test_blob_keypoint_near_center(self):
        ds = sift_detect_describe(gaussian_blob(3.0, center=(24.0, 24.0)))
        assert len(ds) >= 1
        near = [
            kp
            for kp in ds.keypoints
            if abs(kp.x - 24.0) <= 1.5 and abs(kp.y - 24.0) <= 1.5
        ]
        assert near

    def test_descriptor_norm_and_cap(self, tiny_dataset):
        found = 0
        for img in tiny_dataset.images[:20]:
            ds = sift_detect_describe(img)
            if not len(ds):
                continue
            found += len(ds)
            norms = np.linalg.norm(ds.vectors, axis=1)
            assert np.allclose(norms, 1.0, atol=1e-6)
            assert ds.vectors.max() <= 0.2 + 1e-6
            assert np.all(ds.vectors >= 0.0)
        assert found > 0

    def test_constant_shift_invariance(self, tiny_dataset):
        """Adding a constant leaves gradients, hence descriptors, unchanged
        (up to float round-off in the blur)."""
        img = tiny_dataset.images[3]
        a = sift_detect_describe(img)
        b = sift_detect_describe(img + 0.1)
        assert len(a) == len(b)
        assert [(kp.x, kp.y) for kp in a.keypoints] == [(kp.x, kp.y) for kp in b.keypoints]
        assert np.allclose(a.vectors, b.vectors, atol=1e-9)

    def test_max_keypoints_cap(self, tiny_dataset):
        img = tiny_dataset.images[0]
        full = sift_detect_describe(img)
        if len(full) < 2:
            pytest.skip("fixture image yields too few keypoints")
        capped = sift_detect_describe(img, max_keypoints=1)
        assert len(capped) == 1
        assert capped.keypoints[0].response == max(kp.response for kp in full.keypoints)
