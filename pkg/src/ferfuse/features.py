"""Shared keypoint/descriptor containers for the local feature extractors."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Keypoint:
    x: float
    y: float
    scale: float = 1.0
    orientation: float = 0.0  # radians in [0, 2*pi)
    response: float = 0.0


@dataclass
class DescriptorSet:
    """Keypoints plus one descriptor row per keypoint.

    ``vectors`` is float64 (n, 128) for gradient descriptors and packed
    uint8 (n, 32) for 256-bit binary descriptors (``binary`` is True).
    """

    keypoints: list = field(default_factory=list)
    vectors: np.ndarray = None
    binary: bool = False

    def __post_init__(self):
        if self.vectors is None:
            width = 32 if self.binary else 128
            dtype = np.uint8 if self.binary else np.float64
            self.vectors = np.empty((0, width), dtype=dtype)
        if len(self.keypoints) != self.vectors.shape[0]:
            raise ValueError("keypoint count != descriptor row count")

    def __len__(self):
        return len(self.keypoints)
