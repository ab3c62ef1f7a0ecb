"""Descriptor flattening, per-block standardization, and feature fusion.

Also owns the HYF1 feature-file container used to hand deep features to
the pipeline:

    magic "HYF1" | version u32 LE = 1 | N u64 LE | D u64 LE
    | N x (id-length u16 LE, id UTF-8 bytes)
    | N x D float32 LE, row-major
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DuplicateIdError,
    LengthMismatchError,
    TruncatedFileError,
)

MAGIC = b"HYF1"
VERSION = 1

SOURCE_ORDER = ("vgg", "sift", "orb", "pixels")


@dataclass(frozen=True)
class DeepFeatureTable:
    ids: list
    vectors: np.ndarray  # (N, d_v) float32

    @property
    def dim(self):
        return self.vectors.shape[1]


def unpack_bits(packed):
    """Packed descriptor bytes -> {0,1} float rows, MSB first within a byte."""
    packed = np.asarray(packed, dtype=np.uint8)
    if packed.ndim == 1:
        packed = packed[None, :]
    return np.unpackbits(packed, axis=1).astype(np.float64)


def flatten(descriptors, expected_shape=None):
    """Row-major flatten of a descriptor matrix into one vector.

    Binary descriptor sets (packed uint8) are unpacked to {0,1} reals
    first.  An empty set flattens to zeros of ``expected_shape`` (rows,
    cols); passing an empty set without the expected shape is an error.
    """
    from .features import DescriptorSet  # local import to avoid a cycle

    if isinstance(descriptors, DescriptorSet):
        m = descriptors.vectors
        if descriptors.binary and m.size:
            m = unpack_bits(m)
    else:
        m = np.asarray(descriptors)
        if m.dtype == np.uint8:
            m = unpack_bits(m)
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        if expected_shape is None:
            raise ValueError("empty descriptor set needs expected_shape to zero-pad")
        k, d = expected_shape
        return np.zeros(k * d)
    return m.ravel().copy()


class BlockScaler:
    """Per-column affine standardization fit on the train split.

    Constant columns map to zero (std stays stored as 0) so block offsets
    never shift.
    """

    def __init__(self, mean, std):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.asarray(std, dtype=np.float64)

    @classmethod
    def fit(cls, block):
        b = np.asarray(block, dtype=np.float64)
        mean = b.mean(axis=0)
        std = b.std(axis=0)
        return cls(mean, std)

    @property
    def dim(self):
        return self.mean.shape[0]

    def apply(self, rows):
        r = np.asarray(rows, dtype=np.float64)
        if r.shape[-1] != self.dim:
            raise LengthMismatchError(f"expected {self.dim} columns, got {r.shape[-1]}")
        safe = np.where(self.std > 0, self.std, 1.0)
        out = (r - self.mean) / safe
        return np.where(self.std > 0, out, 0.0)

    def invert(self, rows):
        r = np.asarray(rows, dtype=np.float64)
        return r * np.where(self.std > 0, self.std, 0.0) + self.mean


def fuse(blocks: dict, enabled, scalers: dict):
    """Standardize each enabled source block and concatenate in the fixed
    source order.  ``blocks`` maps source name -> (N, d_source) matrix.
    """
    enabled = [s for s in SOURCE_ORDER if s in set(enabled)]
    if not enabled:
        raise ValueError("no sources enabled")
    parts = []
    for source in enabled:
        if source not in blocks:
            raise LengthMismatchError(f"source {source!r} enabled but no block given")
        parts.append(scalers[source].apply(np.atleast_2d(blocks[source])))
    heights = {p.shape[0] for p in parts}
    if len(heights) != 1:
        raise LengthMismatchError(f"blocks disagree on row count: {sorted(heights)}")
    return np.concatenate(parts, axis=1)


def block_slices(enabled, dims: dict):
    """Column slice of each enabled source inside the fused vector."""
    enabled = [s for s in SOURCE_ORDER if s in set(enabled)]
    out = {}
    offset = 0
    for source in enabled:
        d = dims[source]
        out[source] = slice(offset, offset + d)
        offset += d
    return out


# ---------------------------------------------------------------------------
# HYF1 container


def save_deep_features(path, ids, vectors):
    vecs = np.ascontiguousarray(vectors, dtype="<f4")
    ids = [str(i) for i in ids]
    if len(ids) != vecs.shape[0]:
        raise LengthMismatchError("ids and vectors disagree on row count")
    if len(set(ids)) != len(ids):
        raise DuplicateIdError("duplicate ids in table")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", vecs.shape[0]))
        fh.write(struct.pack("<Q", vecs.shape[1]))
        for ident in ids:
            raw = ident.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(vecs.tobytes(order="C"))


def load_deep_features(path) -> DeepFeatureTable:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an HYF1 file")
    pos = 4

    def take(n, what):
        nonlocal pos
        if pos + n > len(data):
            raise TruncatedFileError(f"{path}: truncated while reading {what}")
        chunk = data[pos : pos + n]
        pos += n
        return chunk

    (version,) = struct.unpack("<I", take(4, "version"))
    if version != VERSION:
        raise BadMagicError(f"{path}: unsupported version {version}")
    (n,) = struct.unpack("<Q", take(8, "row count"))
    (dim,) = struct.unpack("<Q", take(8, "dimension"))
    ids = []
    for i in range(n):
        (id_len,) = struct.unpack("<H", take(2, f"id {i} length"))
        ids.append(take(id_len, f"id {i}").decode("utf-8"))
    if len(set(ids)) != len(ids):
        raise DuplicateIdError(f"{path}: duplicate ids")
    payload = take(4 * n * dim, "feature rows")
    if pos != len(data):
        raise TruncatedFileError(f"{path}: {len(data) - pos} trailing bytes")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n, dim).copy()
    return DeepFeatureTable(ids=ids, vectors=vectors)
