"""Versioned binary container for cached model/reducer state.

Layout mirrors the HYF1 feature file: little-endian sized headers followed
by raw array payloads.

    magic "HYB1" | version u32 | kind (u16 len + utf8)
    | meta json (u32 len + utf8)
    | n_arrays u32
    | per array: name (u16 len + utf8), dtype u8, ndim u8, dims u64 each,
      payload bytes
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import BadMagicError, TruncatedFileError

MAGIC = b"HYB1"
VERSION = 1

_DTYPES = {0: "<f8", 1: "<i8", 2: "u1", 3: "<f4"}
_CODES = {np.dtype("<f8"): 0, np.dtype("<i8"): 1, np.dtype("u1"): 2, np.dtype("<f4"): 3}


def write_blob(path, kind: str, arrays: dict, meta: dict | None = None):
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        raw_kind = kind.encode("utf-8")
        fh.write(struct.pack("<H", len(raw_kind)))
        fh.write(raw_kind)
        raw_meta = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
        fh.write(struct.pack("<I", len(raw_meta)))
        fh.write(raw_meta)
        fh.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays.items():
            a = np.ascontiguousarray(arr)
            if a.dtype not in _CODES:
                a = np.ascontiguousarray(a, dtype=np.float64)
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(struct.pack("<B", _CODES[a.dtype]))
            fh.write(struct.pack("<B", a.ndim))
            for dim in a.shape:
                fh.write(struct.pack("<Q", dim))
            fh.write(a.tobytes(order="C"))


def read_blob(path):
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a state blob")
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
        raise BadMagicError(f"{path}: unsupported blob version {version}")
    (kind_len,) = struct.unpack("<H", take(2, "kind length"))
    kind = take(kind_len, "kind").decode("utf-8")
    (meta_len,) = struct.unpack("<I", take(4, "meta length"))
    meta = json.loads(take(meta_len, "meta").decode("utf-8"))
    (n_arrays,) = struct.unpack("<I", take(4, "array count"))
    arrays = {}
    for _ in range(n_arrays):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (code,) = struct.unpack("<B", take(1, "dtype"))
        (ndim,) = struct.unpack("<B", take(1, "ndim"))
        shape = tuple(
            struct.unpack("<Q", take(8, "dim"))[0] for _ in range(ndim)
        )
        dtype = np.dtype(_DTYPES[code])
        count = int(np.prod(shape)) if shape else 1
        payload = take(count * dtype.itemsize, f"array {name}")
        arrays[name] = np.frombuffer(payload, dtype=dtype).reshape(shape).copy()
    if pos != len(data):
        raise TruncatedFileError(f"{path}: {len(data) - pos} trailing bytes")
    return kind, arrays, meta
