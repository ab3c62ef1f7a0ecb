"""HYF1 feature-file writer (the wire contract with the pipeline):

    magic "HYF1" | version u32 LE = 1 | N u64 LE | D u64 LE
    | N x (id-length u16 LE, id UTF-8 bytes)
    | N x D float32 LE, row-major
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"HYF1"
VERSION = 1


def write_hyf1(path, ids, vectors):
    vecs = np.ascontiguousarray(vectors, dtype="<f4")
    ids = [str(i) for i in ids]
    if len(ids) != vecs.shape[0]:
        raise ValueError("ids and vectors disagree on row count")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ids")
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
