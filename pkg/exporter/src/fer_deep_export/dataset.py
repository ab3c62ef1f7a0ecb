"""Minimal reader for the FER CSV contract: label, pixel string, usage."""

import csv
from pathlib import Path

import numpy as np

HEIGHT = 48
WIDTH = 48


def iter_images(path, limit=None):
    """Yield (row_index, image) with pixels scaled to [0, 1]."""
    n_px = HEIGHT * WIDTH
    count = 0
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        index = 0
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if line_no == 1 and not row[0].strip().lstrip("-").isdigit():
                continue  # header
            if len(row) < 3:
                raise ValueError(f"line {line_no}: expected 3 columns")
            px = row[1].split()
            if len(px) != n_px:
                raise ValueError(f"line {line_no}: expected {n_px} pixels, got {len(px)}")
            img = np.array(px, dtype=np.float32).reshape(HEIGHT, WIDTH) / 255.0
            yield index, img
            index += 1
            count += 1
            if limit is not None and count >= limit:
                return
