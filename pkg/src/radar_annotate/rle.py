"""Row-major run-length encoding for binary masks.

Counts alternate zero-run / one-run starting with zeros, so a mask that
begins with a set bin gets a leading 0 count.
"""

import numpy as np


def rle_encode(mask: np.ndarray) -> dict:
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    flat = mask.reshape(-1).astype(np.int8)
    if flat.size == 0:
        return {"counts": [], "size": [h, w]}
    edges = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate([[0], edges, [flat.size]])
    counts = np.diff(bounds).tolist()
    if flat[0] == 1:
        counts = [0] + counts
    return {"counts": counts, "size": [h, w]}


def rle_decode(rle: dict) -> np.ndarray:
    h, w = rle["size"]
    counts = rle["counts"]
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for count in counts:
        if value:
            flat[pos:pos + count] = True
        pos += count
        value = not value
    return flat.reshape(h, w)
