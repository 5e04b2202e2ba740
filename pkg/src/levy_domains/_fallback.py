"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import math

import numpy as np

from . import _blocks

_CHUNK = 1 << 20


def stream_block_sums(k_lo: int, k_hi: int, reverse: bool = False) -> tuple[float, float]:
    """(sum c_k, sum |c_k|) over k_lo <= k <= k_hi.

    Chunks are generated with numpy and reduced with math.fsum; chunk order
    follows ``reverse``.
    """
    if k_hi < k_lo:
        return 0.0, 0.0
    starts = list(range(k_lo, k_hi + 1, _CHUNK))
    if reverse:
        starts.reverse()
    signed, absolute = [], []
    for lo in starts:
        _, c = _blocks.weights(lo, min(lo + _CHUNK - 1, k_hi))
        if reverse:
            c = c[::-1]
        signed.append(math.fsum(c))
        absolute.append(math.fsum(np.abs(c)))
    return math.fsum(signed), math.fsum(absolute)


def accumulate_paths(offsets, times, contrib, checkpoints, edges, labels, n_labels):
    offsets = np.asarray(offsets, dtype=np.int64)
    times = np.asarray(times, dtype=float)
    contrib = np.asarray(contrib, dtype=float)
    checkpoints = np.asarray(checkpoints, dtype=float)
    n_paths = offsets.size - 1
    n_cp = checkpoints.size
    d = contrib.shape[1]
    path = np.repeat(np.arange(n_paths), np.diff(offsets))
    cp = np.searchsorted(checkpoints, times, side="left")
    lab = np.asarray(labels)[np.searchsorted(np.asarray(edges, dtype=float), times, side="right")]
    keep = cp < n_cp
    out = np.zeros((n_paths, n_cp, n_labels, d))
    np.add.at(out, (path[keep], cp[keep], lab[keep]), contrib[keep])
    return np.cumsum(out, axis=1)
