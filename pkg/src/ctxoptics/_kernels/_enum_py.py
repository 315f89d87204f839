"""Pure-Python (numpy) enumeration kernel; same contract as ``_enum_cy``."""
from __future__ import annotations

import numpy as np

CHUNK_BITS = 16


def best_in_block(vertex, indptr, nbr, wt, nlow: int, prefix: int) -> tuple[int, int]:
    """Return ``(max value, smallest index attaining it)`` over one block.

    Index ``k`` encodes ``a_i = -1`` when bit ``i`` is set; the block is every
    ``k`` whose bits above ``nlow`` equal ``prefix``.
    """
    vertex = np.asarray(vertex, dtype=np.int64)
    indptr = np.asarray(indptr, dtype=np.int64)
    nbr = np.asarray(nbr, dtype=np.int64)
    wt = np.asarray(wt, dtype=np.int64)
    n = vertex.shape[0]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    upper = nbr > rows
    ei, ej, ew = rows[upper], nbr[upper], wt[upper]
    shifts = np.arange(n, dtype=np.int64)

    base = int(prefix) << nlow
    total = 1 << nlow
    chunk = 1 << min(CHUNK_BITS, nlow)
    best_val, best_idx = None, None
    for start in range(0, total, chunk):
        k = np.arange(base + start, base + start + chunk, dtype=np.int64)
        a = 1 - 2 * ((k[:, None] >> shifts) & 1)
        vals = a @ vertex + (a[:, ei] * a[:, ej]) @ ew
        j = int(np.argmax(vals))
        if best_val is None or vals[j] > best_val:
            best_val, best_idx = int(vals[j]), int(k[j])
    return best_val, best_idx
