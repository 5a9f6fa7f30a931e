"""Pure-numpy query kernel for the uniform grid index.

Fallback used when the compiled extension is unavailable (or when
EPSBALL_FORCE_PYTHON is set). Queries sharing a grid cell are answered in
one vectorized block, since they see the same candidate set.
"""

import numpy as np

_BLOCK = 256


def count_queries(pts, ukeys, starts, queries, qcells, extents, strides, offsets, eps):
    nq = queries.shape[0]
    out = np.zeros(nq, dtype=np.int64)
    eps2 = eps * eps
    in_range = np.all((qcells >= 0) & (qcells < extents), axis=1)
    if not in_range.any():
        return out
    live = np.flatnonzero(in_range)
    qkeys = qcells[live] @ strides
    uniq_keys, inv = np.unique(qkeys, return_inverse=True)
    for g in range(len(uniq_keys)):
        rows = live[inv == g]
        base = qcells[rows[0]]
        chunks = []
        for off in offsets:
            cell = base + off
            if np.any(cell < 0) or np.any(cell >= extents):
                continue
            key = int(cell @ strides)
            pos = int(np.searchsorted(ukeys, key))
            if pos < len(ukeys) and ukeys[pos] == key:
                chunks.append(pts[starts[pos]:starts[pos + 1]])
        if not chunks:
            continue
        cand = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        for lo in range(0, len(rows), _BLOCK):
            block = rows[lo:lo + _BLOCK]
            d2 = ((queries[block, None, :] - cand[None, :, :]) ** 2).sum(axis=2)
            out[block] = (d2 < eps2).sum(axis=1)
    return out
