"""Fixed-radius neighbor counting with a uniform grid index.

All counting uses the open ball: two points are close when their Euclidean
distance is strictly less than the radius. The index has cell side equal to
the query radius, so every candidate for a query lives in one of the 3^d
adjacent cells. A compiled scan kernel is used when available; set
EPSBALL_FORCE_PYTHON=1 before import to force the numpy fallback.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _countpy

if os.environ.get("EPSBALL_FORCE_PYTHON"):
    _kernel = _countpy
else:
    try:
        from . import _countcore as _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = _countpy

KERNEL_NAME = _kernel.__name__.rsplit(".", 1)[-1].lstrip("_")

# largest safe magnitude for int64 cell arithmetic
_KEY_LIMIT = 2**62


def as_sample(points) -> np.ndarray:
    """Validate and return an (n, d) float64 array of observations."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError(f"sample must be a 2-d array, got shape {pts.shape}")
    if pts.shape[0] > 0 and pts.shape[1] < 1:
        raise ValueError("points must have dimension d >= 1")
    if pts.size and not np.isfinite(pts).all():
        raise ValueError("sample contains non-finite coordinates")
    return np.ascontiguousarray(pts)


def ball_volume(d: int, eps: float) -> float:
    """Volume of a Euclidean ball of radius eps in dimension d."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if not eps > 0:
        raise ValueError(f"radius must be positive, got {eps}")
    d = int(d)
    return eps**d * 2.0 * math.pi ** (d / 2.0) / (d * math.gamma(d / 2.0))


@dataclass(frozen=True)
class NeighborCounts:
    """Per-point and total strict-radius neighbor counts.

    ``within``/``pair_total`` describe same-sample neighbors (self excluded,
    each unordered pair counted once in the total). ``cross``/``cross_total``
    describe neighbors in a second sample (ordered pairs).
    """

    within: np.ndarray | None = None
    pair_total: int | None = None
    cross: np.ndarray | None = None
    cross_total: int | None = None


def count_radius_bruteforce(points, queries, eps, block: int = 512) -> np.ndarray:
    """O(n*m) exhaustive scan; the correctness oracle for the grid index."""
    pts = as_sample(points)
    q = as_sample(queries)
    out = np.zeros(q.shape[0], dtype=np.int64)
    if pts.shape[0] == 0 or q.shape[0] == 0:
        return out
    if pts.shape[1] != q.shape[1]:
        raise ValueError("dimension mismatch between points and queries")
    eps2 = eps * eps
    for lo in range(0, q.shape[0], block):
        d2 = ((q[lo:lo + block, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        out[lo:lo + block] = (d2 < eps2).sum(axis=1)
    return out


class GridIndex:
    """Uniform grid over a point set, immutable once built.

    Cells have side ``eps``; occupied cell coordinates are shifted by one so
    the 3^d neighborhood of any occupied cell stays inside the key range and
    encoded keys cannot collide. If the total cell-key space would overflow
    int64 (degenerate eps versus data spread), queries fall back to the
    exhaustive scan, which stays exact.
    """

    def __init__(self, points, eps: float, kernel=None):
        if not eps > 0:
            raise ValueError(f"radius must be positive, got {eps}")
        pts = as_sample(points)
        self.eps = float(eps)
        self.n, self.d = pts.shape
        self._kernel = kernel if kernel is not None else _kernel
        self._points = pts
        self._brute = False
        if self.n == 0:
            return
        cells_f = np.floor(pts / self.eps)
        if np.abs(cells_f).max() >= _KEY_LIMIT // 2:
            self._brute = True
            return
        cells = cells_f.astype(np.int64)
        mins = cells.min(axis=0)
        cells -= mins - 1
        extents = cells.max(axis=0) + 2
        total = 1
        for j in range(self.d):
            total *= int(extents[j])
            if total >= _KEY_LIMIT:
                self._brute = True
                return
        strides = np.empty(self.d, dtype=np.int64)
        acc = 1
        for j in range(self.d):
            strides[j] = acc
            acc *= int(extents[j])
        keys = cells @ strides
        order = np.argsort(keys, kind="stable")
        self._points = np.ascontiguousarray(pts[order])
        self._ukeys, starts = np.unique(keys[order], return_index=True)
        self._starts = np.append(starts, self.n).astype(np.int64)
        self._mins = mins
        self._extents = extents
        self._strides = strides
        self._offsets = np.array(
            list(itertools.product((-1, 0, 1), repeat=self.d)), dtype=np.int64
        )

    def count_radius(self, queries) -> np.ndarray:
        """Number of indexed points strictly within eps of each query."""
        q = as_sample(queries)
        if q.shape[0] == 0 or self.n == 0:
            return np.zeros(q.shape[0], dtype=np.int64)
        if q.shape[1] != self.d:
            raise ValueError(
                f"dimension mismatch: index has d={self.d}, queries have d={q.shape[1]}"
            )
        if self._brute or np.abs(q).max() >= self.eps * _KEY_LIMIT:
            return count_radius_bruteforce(self._points, q, self.eps)
        qcells = np.floor(q / self.eps).astype(np.int64) - (self._mins - 1)
        return self._kernel.count_queries(
            self._points, self._ukeys, self._starts, q, qcells,
            self._extents, self._strides, self._offsets, self.eps,
        )


def count_within(points, eps: float, kernel=None) -> NeighborCounts:
    """Same-sample counts: within[i] = #{j != i : |x_i - x_j| < eps}."""
    pts = as_sample(points)
    idx = GridIndex(pts, eps, kernel=kernel)
    counts = idx.count_radius(pts)
    if pts.shape[0]:
        counts = counts - 1  # every point sees itself at distance 0
    total = int(counts.sum())
    assert total % 2 == 0
    return NeighborCounts(within=counts, pair_total=total // 2)


def count_cross(a, b, eps: float, kernel=None) -> NeighborCounts:
    """Cross-sample counts: cross[i] = #{j : |a_i - b_j| < eps}."""
    a = as_sample(a)
    b = as_sample(b)
    if a.shape[0] and b.shape[0] and a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    idx = GridIndex(b, eps, kernel=kernel)
    counts = idx.count_radius(a) if b.shape[0] else np.zeros(a.shape[0], dtype=np.int64)
    return NeighborCounts(cross=counts, cross_total=int(counts.sum()))
