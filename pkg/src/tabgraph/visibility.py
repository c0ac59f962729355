"""Visibility edges between word boxes.

For every box and each of the four axial directions, the nearest box whose
projection on the perpendicular axis overlaps (overlap length > 0) becomes a
neighbour, provided the open corridor between the two boxes (the axis-aligned
band spanning the projection overlap) intersects no third box's interior.
Distance ties are broken by the lower box index. The result is an undirected,
deduplicated edge list, so every box ends up with at most four edges from its
own scan.

Two interchangeable implementations exist: a Cython kernel
(``tabgraph._visibility_fast``, built at install time) and a numpy fallback.
The kernel is picked at import; set ``TABGRAPH_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .dataset import WordBox

try:
    from . import _visibility_fast
except ImportError:
    _visibility_fast = None


def active_backend() -> str:
    """Name of the implementation `visibility_edges` will dispatch to."""
    if _visibility_fast is not None and not os.environ.get("TABGRAPH_PURE"):
        return "cython"
    return "pure"


def _nearest_positive_x(ax1, ay1, ax2, ay2, u: int) -> int:
    """Partner of node u scanning in the +x direction of the given frame.

    Returns -1 when there is no candidate or the corridor to the nearest
    candidate is blocked.
    """
    overlap = np.minimum(ay2, ay2[u]) - np.maximum(ay1, ay1[u])
    cand = (ax1 >= ax2[u]) & (overlap > 0.0)
    cand[u] = False
    if not cand.any():
        return -1
    gaps = np.where(cand, ax1 - ax2[u], np.inf)
    v = int(np.argmin(gaps))  # first minimum = lowest index on ties

    cx1, cx2 = ax2[u], ax1[v]
    oy1 = max(ay1[u], ay1[v])
    oy2 = min(ay2[u], ay2[v])
    blocked = (np.maximum(cx1, ax1) < np.minimum(cx2, ax2)) & (
        np.maximum(oy1, ay1) < np.minimum(oy2, ay2)
    )
    blocked[u] = False
    blocked[v] = False
    return -1 if blocked.any() else v


def _visibility_pure(x1, y1, x2, y2) -> list[tuple[int, int]]:
    n = x1.shape[0]
    # right / left / down / up expressed as +x scans in mirrored/swapped frames
    frames = (
        (x1, y1, x2, y2),
        (-x2, y1, -x1, y2),
        (y1, x1, y2, x2),
        (-y2, x1, -y1, x2),
    )
    edges: set[tuple[int, int]] = set()
    for u in range(n):
        for ax1, ay1, ax2, ay2 in frames:
            v = _nearest_positive_x(ax1, ay1, ax2, ay2, u)
            if v >= 0:
                edges.add((u, v) if u < v else (v, u))
    return sorted(edges)


def visibility_pairs(
    x1: np.ndarray, y1: np.ndarray, x2: np.ndarray, y2: np.ndarray
) -> list[tuple[int, int]]:
    """Visibility edges over raw coordinate arrays, sorted (i, j) with i < j."""
    x1 = np.ascontiguousarray(x1, dtype=np.float64)
    y1 = np.ascontiguousarray(y1, dtype=np.float64)
    x2 = np.ascontiguousarray(x2, dtype=np.float64)
    y2 = np.ascontiguousarray(y2, dtype=np.float64)
    if not (x1.shape == y1.shape == x2.shape == y2.shape) or x1.ndim != 1:
        raise ValueError("coordinate arrays must be 1-D and equally sized")
    if active_backend() == "cython":
        return _visibility_fast.visibility_pairs(x1, y1, x2, y2)
    return _visibility_pure(x1, y1, x2, y2)


def visibility_edges(words: Sequence[WordBox]) -> list[tuple[int, int]]:
    """Undirected visibility edges between word boxes, indices into `words`."""
    n = len(words)
    if n <= 1:
        return []
    x1 = np.fromiter((w.x1 for w in words), dtype=np.float64, count=n)
    y1 = np.fromiter((w.y1 for w in words), dtype=np.float64, count=n)
    x2 = np.fromiter((w.x2 for w in words), dtype=np.float64, count=n)
    y2 = np.fromiter((w.y2 for w in words), dtype=np.float64, count=n)
    return visibility_pairs(x1, y1, x2, y2)
