# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled visibility-edge kernel. Mirrors tabgraph.visibility._visibility_pure."""

from libc.stdlib cimport free, malloc


cdef inline double dmax(double a, double b) nogil:
    return a if a > b else b


cdef inline double dmin(double a, double b) nogil:
    return a if a < b else b


cdef Py_ssize_t _scan_positive_x(double* ax1, double* ay1, double* ax2, double* ay2,
                                 Py_ssize_t n, Py_ssize_t u) nogil:
    """Nearest +x candidate of u with perpendicular overlap and a clear corridor."""
    cdef Py_ssize_t v, w, best = -1
    cdef double gap, best_gap = 0.0, ov
    cdef double cx1, cx2, oy1, oy2

    for v in range(n):
        if v == u:
            continue
        if ax1[v] >= ax2[u]:
            ov = dmin(ay2[u], ay2[v]) - dmax(ay1[u], ay1[v])
            if ov > 0.0:
                gap = ax1[v] - ax2[u]
                if best < 0 or gap < best_gap:
                    best = v
                    best_gap = gap
    if best < 0:
        return -1

    cx1 = ax2[u]
    cx2 = ax1[best]
    oy1 = dmax(ay1[u], ay1[best])
    oy2 = dmin(ay2[u], ay2[best])
    for w in range(n):
        if w == u or w == best:
            continue
        if dmax(cx1, ax1[w]) < dmin(cx2, ax2[w]) and dmax(oy1, ay1[w]) < dmin(oy2, ay2[w]):
            return -1
    return best


def visibility_pairs(double[::1] x1, double[::1] y1, double[::1] x2, double[::1] y2):
    """Sorted, deduplicated undirected visibility edges as (i, j) tuples, i < j."""
    cdef Py_ssize_t n = x1.shape[0]
    if y1.shape[0] != n or x2.shape[0] != n or y2.shape[0] != n:
        raise ValueError("coordinate arrays must be equally sized")
    if n <= 1:
        return []

    # mirrored/swapped copies so all four directions reuse the +x scan
    cdef double* buf = <double*>malloc(4 * n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* mx1 = buf
    cdef double* mx2 = buf + n
    cdef double* my1 = buf + 2 * n
    cdef double* my2 = buf + 3 * n

    cdef Py_ssize_t i, u, v
    edges = set()
    try:
        with nogil:
            for i in range(n):
                mx1[i] = -x2[i]
                mx2[i] = -x1[i]
                my1[i] = -y2[i]
                my2[i] = -y1[i]
        for u in range(n):
            v = _scan_positive_x(&x1[0], &y1[0], &x2[0], &y2[0], n, u)   # right
            if v >= 0:
                edges.add((u, v) if u < v else (v, u))
            v = _scan_positive_x(mx1, &y1[0], mx2, &y2[0], n, u)         # left
            if v >= 0:
                edges.add((u, v) if u < v else (v, u))
            v = _scan_positive_x(&y1[0], &x1[0], &y2[0], &x2[0], n, u)   # down
            if v >= 0:
                edges.add((u, v) if u < v else (v, u))
            v = _scan_positive_x(my1, &x1[0], my2, &x2[0], n, u)         # up
            if v >= 0:
                edges.add((u, v) if u < v else (v, u))
    finally:
        free(buf)
    return sorted(edges)
