# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in ``_fallback``; same arithmetic, typed loops."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()


cdef inline double _clampd(double x, double lo, double hi) nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef inline double _bilinear(const double[:, ::1] src, double x, double y) nogil:
    # pixel-index coords, edge-clamped; matches _fallback._sample_grid
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef Py_ssize_t x0, y0, x1, y1
    cdef double wx, wy
    x = _clampd(x, 0.0, <double>(w - 1))
    y = _clampd(y, 0.0, <double>(h - 1))
    x0 = <Py_ssize_t>x
    y0 = <Py_ssize_t>y
    if x0 > w - 2:
        x0 = w - 2 if w > 1 else 0
    if y0 > h - 2:
        y0 = h - 2 if h > 1 else 0
    wx = x - <double>x0
    wy = y - <double>y0
    x1 = x0 + 1 if x0 + 1 < w else w - 1
    y1 = y0 + 1 if y0 + 1 < h else h - 1
    return (src[y0, x0] * (1.0 - wx) + src[y0, x1] * wx) * (1.0 - wy) + \
           (src[y1, x0] * (1.0 - wx) + src[y1, x1] * wx) * wy


def box_mean(img, int radius):
    """Mean over the (2r+1)^2 neighborhood, clipped at image borders."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(img, dtype=np.float64)
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.zeros((h + 1, w + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] av = a
    cdef double[:, ::1] Sv = S
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, y0, y1, x0, x1
    cdef double acc
    with nogil:
        # column-wise then row-wise cumulative sums (same order as numpy path)
        for i in range(h):
            for j in range(w):
                Sv[i + 1, j + 1] = Sv[i, j + 1] + av[i, j]
        for i in range(1, h + 1):
            acc = 0.0
            for j in range(1, w + 1):
                acc = acc + Sv[i, j]
                Sv[i, j] = acc
        for i in range(h):
            y0 = i - radius
            if y0 < 0:
                y0 = 0
            y1 = i + radius
            if y1 > h - 1:
                y1 = h - 1
            for j in range(w):
                x0 = j - radius
                if x0 < 0:
                    x0 = 0
                x1 = j + radius
                if x1 > w - 1:
                    x1 = w - 1
                ov[i, j] = (Sv[y1 + 1, x1 + 1] - Sv[y0, x1 + 1] - Sv[y1 + 1, x0] + Sv[y0, x0]) \
                    / (<double>((y1 - y0 + 1) * (x1 - x0 + 1)))
    return out


def warp_bilinear(src, H, int out_h, int out_w, double fill=0.0):
    """Sample ``src`` through homography H (output centers -> source centers)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(src, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Hm = np.ascontiguousarray(H, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.full((out_h, out_w), fill, dtype=np.float64)
    cdef double[:, ::1] av = a
    cdef double[:, ::1] hv = Hm
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t i, j
    cdef double u, v, d, us, vs, x, y
    with nogil:
        for i in range(out_h):
            v = <double>i + 0.5
            for j in range(out_w):
                u = <double>j + 0.5
                d = hv[2, 0] * u + hv[2, 1] * v + hv[2, 2]
                if d < 1e-12 and d > -1e-12:
                    continue
                us = (hv[0, 0] * u + hv[0, 1] * v + hv[0, 2]) / d
                vs = (hv[1, 0] * u + hv[1, 1] * v + hv[1, 2]) / d
                x = us - 0.5
                y = vs - 0.5
                if x >= 0.0 and x <= <double>(w - 1) and y >= 0.0 and y <= <double>(h - 1):
                    ov[i, j] = _bilinear(av, x, y)
    return out


def warp_into(dst, src, H, int r0, int r1, int c0, int c1,
              double lo_u, double hi_u, double lo_v, double hi_v):
    """In-place region warp; see the fallback docstring."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dd = dst
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(src, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Hm = np.ascontiguousarray(H, dtype=np.float64)
    cdef double[:, ::1] dv = dd
    cdef double[:, ::1] av = a
    cdef double[:, ::1] hv = Hm
    cdef Py_ssize_t h = dd.shape[0]
    cdef Py_ssize_t w = dd.shape[1]
    cdef Py_ssize_t i, j
    cdef double u, v, d, us, vs
    if r0 < 0:
        r0 = 0
    if c0 < 0:
        c0 = 0
    if r1 > <int>h:
        r1 = <int>h
    if c1 > <int>w:
        c1 = <int>w
    with nogil:
        for i in range(r0, r1):
            v = <double>i + 0.5
            for j in range(c0, c1):
                u = <double>j + 0.5
                d = hv[2, 0] * u + hv[2, 1] * v + hv[2, 2]
                if d < 1e-12 and d > -1e-12:
                    continue
                us = (hv[0, 0] * u + hv[0, 1] * v + hv[0, 2]) / d
                vs = (hv[1, 0] * u + hv[1, 1] * v + hv[1, 2]) / d
                if us >= lo_u and us <= hi_u and vs >= lo_v and vs <= hi_v:
                    dv[i, j] = _bilinear(av, us - 0.5, vs - 0.5)


def label_components(mask):
    """4-connected components labeled in raster order starting at 1."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(
        np.asarray(mask) != 0, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels = np.zeros((h, w), dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.empty(h * w, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] mv = m
    cdef cnp.int32_t[:, ::1] lv = labels
    cdef cnp.int64_t[::1] sv = stack
    cdef Py_ssize_t i, j, top, cur, ci, cj
    cdef cnp.int32_t n = 0
    with nogil:
        for i in range(h):
            for j in range(w):
                if mv[i, j] != 0 and lv[i, j] == 0:
                    n += 1
                    top = 0
                    sv[top] = i * w + j
                    lv[i, j] = n
                    while top >= 0:
                        cur = sv[top]
                        top -= 1
                        ci = cur // w
                        cj = cur - ci * w
                        if ci > 0 and mv[ci - 1, cj] != 0 and lv[ci - 1, cj] == 0:
                            lv[ci - 1, cj] = n
                            top += 1
                            sv[top] = cur - w
                        if ci < h - 1 and mv[ci + 1, cj] != 0 and lv[ci + 1, cj] == 0:
                            lv[ci + 1, cj] = n
                            top += 1
                            sv[top] = cur + w
                        if cj > 0 and mv[ci, cj - 1] != 0 and lv[ci, cj - 1] == 0:
                            lv[ci, cj - 1] = n
                            top += 1
                            sv[top] = cur - 1
                        if cj < w - 1 and mv[ci, cj + 1] != 0 and lv[ci, cj + 1] == 0:
                            lv[ci, cj + 1] = n
                            top += 1
                            sv[top] = cur + 1
    return labels, int(n)


def refine_corners(img, pts, int win=4, int max_iter=10, double tol=1e-3, double max_move=3.0):
    """Gradient-weighted corner relocation; see the fallback docstring."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(img, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.array(pts, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] av = a
    cdef double[:, ::1] pv = p
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t idx, it, di, dj
    cdef double ox, oy, cx, cy, pu, pv_, gx, gy
    cdef double sa, sb, sc, bx, by, det, nx, ny, mx, my, move, step
    cdef bint clipped
    with nogil:
        for idx in range(n):
            ox = pv[idx, 0]
            oy = pv[idx, 1]
            cx = ox
            cy = oy
            for it in range(max_iter):
                sa = 0.0
                sb = 0.0
                sc = 0.0
                bx = 0.0
                by = 0.0
                for di in range(-win, win + 1):
                    pv_ = cy + <double>di
                    for dj in range(-win, win + 1):
                        pu = cx + <double>dj
                        gx = 0.5 * (_bilinear(av, pu + 0.5, pv_ - 0.5) -
                                    _bilinear(av, pu - 1.5, pv_ - 0.5))
                        gy = 0.5 * (_bilinear(av, pu - 0.5, pv_ + 0.5) -
                                    _bilinear(av, pu - 0.5, pv_ - 1.5))
                        sa += gx * gx
                        sb += gx * gy
                        sc += gy * gy
                        bx += gx * gx * pu + gx * gy * pv_
                        by += gx * gy * pu + gy * gy * pv_
                det = sa * sc - sb * sb
                if det < 1e-12:
                    break
                nx = (sc * bx - sb * by) / det
                ny = (sa * by - sb * bx) / det
                mx = nx - ox
                my = ny - oy
                move = sqrt(mx * mx + my * my)
                clipped = move > max_move
                if clipped:
                    nx = ox + mx * max_move / move
                    ny = oy + my * max_move / move
                step = sqrt((nx - cx) * (nx - cx) + (ny - cy) * (ny - cy))
                cx = nx
                cy = ny
                if clipped or step < tol:
                    break
            pv[idx, 0] = cx
            pv[idx, 1] = cy
    return p
