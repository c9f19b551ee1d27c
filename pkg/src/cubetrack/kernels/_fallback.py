"""Pure numpy/scipy implementations of the hot per-pixel kernels.

Mirrors the arithmetic of the compiled extension (`_core.pyx`) so either
backend produces the same results; selected by ``cubetrack.kernels`` when
the extension is unavailable or when ``CUBETRACK_KERNELS=numpy`` is set.

Coordinate convention: continuous image coords (u, v) put the center of
pixel (row i, col j) at (j + 0.5, i + 0.5); bilinear sampling happens in
pixel-index space (u - 0.5, v - 0.5) with edge clamping.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


def box_mean(img: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 neighborhood, clipped at image borders."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    S = np.zeros((h + 1, w + 1), dtype=np.float64)
    S[1:, 1:] = img.cumsum(0).cumsum(1)
    r = int(radius)
    ys0 = np.maximum(np.arange(h) - r, 0)
    ys1 = np.minimum(np.arange(h) + r, h - 1)
    xs0 = np.maximum(np.arange(w) - r, 0)
    xs1 = np.minimum(np.arange(w) + r, w - 1)
    sums = (
        S[np.ix_(ys1 + 1, xs1 + 1)]
        - S[np.ix_(ys0, xs1 + 1)]
        - S[np.ix_(ys1 + 1, xs0)]
        + S[np.ix_(ys0, xs0)]
    )
    counts = np.outer(ys1 - ys0 + 1, xs1 - xs0 + 1).astype(np.float64)
    return sums / counts


def _sample_grid(src: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sample at pixel-index coords, clamped to the image."""
    h, w = src.shape
    x = np.clip(x, 0.0, float(w - 1))
    y = np.clip(y, 0.0, float(h - 1))
    x0 = np.minimum(x.astype(np.int64), max(w - 2, 0))
    y0 = np.minimum(y.astype(np.int64), max(h - 2, 0))
    wx = x - x0
    wy = y - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    a = src[y0, x0]
    b = src[y0, x1]
    c = src[y1, x0]
    d = src[y1, x1]
    return (a * (1 - wx) + b * wx) * (1 - wy) + (c * (1 - wx) + d * wx) * wy


def warp_bilinear(src: np.ndarray, H: np.ndarray, out_h: int, out_w: int, fill: float = 0.0) -> np.ndarray:
    """Sample ``src`` through homography H (output centers -> source centers)."""
    src = np.ascontiguousarray(src, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    h, w = src.shape
    jj, ii = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    u = jj + 0.5
    v = ii + 0.5
    d = H[2, 0] * u + H[2, 1] * v + H[2, 2]
    bad = np.abs(d) < 1e-12
    d = np.where(bad, 1.0, d)
    us = (H[0, 0] * u + H[0, 1] * v + H[0, 2]) / d
    vs = (H[1, 0] * u + H[1, 1] * v + H[1, 2]) / d
    x = us - 0.5
    y = vs - 0.5
    valid = (~bad) & (x >= 0.0) & (x <= w - 1.0) & (y >= 0.0) & (y <= h - 1.0)
    out = np.full((out_h, out_w), float(fill), dtype=np.float64)
    out[valid] = _sample_grid(src, x[valid], y[valid])
    return out


def warp_into(
    dst: np.ndarray,
    src: np.ndarray,
    H: np.ndarray,
    r0: int,
    r1: int,
    c0: int,
    c1: int,
    lo_u: float,
    hi_u: float,
    lo_v: float,
    hi_v: float,
) -> None:
    """Overwrite dst pixels (rows r0:r1, cols c0:c1) whose H-mapped source
    coords land inside [lo_u,hi_u]x[lo_v,hi_v]; sampling is edge-clamped.
    """
    src = np.ascontiguousarray(src, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    h, w = dst.shape
    r0 = max(int(r0), 0)
    c0 = max(int(c0), 0)
    r1 = min(int(r1), h)
    c1 = min(int(c1), w)
    if r1 <= r0 or c1 <= c0:
        return
    jj, ii = np.meshgrid(np.arange(c0, c1, dtype=np.float64), np.arange(r0, r1, dtype=np.float64))
    u = jj + 0.5
    v = ii + 0.5
    d = H[2, 0] * u + H[2, 1] * v + H[2, 2]
    bad = np.abs(d) < 1e-12
    d = np.where(bad, 1.0, d)
    us = (H[0, 0] * u + H[0, 1] * v + H[0, 2]) / d
    vs = (H[1, 0] * u + H[1, 1] * v + H[1, 2]) / d
    inside = (~bad) & (us >= lo_u) & (us <= hi_u) & (vs >= lo_v) & (vs <= hi_v)
    vals = _sample_grid(src, us[inside] - 0.5, vs[inside] - 0.5)
    block = dst[r0:r1, c0:c1]
    block[inside] = vals


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected component labels (raster order, starting at 1)."""
    labels, n = ndimage.label(np.asarray(mask) != 0, structure=_CROSS)
    return labels.astype(np.int32), int(n)


def refine_corners(
    img: np.ndarray,
    pts: np.ndarray,
    win: int = 4,
    max_iter: int = 10,
    tol: float = 1e-3,
    max_move: float = 3.0,
) -> np.ndarray:
    """Gradient-weighted corner relocation in a (2*win+1)^2 window.

    Points are pixel-center coords. Each iteration solves
    sum(g g^T) c = sum(g g^T p) over window samples p with bilinear
    gradients g; flat windows leave the point unchanged and total movement
    is capped at ``max_move``.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    out = pts.copy()
    offs = np.arange(-win, win + 1, dtype=np.float64)
    du, dv = np.meshgrid(offs, offs)
    for idx in range(len(out)):
        ox, oy = pts[idx]
        cx, cy = ox, oy
        for _ in range(max_iter):
            pu = cx + du
            pv = cy + dv
            gx = 0.5 * (_sample_grid(img, pu + 1 - 0.5, pv - 0.5) - _sample_grid(img, pu - 1 - 0.5, pv - 0.5))
            gy = 0.5 * (_sample_grid(img, pu - 0.5, pv + 1 - 0.5) - _sample_grid(img, pu - 0.5, pv - 1 - 0.5))
            a = np.sum(gx * gx)
            b = np.sum(gx * gy)
            c = np.sum(gy * gy)
            det = a * c - b * b
            if det < 1e-12:
                break
            bx = np.sum(gx * gx * pu + gx * gy * pv)
            by = np.sum(gx * gy * pu + gy * gy * pv)
            nx = (c * bx - b * by) / det
            ny = (a * by - b * bx) / det
            mx = nx - ox
            my = ny - oy
            move = np.hypot(mx, my)
            clipped = move > max_move
            if clipped:
                nx = ox + mx * max_move / move
                ny = oy + my * max_move / move
            step = np.hypot(nx - cx, ny - cy)
            cx, cy = nx, ny
            if clipped or step < tol:
                break
        out[idx, 0] = cx
        out[idx, 1] = cy
    return out
