"""Bilinear resampling, crops and the multi-scale image pyramid.

Pixel centres sit at integer coordinates; an output pixel u of a map at scale
s samples the source at (u + 0.5) / s - 0.5, clamped to the image (edge
replication). Source-image box coordinates are edge coordinates, so a level
window at (c, r, n, n) covers the source box (c / s, r / s, n / s, n / s).
"""

from __future__ import annotations

import numpy as np

from .boxes import BBox


def _axis_weights(coords: np.ndarray, n: int):
    c = np.clip(coords, 0.0, n - 1.0)
    i0 = np.floor(c).astype(np.int64)
    i1 = np.minimum(i0 + 1, n - 1)
    return i0, i1, c - i0


def sample_bilinear(image: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Separable bilinear sampling on the grid ys x xs (source pixel coordinates)."""
    H, W = image.shape
    r0, r1, fr = _axis_weights(np.asarray(ys, dtype=np.float64), H)
    c0, c1, fc = _axis_weights(np.asarray(xs, dtype=np.float64), W)
    rows = image[r0] * (1 - fr)[:, None] + image[r1] * fr[:, None]
    return rows[:, c0] * (1 - fc) + rows[:, c1] * fc


def resize_scale(image, scale: float, out_shape=None) -> np.ndarray:
    """Resample by a nominal scale; the output size defaults to round(side * scale)."""
    image = np.asarray(image, dtype=np.float64)
    H, W = image.shape
    oh, ow = out_shape or (int(round(H * scale)), int(round(W * scale)))
    if oh < 1 or ow < 1:
        raise ValueError("degenerate output size")
    ys = (np.arange(oh) + 0.5) / scale - 0.5
    xs = (np.arange(ow) + 0.5) / scale - 0.5
    return sample_bilinear(image, ys, xs)


def crop_resize(image, box: BBox, out: int) -> np.ndarray:
    """Bilinear crop of ``box`` to an out x out patch; parts outside the image replicate the edge."""
    image = np.asarray(image, dtype=np.float64)
    u = np.arange(out) + 0.5
    xs = box.x + u * box.w / out - 0.5
    ys = box.y + u * box.h / out - 0.5
    return sample_bilinear(image, ys, xs)


def pyramid(image, factor: float, min_size: float = 12, window: int = 12) -> list[tuple[float, np.ndarray]]:
    """Levels at scales (window / min_size) * factor^k while the shorter side is >= window.

    A face of side ``min_size`` fills one window at the first level.
    """
    if not 0.0 < factor < 1.0:
        raise ValueError(f"scale factor must be in (0, 1), got {factor}")
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0:
        raise ValueError("degenerate image")
    H, W = image.shape
    levels = []
    scale = window / min_size
    while True:
        h, w = int(round(H * scale)), int(round(W * scale))
        if min(h, w) < window:
            break
        levels.append((scale, image.copy() if scale == 1.0 else resize_scale(image, scale, (h, w))))
        scale *= factor
    return levels


def resize_to(image, shape) -> np.ndarray:
    """Bilinear resample to an exact (height, width), scaling each axis independently."""
    image = np.asarray(image, dtype=np.float64)
    H, W = image.shape
    oh, ow = shape
    if oh < 1 or ow < 1:
        raise ValueError("degenerate output size")
    ys = (np.arange(oh) + 0.5) * (H / oh) - 0.5
    xs = (np.arange(ow) + 0.5) * (W / ow) - 0.5
    return sample_bilinear(image, ys, xs)
