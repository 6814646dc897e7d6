"""Same-size 2D correlation of single-channel images with kernels and banks.

Correlation convention: ``out[r, c] = sum_ij k[i, j] * padded[r + i, c + j]``,
no kernel flip. Images may carry leading batch axes; the last two axes are
(height, width).
"""

from __future__ import annotations

import numpy as np

from .gabor import FilterBank, Kernel

BORDERS = ("zero", "replicate")


def _kernel_array(kernel) -> np.ndarray:
    k = kernel.values if isinstance(kernel, Kernel) else np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise ValueError(f"kernel must be 2D, got shape {k.shape}")
    if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ValueError(f"kernel sides must be odd, got {k.shape}")
    return k


def _check_image(image) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim < 2 or img.shape[-1] == 0 or img.shape[-2] == 0:
        raise ValueError(f"empty or non-2D image, shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite pixels")
    return img


def pad(image: np.ndarray, ph: int, pw: int, border: str) -> np.ndarray:
    if border not in BORDERS:
        raise ValueError(f"border must be one of {BORDERS}, got {border!r}")
    widths = [(0, 0)] * (image.ndim - 2) + [(ph, ph), (pw, pw)]
    return np.pad(image, widths, mode="constant" if border == "zero" else "edge")


def convolve2d(image, kernel, border: str = "replicate") -> np.ndarray:
    img = _check_image(image)
    k = _kernel_array(kernel)
    kh, kw = k.shape
    H, W = img.shape[-2:]
    ph, pw = kh // 2, kw // 2
    if kh > H + 2 * ph or kw > W + 2 * pw:
        raise ValueError("kernel larger than padded image")
    p = pad(img, ph, pw, border)
    out = np.zeros(img.shape, dtype=np.float64)
    # accumulation order (i, j) matches the naive per-pixel loop
    for i in range(kh):
        for j in range(kw):
            out += k[i, j] * p[..., i:i + H, j:j + W]
    return out


def apply_bank(image, bank: FilterBank, border: str = "replicate") -> np.ndarray:
    """Responses stacked on a trailing channel axis, in bank order: (..., H, W, Nf)."""
    img = _check_image(image)
    if len(bank) == 0:
        return np.zeros(img.shape + (0,))
    return np.stack([convolve2d(img, k, border) for k in bank.kernels], axis=-1)
