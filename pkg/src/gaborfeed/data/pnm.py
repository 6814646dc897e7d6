"""PGM/PPM (P2, P3, P5, P6) reading and P5/P6 writing.

Images come back as float64 grayscale in [0, 1]; colour is reduced with
luma 0.299 R + 0.587 G + 0.114 B.
"""

from __future__ import annotations

import numpy as np

from .._io import atomic_write

LUMA = np.array([0.299, 0.587, 0.114])


class PNMError(ValueError):
    pass


def _header(data: bytes, ntokens: int):
    """Read ``ntokens`` whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last token.
    """
    tokens, i, n = [], 0, len(data)
    while len(tokens) < ntokens:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise PNMError("truncated header")
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    if i >= n or not data[i:i + 1].isspace():
        raise PNMError("truncated header")
    return tokens, i + 1


def decode(data: bytes) -> np.ndarray:
    """Raw samples as an integer array (H, W) or (H, W, 3), plus maxval."""
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise PNMError(f"unsupported magic {magic!r}")
    tokens, off = _header(data, 4)
    try:
        w, h, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise PNMError("non-integer header field") from None
    if w <= 0 or h <= 0:
        raise PNMError(f"bad dimensions {w}x{h}")
    if not 1 <= maxval <= 65535:
        raise PNMError(f"unsupported maxval {maxval}")
    ch = 3 if magic in (b"P3", b"P6") else 1
    count = w * h * ch
    if magic in (b"P2", b"P3"):
        try:
            vals = np.array([int(t) for t in data[off:].split()[:count]], dtype=np.int64)
        except ValueError:
            raise PNMError("non-integer sample") from None
        if vals.size != count:
            raise PNMError("truncated payload")
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - off < need:
            raise PNMError("truncated payload")
        vals = np.frombuffer(data, dtype=dtype, count=count, offset=off).astype(np.int64)
    if vals.max(initial=0) > maxval:
        raise PNMError("sample exceeds maxval")
    shape = (h, w, 3) if ch == 3 else (h, w)
    return vals.reshape(shape), maxval


def to_gray(samples: np.ndarray, maxval: int) -> np.ndarray:
    x = samples.astype(np.float64) / maxval
    if x.ndim == 3:
        x = x @ LUMA
    return x


def load_image(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    return to_gray(*decode(data))


def quantize(image) -> np.ndarray:
    """[0, 1] floats to uint8 by rounding; values outside are clipped."""
    return np.clip(np.rint(np.asarray(image, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def encode(image) -> bytes:
    """P5 for (H, W), P6 for (H, W, 3); float input is taken as [0, 1]."""
    a = np.asarray(image)
    if a.dtype != np.uint8:
        a = quantize(a)
    if a.ndim == 2:
        magic = b"P5"
    elif a.ndim == 3 and a.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot encode array of shape {a.shape}")
    h, w = a.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode() + np.ascontiguousarray(a).tobytes()


def save_image(path, image):
    atomic_write(path, encode(image))


def minmax_scale(x) -> tuple[np.ndarray, float, float]:
    """Map to [0, 1] by the array's own range; returns (scaled, lo, hi). Constant input maps to 0."""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    if hi > lo:
        return (x - lo) / (hi - lo), lo, hi
    return np.zeros_like(x), lo, hi
