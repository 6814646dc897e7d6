"""Tensor input (image + responses) and its weighted fusion into one image.

Fusing with weights [w_i, w_1..w_Nf] is a 1x1 convolution over the
(Nf + 1)-channel tensor with no bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FusionWeights:
    w_i: float
    w_k: np.ndarray

    def __post_init__(self):
        self.w_i = float(self.w_i)
        self.w_k = np.asarray(self.w_k, dtype=np.float64).reshape(-1)
        if not (np.isfinite(self.w_i) and np.all(np.isfinite(self.w_k))):
            raise ValueError("fusion weights must be finite")

    @property
    def nf(self) -> int:
        return self.w_k.size

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.w_i], self.w_k])

    @classmethod
    def from_array(cls, w) -> "FusionWeights":
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        if w.size < 1:
            raise ValueError("need at least the image weight")
        return cls(w[0], w[1:])

    @classmethod
    def initial(cls, nf: int) -> "FusionWeights":
        """Image weight 1, each response 1/nf."""
        return cls(1.0, np.full(nf, 1.0 / nf) if nf else np.zeros(0))


def stack(image, responses=None) -> np.ndarray:
    """Channel 0 is the image, channels 1..Nf the responses: (..., H, W, Nf + 1)."""
    image = np.asarray(image, dtype=np.float64)
    if responses is None:
        return image[..., None].copy()
    responses = np.asarray(responses, dtype=np.float64)
    if responses.shape[:-1] != image.shape:
        raise ValueError(f"response stack {responses.shape} does not match image {image.shape}")
    return np.concatenate([image[..., None], responses], axis=-1)


def _weights(w, channels: int) -> np.ndarray:
    arr = w.as_array() if isinstance(w, FusionWeights) else np.asarray(w, dtype=np.float64).reshape(-1)
    if arr.size != channels:
        raise ValueError(f"{arr.size} fusion weights for a {channels}-channel tensor")
    return arr


def fuse(t, w) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    arr = _weights(w, t.shape[-1])
    out = arr[0] * t[..., 0]
    for k in range(1, arr.size):
        out = out + arr[k] * t[..., k]
    return out


def fuse_backward(t, w, grad_out) -> tuple[FusionWeights, np.ndarray]:
    """Gradients of a scalar objective w.r.t. the weights and the tensor.

    Leading batch axes are summed into the weight gradient.
    """
    t = np.asarray(t, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    arr = _weights(w, t.shape[-1])
    if grad_out.shape != t.shape[:-1]:
        raise ValueError(f"grad_out shape {grad_out.shape} != {t.shape[:-1]}")
    gw = np.array([np.sum(grad_out * t[..., k]) for k in range(arr.size)])
    gt = grad_out[..., None] * arr
    return FusionWeights.from_array(gw), gt
