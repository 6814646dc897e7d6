"""Layer specs with their forward and backward passes.

Activations are channel-last with a leading batch axis: (B, H, W, C) for maps,
(B, D) for vectors. Each spec is a frozen dataclass (so it serializes with
``dataclasses.asdict``); parameters live in a plain dict owned by the network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .. import fusion


def _he_uniform(rng, shape, fan_in):
    lim = math.sqrt(6.0 / fan_in)
    return rng.uniform(-lim, lim, size=shape)


def _spatial(in_shape, name):
    if len(in_shape) != 3:
        raise ValueError(f"{name} expects an (H, W, C) input, got {tuple(in_shape)}")
    return in_shape


@dataclass(frozen=True)
class Conv2D:
    out_channels: int
    kernel_size: int = 3
    stride: int = 1
    pad: int = 0

    frozen = False

    def out_shape(self, in_shape):
        H, W, _ = _spatial(in_shape, "Conv2D")
        k, s, p = self.kernel_size, self.stride, self.pad
        Ho, Wo = (H + 2 * p - k) // s + 1, (W + 2 * p - k) // s + 1
        if Ho < 1 or Wo < 1:
            raise ValueError(f"Conv2D kernel {k} does not fit input {tuple(in_shape)}")
        return (Ho, Wo, self.out_channels)

    def init(self, in_shape, rng):
        C = in_shape[2]
        k = self.kernel_size
        return {"W": _he_uniform(rng, (k, k, C, self.out_channels), k * k * C),
                "b": np.zeros(self.out_channels)}

    def forward(self, params, x, train=False, rng=None):
        B, H, W, C = x.shape
        k, s, p = self.kernel_size, self.stride, self.pad
        Ho, Wo, O = self.out_shape(x.shape[1:])
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::s, ::s][:, :Ho, :Wo]
        cols = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 5, 3)).reshape(B * Ho * Wo, k * k * C)
        y = cols @ params["W"].reshape(k * k * C, O) + params["b"]
        return y.reshape(B, Ho, Wo, O), (x.shape, cols)

    def backward(self, params, cache, dy):
        (B, H, W, C), cols = cache
        k, s, p = self.kernel_size, self.stride, self.pad
        _, Ho, Wo, O = dy.shape
        Wm = params["W"].reshape(k * k * C, O)
        d2 = dy.reshape(-1, O)
        grads = {"W": (cols.T @ d2).reshape(params["W"].shape), "b": d2.sum(axis=0)}
        dcols = (d2 @ Wm.T).reshape(B, Ho, Wo, k, k, C)
        dxp = np.zeros((B, H + 2 * p, W + 2 * p, C))
        for i in range(k):
            for j in range(k):
                dxp[:, i:i + s * (Ho - 1) + 1:s, j:j + s * (Wo - 1) + 1:s, :] += dcols[:, :, :, i, j, :]
        return dxp[:, p:p + H, p:p + W, :], grads


@dataclass(frozen=True)
class ReLU:
    frozen = False

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def init(self, in_shape, rng):
        return {}

    def forward(self, params, x, train=False, rng=None):
        mask = x > 0
        return x * mask, mask

    def backward(self, params, mask, dy):
        return dy * mask, {}


@dataclass(frozen=True)
class MaxPool:
    size: int = 2
    stride: int = 2

    frozen = False

    def out_shape(self, in_shape):
        H, W, C = _spatial(in_shape, "MaxPool")
        Ho, Wo = (H - self.size) // self.stride + 1, (W - self.size) // self.stride + 1
        if Ho < 1 or Wo < 1:
            raise ValueError(f"MaxPool window {self.size} does not fit input {tuple(in_shape)}")
        return (Ho, Wo, C)

    def init(self, in_shape, rng):
        return {}

    def forward(self, params, x, train=False, rng=None):
        B = x.shape[0]
        Ho, Wo, C = self.out_shape(x.shape[1:])
        s, st = self.size, self.stride
        win = sliding_window_view(x, (s, s), axis=(1, 2))[:, ::st, ::st][:, :Ho, :Wo]
        win = win.reshape(B, Ho, Wo, C, s * s)
        idx = win.argmax(axis=-1)
        y = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
        return y, (x.shape, idx)

    def backward(self, params, cache, dy):
        shape, idx = cache
        _, Ho, Wo, _ = dy.shape
        s, st = self.size, self.stride
        dx = np.zeros(shape)
        for q in range(s * s):
            i, j = divmod(q, s)
            dx[:, i:i + st * (Ho - 1) + 1:st, j:j + st * (Wo - 1) + 1:st, :] += dy * (idx == q)
        return dx, {}


@dataclass(frozen=True)
class FullyConnected:
    out_dim: int

    frozen = False

    def out_shape(self, in_shape):
        return (self.out_dim,)

    def init(self, in_shape, rng):
        D = int(np.prod(in_shape))
        return {"W": _he_uniform(rng, (D, self.out_dim), D), "b": np.zeros(self.out_dim)}

    def forward(self, params, x, train=False, rng=None):
        xf = x.reshape(x.shape[0], -1)
        return xf @ params["W"] + params["b"], (x.shape, xf)

    def backward(self, params, cache, dy):
        shape, xf = cache
        grads = {"W": xf.T @ dy, "b": dy.sum(axis=0)}
        return (dy @ params["W"].T).reshape(shape), grads


@dataclass(frozen=True)
class Dropout:
    """Inverted dropout: kept units are scaled by 1/(1 - rate) in training, identity at eval."""

    rate: float = 0.5

    frozen = False

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {self.rate}")

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def init(self, in_shape, rng):
        return {}

    def forward(self, params, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            return x, None
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * mask, mask

    def backward(self, params, mask, dy):
        return (dy if mask is None else dy * mask), {}


@dataclass(frozen=True)
class Fusion1x1:
    """Weighted sum of all input channels into one: the learned fusion layer."""

    trainable: bool = True

    @property
    def frozen(self):
        return not self.trainable

    def out_shape(self, in_shape):
        H, W, _ = _spatial(in_shape, "Fusion1x1")
        return (H, W, 1)

    def init(self, in_shape, rng):
        C = in_shape[2]
        return {"w": fusion.FusionWeights.initial(C - 1).as_array()}

    def forward(self, params, x, train=False, rng=None):
        return fusion.fuse(x, params["w"])[..., None], x

    def backward(self, params, x, dy):
        gw, gx = fusion.fuse_backward(x, params["w"], dy[..., 0])
        return gx, {"w": gw.as_array()}


LAYER_TYPES = {cls.__name__: cls for cls in (Conv2D, ReLU, MaxPool, FullyConnected, Dropout, Fusion1x1)}


def conv_block(out_channels: int, kernel_size: int = 3, pad: int = 1, pool: int = 2) -> list:
    """Convolution, ReLU, max pooling."""
    return [Conv2D(out_channels, kernel_size, 1, pad), ReLU(), MaxPool(pool, pool)]


def fc_block(out_dim: int, rate: float = 0.5) -> list:
    """Fully connected, ReLU, dropout."""
    return [FullyConnected(out_dim), ReLU(), Dropout(rate)]
