"""Input preparation for the three feeding modes and the classifier/regressor builders.

Modes:
  image  the plain image, 1 channel
  gt     image stacked with its Nf bank responses, Nf + 1 channels into the first conv
  gf     the same tensor through a learned Fusion1x1 layer, then the image network body
"""

from __future__ import annotations

import numpy as np

from . import fusion
from .convolve import apply_bank
from .gabor import FilterBank
from .nn import Conv2D, FullyConnected, Fusion1x1, Network, conv_block, fc_block

INPUT_MODES = ("image", "gt", "gf")

# Desk-scale defaults for 64x64 face crops.
DEFAULT_CONV = (16, 32, 64)
DEFAULT_FC = (128, 64)


# Images in [0, 1] are shifted by this before filtering so flat grey maps to zero.
INPUT_CENTER = 0.5


def prepare_inputs(images, mode: str, bank: FilterBank | None = None, border: str = "replicate") -> np.ndarray:
    """(B, H, W) images in [0, 1] to network input (B, H, W, C) for ``mode``."""
    images = np.asarray(images, dtype=np.float64) - INPUT_CENTER
    if mode not in INPUT_MODES:
        raise ValueError(f"input mode must be one of {INPUT_MODES}, got {mode!r}")
    if mode == "image":
        return images[..., None]
    if bank is None:
        raise ValueError(f"mode {mode!r} needs a filter bank")
    return fusion.stack(images, apply_bank(images, bank, border))


def body_layers(n_out: int, conv=DEFAULT_CONV, fc=DEFAULT_FC, dropout: float = 0.5, kernel: int = 3) -> list:
    layers = []
    for c in conv:
        layers += conv_block(c, kernel, pad=kernel // 2)
    for d in fc:
        layers += fc_block(d, dropout)
    return layers + [FullyConnected(n_out)]


def build_network(mode: str, input_hw, n_out: int, nf: int = 8, seed: int = 0, conv=DEFAULT_CONV,
                  fc=DEFAULT_FC, dropout: float = 0.5, fusion_trainable: bool = True) -> Network:
    """Classifier (n_out logits) or regressor (n_out = 1) for the given feeding mode."""
    H, W = input_hw
    channels = 1 if mode == "image" else nf + 1
    head = [Fusion1x1(trainable=fusion_trainable)] if mode == "gf" else []
    return Network(head + body_layers(n_out, conv, fc, dropout), (H, W, channels), seed=seed)


def gt_equivalent(gf_net: Network) -> Network:
    """A tensor-input network computing the same function as ``gf_net``.

    The fusion layer becomes a 1x1 Conv2D with one output channel and zero bias;
    every downstream parameter is copied.
    """
    if not isinstance(gf_net.layers[0], Fusion1x1):
        raise ValueError("expected a network whose first layer is Fusion1x1")
    layers = [Conv2D(1, 1, 1, 0)] + gf_net.layers[1:]
    net = Network(layers, gf_net.input_shape, seed=gf_net.seed)
    w = gf_net.params[0]["w"]
    net.params[0] = {"W": w.reshape(1, 1, -1, 1).copy(), "b": np.zeros(1)}
    net.params[1:] = [{k: v.copy() for k, v in p.items()} for p in gf_net.params[1:]]
    net.touch()
    return net
