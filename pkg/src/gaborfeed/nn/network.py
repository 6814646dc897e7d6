from __future__ import annotations

import numpy as np

from .layers import Conv2D, FullyConnected


class Network:
    """An ordered stack of layer specs with materialized parameters.

    Parameters are created by :meth:`build` from ``seed``. Training-mode
    forward passes draw dropout masks from ``default_rng([seed, step])`` and
    advance ``step``, so a run is reproducible from the seed and data order.
    """

    def __init__(self, layers, input_shape=None, seed: int = 0):
        self.layers = list(layers)
        self.seed = int(seed)
        self.step = 0
        self.version = 0
        self.input_shape = None
        self.shapes = None
        self.params = None
        if input_shape is not None:
            self.build(input_shape)

    @property
    def built(self) -> bool:
        return self.params is not None

    def build(self, input_shape):
        rng = np.random.default_rng(self.seed)
        shape = tuple(int(s) for s in input_shape)
        shapes, params = [shape], []
        for i, layer in enumerate(self.layers):
            try:
                params.append(layer.init(shape, rng))
                shape = tuple(layer.out_shape(shape))
            except ValueError as e:
                raise ValueError(f"layer {i} ({type(layer).__name__}): {e}") from None
            shapes.append(shape)
        self.input_shape = shapes[0]
        self.shapes = shapes
        self.params = params
        self.version += 1
        return self

    @property
    def output_shape(self):
        return self.shapes[-1]

    @property
    def fully_convolutional(self) -> bool:
        return not any(isinstance(l, FullyConnected) for l in self.layers)

    def n_params(self) -> int:
        return sum(v.size for p in self.params for v in p.values())

    def forward(self, x, train: bool = False, strict: bool = True):
        """Run the stack on a batch; returns (output, cache).

        With ``strict=False`` a fully-convolutional network accepts any spatial
        size, which is how a window classifier is slid over a whole image.
        """
        if not self.built:
            raise RuntimeError("network parameters are not initialized; call build()")
        x = np.asarray(x, dtype=np.float64)
        rng = None
        if train:
            rng = np.random.default_rng([self.seed, self.step])
            self.step += 1
        caches = []
        for i, (layer, p) in enumerate(zip(self.layers, self.params)):
            if strict and x.shape[1:] != self.shapes[i]:
                raise ValueError(f"layer {i} ({type(layer).__name__}): expected input "
                                 f"{self.shapes[i]}, got {x.shape[1:]}")
            try:
                x, c = layer.forward(p, x, train=train, rng=rng)
            except ValueError as e:
                raise ValueError(f"layer {i} ({type(layer).__name__}): {e}") from None
            caches.append(c)
        return x, {"net": id(self), "version": self.version, "layers": caches}

    def backward(self, cache, grad_out):
        """Reverse pass; returns (per-layer parameter gradient dicts, input gradient)."""
        if cache.get("net") != id(self) or cache.get("version") != self.version:
            raise ValueError("stale or foreign cache: parameters changed since the forward pass")
        grads = [None] * len(self.layers)
        g = np.asarray(grad_out, dtype=np.float64)
        for i in range(len(self.layers) - 1, -1, -1):
            g, grads[i] = self.layers[i].backward(self.params[i], cache["layers"][i], g)
        return grads, g

    def predict(self, x, batch: int = 256, strict: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        outs = [self.forward(x[i:i + batch], strict=strict)[0] for i in range(0, len(x), batch)]
        return np.concatenate(outs) if outs else np.zeros((0,) + tuple(self.output_shape))

    def touch(self):
        """Mark parameters as modified, invalidating outstanding caches."""
        self.version += 1

    def first_conv_index(self) -> int | None:
        for i, layer in enumerate(self.layers):
            if isinstance(layer, Conv2D):
                return i
        return None

    def copy(self) -> "Network":
        other = Network(self.layers, seed=self.seed)
        other.step = self.step
        if self.built:
            other.input_shape, other.shapes = self.input_shape, list(self.shapes)
            other.params = [{k: v.copy() for k, v in p.items()} for p in self.params]
            other.version = 1
        return other
