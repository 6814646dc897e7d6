"""Central finite-difference checks for every layer type, every loss and whole networks.

The error for one gradient array is ``||a - n|| / max(||a|| + ||n||, 1e-12)``
where ``a`` is analytic and ``n`` numerical.
"""

from __future__ import annotations

import numpy as np

from . import losses
from .layers import Conv2D, Dropout, FullyConnected, Fusion1x1, MaxPool, ReLU, conv_block
from .network import Network


def rel_error(a, n) -> float:
    a, n = np.ravel(a), np.ravel(n)
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))


def numerical_grad(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """d f / d x by central differences; ``x`` is perturbed in place and restored."""
    g = np.zeros_like(x)
    flat, gf = x.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + eps
        fp = f()
        flat[i] = old - eps
        fm = f()
        flat[i] = old
        gf[i] = (fp - fm) / (2 * eps)
    return g


def _separated(rng, shape, gap=1e-2):
    """Distinct values at least ``gap`` apart and away from zero, so max/ReLU kinks are not crossed."""
    n = int(np.prod(shape))
    vals = (np.arange(n) - n / 2 + 0.5) * gap
    return rng.permutation(vals).reshape(shape)


def check_layer(layer, in_shape, rng, batch: int = 2, eps: float = 1e-5) -> float:
    """Max error over the input gradient and every parameter gradient of one layer."""
    params = layer.init(in_shape, rng)
    for k in params:
        params[k] = rng.normal(size=params[k].shape)
    shape = (batch,) + tuple(in_shape)
    if isinstance(layer, (MaxPool, ReLU)):
        x = _separated(rng, shape)
    else:
        x = rng.normal(size=shape)
    R = rng.normal(size=(batch,) + tuple(layer.out_shape(in_shape)))
    mask_seed = int(rng.integers(1 << 31))

    def f():
        y, _ = layer.forward(params, x, train=True, rng=np.random.default_rng(mask_seed))
        return float(np.sum(y * R))

    y, cache = layer.forward(params, x, train=True, rng=np.random.default_rng(mask_seed))
    dx, grads = layer.backward(params, cache, R)
    errs = [rel_error(dx, numerical_grad(f, x, eps))]
    for k in params:
        errs.append(rel_error(grads[k], numerical_grad(f, params[k], eps)))
    return max(errs)


def check_loss(kind: str, rng, batch: int = 4, eps: float = 1e-6) -> float:
    if kind == "softmax_ce":
        n = int(rng.integers(2, 9))
        x = rng.normal(size=(batch, n)) * 3
        y = rng.integers(0, n, size=batch)
        fn = lambda: losses.softmax_ce(x, y)  # noqa: E731
    elif kind == "mae":
        x = rng.normal(size=batch) * 10
        y = x + rng.choice([-1, 1], size=batch) * rng.uniform(0.1, 5, size=batch)
        M = float(rng.uniform(1, 80))
        fn = lambda: losses.mae(x, y, M)  # noqa: E731
    elif kind == "mse":
        x, y = rng.normal(size=batch), rng.normal(size=batch)
        fn = lambda: losses.mse(x, y)  # noqa: E731
    elif kind == "det_ce":
        x = rng.uniform(0.05, 0.95, size=batch)
        y = rng.integers(0, 2, size=batch).astype(float)
        fn = lambda: losses.det_ce(x, y)  # noqa: E731
    elif kind == "det_ce_logits":
        x = rng.normal(size=batch) * 3
        y = rng.integers(0, 2, size=batch).astype(float)
        fn = lambda: losses.det_ce_logits(x, y)  # noqa: E731
    elif kind == "bbox_l2":
        x, y = rng.normal(size=(batch, 4)), rng.normal(size=(batch, 4))
        fn = lambda: losses.bbox_l2(x, y)  # noqa: E731
    elif kind == "detection":
        x = rng.normal(size=(batch * 2, 5))
        kinds = np.arange(batch * 2) % 3
        regs = rng.normal(size=(batch * 2, 4)) * 0.2
        fn = lambda: losses.detection_loss(x, kinds, regs)  # noqa: E731
    else:
        raise ValueError(f"unknown loss {kind!r}")
    _, g = fn()
    return rel_error(g, numerical_grad(lambda: fn()[0], x, eps))


def _pattern(net, cache) -> bytes:
    """The piecewise-linear region of a forward pass: every ReLU mask and pooling argmax."""
    parts = []
    for layer, c in zip(net.layers, cache["layers"]):
        if isinstance(layer, ReLU):
            parts.append(np.packbits(c).tobytes())
        elif isinstance(layer, MaxPool):
            parts.append(c[1].astype(np.int8).tobytes())
    return b"".join(parts)


def check_network(net: Network, x, y, kind: losses.LossKind, eps: float = 1e-4, min_eps: float = 1e-9) -> float:
    """Max error over all parameter gradients of ``net`` under a loss, dropout mask fixed.

    Central differences must not straddle a ReLU or max-pool kink, so each
    coordinate's step is halved (from ``eps`` down to ``min_eps``) until both
    probes sit in the same linear region as the base point.
    """
    step = net.step

    def f():
        net.step = step
        out, cache = net.forward(x, train=True)
        return losses.head_loss(kind, out, y)[0], _pattern(net, cache)

    net.step = step
    out, cache = net.forward(x, train=True)
    base = _pattern(net, cache)
    _, g = losses.head_loss(kind, out, y)
    grads, _ = net.backward(cache, g)
    errs = []
    for p, gp in zip(net.params, grads):
        for k in p:
            arr = p[k]
            num = np.zeros_like(arr)
            for i in np.ndindex(arr.shape):
                old, h = arr[i], eps
                while True:
                    arr[i] = old + h
                    fp, pp = f()
                    arr[i] = old - h
                    fm, pm = f()
                    arr[i] = old
                    if (pp == base and pm == base) or h / 2 < min_eps:
                        break
                    h /= 2
                num[i] = (fp - fm) / (2 * h)
            net.touch()
            errs.append(rel_error(gp[k], num))
    net.step = step
    return max(errs)


LOSS_KINDS = ("softmax_ce", "mae", "mse", "det_ce", "det_ce_logits", "bbox_l2", "detection")


def _random_layer(rng):
    """A random layer spec of each type paired with a compatible input shape."""
    H, W = int(rng.integers(4, 8)), int(rng.integers(4, 8))
    C = int(rng.integers(1, 4))
    yield "Conv2D", Conv2D(int(rng.integers(1, 4)), int(rng.choice([1, 3])), int(rng.integers(1, 3)),
                           int(rng.integers(0, 2))), (H, W, C)
    yield "ReLU", ReLU(), (H, W, C)
    yield "MaxPool", MaxPool(int(rng.integers(2, 4)), int(rng.integers(1, 3))), (H, W, C)
    yield "FullyConnected", FullyConnected(int(rng.integers(1, 5))), (H, W, C)
    yield "Dropout", Dropout(float(rng.uniform(0, 0.8))), (H, W, C)
    yield "Fusion1x1", Fusion1x1(), (H, W, int(rng.integers(2, 10)))


def small_network(rng, in_shape=(16, 16, 9), fusion: bool = False, n_out: int = 3, seed: int = 0):
    """Two conv blocks and one FC head, optionally preceded by a fusion layer."""
    layers = ([Fusion1x1()] if fusion else []) + conv_block(3) + conv_block(4) + [FullyConnected(n_out)]
    net = Network(layers, in_shape, seed=seed)
    for p in net.params:
        for k in p:
            p[k] = p[k] + 0.1 * rng.normal(size=p[k].shape)
    net.touch()
    return net


def run_suite(seed: int = 0, n_configs: int = 50, network_configs: int = 3):
    """All checks; returns ``{check name: max relative error}``."""
    rng = np.random.default_rng(seed)
    results: dict[str, float] = {}

    def put(name, err):
        results[name] = max(results.get(name, 0.0), err)

    for _ in range(n_configs):
        for name, layer, shape in _random_layer(rng):
            put(f"layer/{name}", check_layer(layer, shape, rng))
        for kind in LOSS_KINDS:
            put(f"loss/{kind}", check_loss(kind, rng))
    for i in range(network_configs):
        x = rng.normal(size=(2, 16, 16, 9))
        net = small_network(rng, seed=seed + i)
        put("network/softmax_ce", check_network(net, x, rng.integers(0, 3, size=2), losses.LossKind.SOFTMAX_CE))
        net = small_network(rng, fusion=True, seed=seed + i)
        put("network/fusion_softmax_ce", check_network(net, x, rng.integers(0, 3, size=2),
                                                       losses.LossKind.SOFTMAX_CE))
        net = small_network(rng, fusion=True, n_out=1, seed=seed + i)
        put("network/fusion_mse", check_network(net, x, rng.normal(size=2), losses.LossKind.MSE))
    return results
