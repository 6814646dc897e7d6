from __future__ import annotations

import numpy as np


class SGD:
    """Momentum SGD: v <- momentum * v - lr * g;  w <- w + v.

    Parameters of frozen layers are left untouched.
    """

    def __init__(self, lr: float, momentum: float = 0.0):
        if lr < 0:
            raise ValueError("lr must be non-negative")
        if not 0.0 <= momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        self.lr = lr
        self.momentum = momentum
        self.velocity = None

    def step(self, net, grads):
        if self.velocity is None:
            self.velocity = [{k: np.zeros_like(v) for k, v in p.items()} for p in net.params]
        for layer, p, g, vel in zip(net.layers, net.params, grads, self.velocity):
            if layer.frozen:
                continue
            for k in p:
                vel[k] *= self.momentum
                vel[k] -= self.lr * g[k]
                p[k] += vel[k]
        net.touch()
        return net


def sgd_step(net, grads, lr: float, momentum: float = 0.0, state: SGD | None = None) -> SGD:
    """One update; pass the returned state back in to carry momentum across steps."""
    if state is None:
        state = SGD(lr, momentum)
    state.lr, state.momentum = lr, momentum
    state.step(net, grads)
    return state
