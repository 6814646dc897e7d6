from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .losses import LossKind, head_loss, softmax
from .optim import SGD

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 30
    batch: int = 32
    lr: float = 0.01
    momentum: float = 0.9
    decay_at: float = 2 / 3  # fraction of epochs after which lr is multiplied by `decay`
    decay: float = 0.1
    seed: int = 0

    def lr_at(self, epoch: int) -> float:
        return self.lr * (self.decay if epoch >= int(self.decay_at * self.epochs) else 1.0)


@dataclass
class EpochMetrics:
    epoch: int
    lr: float
    train_loss: float
    val_metric: float | None  # accuracy for classification, MAE for regression


def _check_labels(net, kind, y):
    out = int(np.prod(net.output_shape))
    if kind is LossKind.SOFTMAX_CE:
        if not np.issubdtype(np.asarray(y).dtype, np.integer):
            raise ValueError("classification loss needs integer labels")
        if y.min() < 0 or y.max() >= out:
            raise ValueError(f"labels outside [0, {out}) for a {out}-way head")
    elif kind in (LossKind.MAE, LossKind.MSE, LossKind.DET_CE):
        if not np.all(np.isfinite(np.asarray(y, dtype=np.float64))):
            raise ValueError("regression targets must be finite")


def evaluate(net, X, y, kind: LossKind, batch: int = 256) -> float:
    """Accuracy (classification, detection) or MAE (regression)."""
    out = net.predict(X, batch=batch)
    flat = out.reshape(len(out), -1)
    if kind is LossKind.SOFTMAX_CE:
        return float(np.mean(flat.argmax(axis=1) == np.asarray(y)))
    if kind in (LossKind.MAE, LossKind.MSE):
        return float(np.mean(np.abs(flat[:, 0] - np.asarray(y, dtype=np.float64))))
    if kind is LossKind.DET_CE:
        return float(np.mean((flat[:, 0] > 0) == (np.asarray(y) > 0.5)))
    raise ValueError(f"no metric for {kind!r}")


def train(net, X, y, loss, cfg: TrainConfig, val=None, metric=None):
    """Minibatch momentum SGD with a single step decay.

    ``loss`` is a :class:`LossKind` or a callable ``(out, y_batch) -> (value, grad)``.
    ``val`` is an optional ``(X_val, y_val)``; ``metric(net, X_val, y_val)``
    overrides the default accuracy/MAE. Returns ``(net, history)``; the
    network is updated in place.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = len(X)
    if n == 0:
        raise ValueError("empty dataset")
    if len(y) != n:
        raise ValueError(f"{n} inputs but {len(y)} labels")
    if isinstance(loss, LossKind):
        _check_labels(net, loss, y)
        kind = loss
        loss_fn = lambda out, yb: head_loss(kind, out, yb)  # noqa: E731
        if metric is None and val is not None:
            metric = lambda m, Xv, yv: evaluate(m, Xv, yv, kind)  # noqa: E731
    else:
        loss_fn = loss
    opt = SGD(cfg.lr, cfg.momentum)
    history = []
    for epoch in range(cfg.epochs):
        opt.lr = cfg.lr_at(epoch)
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        total = 0.0
        for s in range(0, n, cfg.batch):
            idx = order[s:s + cfg.batch]
            out, cache = net.forward(X[idx], train=True)
            v, g = loss_fn(out, y[idx])
            grads, _ = net.backward(cache, g)
            opt.step(net, grads)
            total += v * len(idx)
        vm = metric(net, *val) if (val is not None and metric is not None) else None
        history.append(EpochMetrics(epoch + 1, opt.lr, total / n, vm))
        log.info("epoch %d lr %.4g loss %.6f val %s", epoch + 1, opt.lr, total / n,
                 "-" if vm is None else f"{vm:.6f}")
    return net, history


def predict_proba(net, X) -> np.ndarray:
    out = net.predict(X)
    return softmax(out.reshape(len(out), -1))
