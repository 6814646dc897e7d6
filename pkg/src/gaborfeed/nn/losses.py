"""Losses as ``(value, gradient w.r.t. the prediction)`` pairs, averaged over the batch."""

from __future__ import annotations

import enum

import numpy as np

DET_EPS = 1e-12


def _finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError(f"{name}: non-finite input")


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax_ce(logits, labels, n_classes: int | None = None):
    """Mean of -log softmax(logits)[label] over the batch."""
    z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(labels))
    _finite("softmax_ce", z)
    B, N = z.shape
    if n_classes is not None and n_classes != N:
        raise ValueError(f"logits have {N} classes, expected {n_classes}")
    if N < 2:
        raise ValueError("softmax_ce needs at least 2 classes")
    if y.shape != (B,) or not np.issubdtype(y.dtype, np.integer) or y.min() < 0 or y.max() >= N:
        raise ValueError("labels must be integer class indices in range, one per sample")
    shifted = z - z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=1))
    logp = shifted[np.arange(B), y] - logsum
    grad = softmax(z)
    grad[np.arange(B), y] -= 1.0
    return float(-logp.mean()), (grad / B).reshape(np.shape(logits))


def mae(pred, target, M: float | None = None):
    """(1/M) * sum |pred - target|; M defaults to the batch size. Subgradient 0 at 0."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64).reshape(p.shape)
    _finite("mae", p, t)
    M = p.size if M is None else M
    if M <= 0:
        raise ValueError("normalizer M must be positive")
    d = p - t
    return float(np.abs(d).sum() / M), np.sign(d) / M


def mse(pred, target, M: float | None = None):
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64).reshape(p.shape)
    _finite("mse", p, t)
    M = p.size if M is None else M
    if M <= 0:
        raise ValueError("normalizer M must be positive")
    d = p - t
    return float((d * d).sum() / M), 2.0 * d / M


def det_ce(p, y, eps: float = DET_EPS):
    """Binary cross-entropy on probabilities clamped to [eps, 1 - eps]; batch mean."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(p.shape)
    _finite("det_ce", p, y)
    pc = np.clip(p, eps, 1.0 - eps)
    n = max(p.size, 1)
    loss = -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc))
    inside = (p >= eps) & (p <= 1.0 - eps)
    grad = np.where(inside, (-y / pc + (1.0 - y) / (1.0 - pc)) / n, 0.0)
    return float(loss.sum() / n), grad


def det_ce_logits(z, y):
    """det_ce(sigmoid(z), y) computed stably from logits."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(z.shape)
    _finite("det_ce_logits", z, y)
    n = max(z.size, 1)
    loss = np.logaddexp(0.0, z) - y * z
    return float(loss.sum() / n), (sigmoid(z) - y) / n


def bbox_l2(pred, target):
    """Squared Euclidean distance per 4-vector, averaged over the batch."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64).reshape(p.shape)
    _finite("bbox_l2", p, t)
    if p.shape[-1] != 4:
        raise ValueError("bbox vectors must have 4 components")
    n = max(p.size // 4, 1)
    d = p - t
    return float((d * d).sum() / n), 2.0 * d / n


# Detection sample kinds: classification uses POS/NEG, regression uses POS/PART.
NEG, POS, PART = 0, 1, 2


def detection_loss(out, kinds, regs, bbox_weight: float = 0.5):
    """det_ce on the logit column plus bbox_weight * bbox_l2 on the 4 offset columns.

    ``out`` is (B, 5): [face logit, dx, dy, dw, dh].
    """
    out = np.asarray(out, dtype=np.float64).reshape(len(out), -1)
    kinds = np.asarray(kinds)
    grad = np.zeros_like(out)
    total = 0.0
    cls = kinds != PART
    if cls.any():
        v, g = det_ce_logits(out[cls, 0], (kinds[cls] == POS).astype(np.float64))
        total += v
        grad[cls, 0] = g
    box = kinds != NEG
    if box.any():
        v, g = bbox_l2(out[box, 1:5], np.asarray(regs)[box])
        total += bbox_weight * v
        grad[box, 1:5] = bbox_weight * g
    return total, grad


class LossKind(enum.Enum):
    SOFTMAX_CE = "softmax_ce"
    MAE = "mae"
    MSE = "mse"
    DET_CE = "det_ce"
    BBOX_L2 = "bbox_l2"

    @property
    def is_classification(self) -> bool:
        return self is LossKind.SOFTMAX_CE


def head_loss(kind: LossKind, out, y):
    """Evaluate a loss against a network output batch; returns (value, d value / d out)."""
    out = np.asarray(out, dtype=np.float64)
    flat = out.reshape(len(out), -1)
    if kind is LossKind.SOFTMAX_CE:
        v, g = softmax_ce(flat, y)
    elif kind is LossKind.MAE:
        v, g = mae(flat[:, 0], y)
        g = np.concatenate([g[:, None], np.zeros((len(flat), flat.shape[1] - 1))], axis=1)
    elif kind is LossKind.MSE:
        v, g = mse(flat[:, 0], y)
        g = np.concatenate([g[:, None], np.zeros((len(flat), flat.shape[1] - 1))], axis=1)
    elif kind is LossKind.DET_CE:
        v, g0 = det_ce_logits(flat[:, 0], y)
        g = np.zeros_like(flat)
        g[:, 0] = g0
    elif kind is LossKind.BBOX_L2:
        v, g4 = bbox_l2(flat[:, :4], y)
        g = np.zeros_like(flat)
        g[:, :4] = g4
    else:
        raise ValueError(f"unknown loss {kind!r}")
    return v, g.reshape(out.shape)
