"""Minimal trainable CNN core in numpy (float64)."""

from .layers import (Conv2D, Dropout, FullyConnected, Fusion1x1, MaxPool, ReLU, conv_block,
                     fc_block)
from .losses import (LossKind, bbox_l2, det_ce, det_ce_logits, detection_loss, mae, mse, sigmoid,
                     softmax, softmax_ce)
from .network import Network
from .optim import SGD, sgd_step
from .training import EpochMetrics, TrainConfig, evaluate, train

__all__ = [
    "Conv2D", "Dropout", "FullyConnected", "Fusion1x1", "MaxPool", "ReLU", "conv_block", "fc_block",
    "LossKind", "bbox_l2", "det_ce", "det_ce_logits", "detection_loss", "mae", "mse", "sigmoid",
    "softmax", "softmax_ce", "Network", "SGD", "sgd_step", "EpochMetrics", "TrainConfig",
    "evaluate", "train",
]
