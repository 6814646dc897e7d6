"""Boxes, overlap, greedy NMS and the linear box calibration used by every stage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.w, self.h)):
            raise ValueError("box coordinates must be finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extents must be positive, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

    def square(self) -> "BBox":
        """Square box with side max(w, h), same centre."""
        s = max(self.w, self.h)
        return BBox(self.x + (self.w - s) / 2, self.y + (self.h - s) / 2, s, s)

    def scaled(self, k: float) -> "BBox":
        return BBox(self.x * k, self.y * k, self.w * k, self.h * k)


@dataclass(frozen=True)
class Detection:
    box: BBox
    score: float
    reg: tuple = (0.0, 0.0, 0.0, 0.0)  # (dx, dy, dw, dh) as fractions of the box size

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        object.__setattr__(self, "reg", tuple(float(v) for v in self.reg))


def iou(a: BBox, b: BBox) -> float:
    iw = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    ih = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # (x + w) - x can round above w, so clamp into [0, 1]
    return min(inter / (a.area + b.area - inter), 1.0)


def iou_many(boxes: np.ndarray, b) -> np.ndarray:
    """IoU of each row (x, y, w, h) of ``boxes`` against one box."""
    bx, by, bw, bh = b.as_tuple() if isinstance(b, BBox) else b
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(boxes[:, 0] + boxes[:, 2], bx + bw) - np.maximum(boxes[:, 0], bx)
    ih = np.minimum(boxes[:, 1] + boxes[:, 3], by + bh) - np.maximum(boxes[:, 1], by)
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    return np.minimum(inter / (boxes[:, 2] * boxes[:, 3] + bw * bh - inter), 1.0)


def order_key(d: Detection):
    """Score descending, then x, then y ascending."""
    return (-d.score, d.box.x, d.box.y)


def nms(dets, iou_thresh: float) -> list[Detection]:
    """Greedy suppression: keep the best remaining detection, drop those overlapping it by more than ``iou_thresh``."""
    remaining = sorted(dets, key=order_key)
    kept = []
    while remaining:
        best = remaining.pop(0)
        kept.append(best)
        remaining = [d for d in remaining if iou(best.box, d.box) <= iou_thresh]
    return kept


def calibrate(det: Detection) -> BBox | None:
    """Apply the regression offsets: x + dx w, y + dy h, w (1 + dw), h (1 + dh).

    Returns None when the calibrated extent is not positive.
    """
    b = det.box
    dx, dy, dw, dh = det.reg
    w, h = b.w * (1.0 + dw), b.h * (1.0 + dh)
    if not (w > 0 and h > 0):
        return None
    return BBox(b.x + dx * b.w, b.y + dy * b.h, w, h)


def reg_for_target(box, target) -> np.ndarray:
    """Offsets that :func:`calibrate` maps ``box`` onto ``target``."""
    x, y, w, h = box.as_tuple() if isinstance(box, BBox) else box
    tx, ty, tw, th = target.as_tuple() if isinstance(target, BBox) else target
    return np.array([(tx - x) / w, (ty - y) / h, tw / w - 1.0, th / h - 1.0])
