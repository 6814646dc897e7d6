"""Three-stage cascade: proposal (12), refine (24), output (48), each fed fused Gabor input."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..gabor import FilterBank
from ..models import prepare_inputs
from ..nn import Conv2D, FullyConnected, Fusion1x1, MaxPool, Network, ReLU, sigmoid
from .boxes import BBox, Detection, calibrate, nms, order_key
from .pyramid import crop_resize, pyramid

log = logging.getLogger(__name__)


@dataclass
class CascadeConfig:
    thresholds: tuple = (0.6, 0.7, 0.8)
    nms_iou: tuple = (0.7, 0.7, 0.5)
    level_nms_iou: float = 0.5  # within one pyramid level, before the cross-level NMS
    factor: float = 0.709
    min_size: float = 12.0
    windows: tuple = (12, 24, 48)
    stride: int = 2  # of the proposal net's output map, in level pixels

    def __post_init__(self):
        if not 0.0 < self.factor < 1.0:
            raise ValueError("pyramid factor must be in (0, 1)")
        if any(not 0.0 <= t <= 1.0 for t in self.thresholds):
            raise ValueError("stage thresholds must be in [0, 1]")
        t1, t2, t3 = self.thresholds
        if not t1 <= t2 <= t3:
            log.warning("stage thresholds %s are not non-decreasing", self.thresholds)


def pnet_layers(fused: bool = True) -> list:
    """12x12 -> 1x1x5, fully convolutional with output stride 2."""
    head = [Fusion1x1()] if fused else []
    return head + [Conv2D(10, 3), ReLU(), MaxPool(2, 2), Conv2D(16, 3), ReLU(), Conv2D(32, 3), ReLU(),
                   Conv2D(5, 1)]


def rnet_layers(fused: bool = True) -> list:
    head = [Fusion1x1()] if fused else []
    return head + [Conv2D(16, 3), ReLU(), MaxPool(2, 2), Conv2D(32, 3), ReLU(), MaxPool(2, 2),
                   FullyConnected(64), ReLU(), FullyConnected(5)]


def onet_layers(fused: bool = True) -> list:
    head = [Fusion1x1()] if fused else []
    return head + [Conv2D(16, 3), ReLU(), MaxPool(2, 2), Conv2D(32, 3), ReLU(), MaxPool(2, 2),
                   Conv2D(32, 3), ReLU(), MaxPool(2, 2), FullyConnected(64), ReLU(), FullyConnected(5)]


def stage_net(stage: int, fused: bool = True, nf: int = 8, seed: int = 0) -> Network:
    layers = (pnet_layers, rnet_layers, onet_layers)[stage](fused)
    n = CascadeConfig.windows[stage]
    return Network(layers, (n, n, nf + 1 if fused else 1), seed=seed)


def _mode(net: Network) -> str:
    return "image" if net.input_shape[-1] == 1 else "gt"


def _check_nets(nets):
    if len(nets) != 3:
        raise ValueError("need three stage networks")
    for i, net in enumerate(nets):
        if net is None or not net.built:
            raise ValueError(f"stage {i + 1} network is not initialized")


def propose(image, pnet: Network, bank: FilterBank, cfg: CascadeConfig, threshold: float | None = None):
    """Stage 1 over the pyramid: thresholded windows mapped to source coordinates, after NMS (uncalibrated)."""
    t1 = cfg.thresholds[0] if threshold is None else threshold
    win = cfg.windows[0]
    dets = []
    for scale, level in pyramid(image, cfg.factor, cfg.min_size, win):
        x = prepare_inputs(level[None], _mode(pnet), bank)
        out = pnet.forward(x, strict=False)[0][0]
        prob = sigmoid(out[..., 0])
        rows, cols = np.nonzero(prob >= t1)
        level_dets = [Detection(BBox(cfg.stride * c / scale, cfg.stride * r / scale, win / scale, win / scale),
                                float(prob[r, c]), out[r, c, 1:5]) for r, c in zip(rows, cols)]
        dets += nms(level_dets, cfg.level_nms_iou)
    return nms(dets, cfg.nms_iou[0])


def _clip(box: BBox, H: int, W: int) -> BBox | None:
    x0, y0 = max(box.x, 0.0), max(box.y, 0.0)
    x1, y1 = min(box.x + box.w, float(W)), min(box.y + box.h, float(H))
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        return None
    return BBox(x0, y0, x1 - x0, y1 - y0)


def refine_boxes(dets) -> list[BBox]:
    """Calibrate and square each detection's box; detections with degenerate calibration are dropped."""
    out = []
    for d in dets:
        b = calibrate(d)
        if b is not None:
            out.append(b.square())
    return out


def score_boxes(image, boxes, net: Network, bank: FilterBank, size: int, batch: int = 256) -> np.ndarray:
    """Crop, resize, filter and run a refinement net; returns the (n, 5) raw outputs."""
    if not boxes:
        return np.zeros((0, 5))
    crops = np.stack([crop_resize(image, b, size) for b in boxes])
    x = prepare_inputs(crops, _mode(net), bank)
    return net.predict(x, batch=batch).reshape(len(boxes), -1)


def refine(image, boxes, net: Network, bank: FilterBank, size: int, threshold: float, nms_iou: float):
    out = score_boxes(image, boxes, net, bank, size)
    prob = sigmoid(out[:, 0]) if len(out) else np.zeros(0)
    dets = [Detection(b, float(p), o[1:5]) for b, p, o in zip(boxes, prob, out) if p >= threshold]
    return nms(dets, nms_iou)


def detect(image, nets, bank: FilterBank, cfg: CascadeConfig | None = None) -> list[Detection]:
    """Run all three stages; returns calibrated, image-clipped detections ordered by score, x, y."""
    cfg = cfg or CascadeConfig()
    _check_nets(nets)
    image = np.asarray(image, dtype=np.float64)
    H, W = image.shape
    if min(H, W) * cfg.windows[0] / cfg.min_size < cfg.windows[0]:
        return []
    pnet, rnet, onet = nets
    boxes = refine_boxes(propose(image, pnet, bank, cfg))
    dets = refine(image, boxes, rnet, bank, cfg.windows[1], cfg.thresholds[1], cfg.nms_iou[1])
    boxes = refine_boxes(dets)
    dets = refine(image, boxes, onet, bank, cfg.windows[2], cfg.thresholds[2], 1.0)
    final = []
    for d in dets:
        b = calibrate(d)
        b = _clip(b, H, W) if b is not None else None
        if b is not None:
            final.append(Detection(b, d.score, d.reg))
    return sorted(nms(final, cfg.nms_iou[2]), key=order_key)


def format_detections(dets) -> str:
    return "".join(f"{d.box.x:.6f} {d.box.y:.6f} {d.box.w:.6f} {d.box.h:.6f} {d.score:.6f}\n" for d in dets)


def parse_detections(text: str) -> list[Detection]:
    out = []
    for line in text.splitlines():
        if line.strip():
            x, y, w, h, s = map(float, line.split())
            out.append(Detection(BBox(x, y, w, h), s))
    return out
