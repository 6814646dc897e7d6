"""Toy training of the three stage networks on synthetic face scenes.

Window labels by IoU with the planted face: positive >= 0.65, part in
[0.4, 0.65), negative < 0.3; the band in between is unused. Stage 1 learns
from every stride-2 window of every pyramid level; stages 2 and 3 learn from
the candidates the earlier stages produce (hard negatives) plus jittered
copies of the true box.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..data.synthetic import make_face_scene
from ..gabor import FilterBank, Preset, make_bank
from ..models import prepare_inputs
from ..nn import TrainConfig, detection_loss, sigmoid, train
from ..nn.losses import NEG, PART, POS
from .boxes import BBox, iou_many, reg_for_target
from .detector import CascadeConfig, _mode, propose, refine, refine_boxes, stage_net
from .pyramid import crop_resize, pyramid

log = logging.getLogger(__name__)

POS_IOU, PART_IOU, NEG_IOU = 0.65, 0.4, 0.3


def label_kinds(ious: np.ndarray) -> np.ndarray:
    """POS / PART / NEG per IoU, -1 for the unused band."""
    kinds = np.full(ious.shape, -1, dtype=np.int64)
    kinds[ious >= POS_IOU] = POS
    kinds[(ious >= PART_IOU) & (ious < POS_IOU)] = PART
    kinds[ious < NEG_IOU] = NEG
    return kinds


@dataclass
class StageData:
    x: np.ndarray
    kinds: np.ndarray
    regs: np.ndarray

    @property
    def targets(self) -> np.ndarray:
        return np.concatenate([self.kinds[:, None].astype(np.float64), self.regs], axis=1)

    def counts(self) -> dict:
        return {name: int(np.sum(self.kinds == k)) for name, k in (("pos", POS), ("part", PART), ("neg", NEG))}


def _balance(kinds, rng, neg_ratio: float):
    """Indices keeping all pos/part samples and at most neg_ratio * (#pos) negatives."""
    keep = np.flatnonzero(kinds >= 0)
    pos = keep[kinds[keep] != NEG]
    neg = keep[kinds[keep] == NEG]
    n_neg = min(len(neg), int(neg_ratio * max(np.sum(kinds == POS), 1)))
    return np.sort(np.concatenate([pos, rng.choice(neg, n_neg, replace=False)]))


def pnet_windows(image, gt, bank, cfg: CascadeConfig, mode: str = "gt"):
    """Every stride-2 12x12 tensor window of every level with its kind and offsets."""
    win, st = cfg.windows[0], cfg.stride
    xs, kinds, regs = [], [], []
    for scale, level in pyramid(image, cfg.factor, cfg.min_size, win):
        t = prepare_inputs(level[None], mode, bank)[0]
        w = sliding_window_view(t, (win, win), axis=(0, 1))[::st, ::st]  # (h', w', C, win, win)
        nr, nc = w.shape[:2]
        r, c = np.mgrid[0:nr, 0:nc]
        boxes = np.stack([st * c.ravel() / scale, st * r.ravel() / scale,
                          np.full(r.size, win / scale), np.full(r.size, win / scale)], axis=1)
        k = label_kinds(iou_many(boxes, gt))
        sel = np.flatnonzero(k >= 0)
        xs.append(w.reshape(nr * nc, *w.shape[2:])[sel].transpose(0, 2, 3, 1))
        kinds.append(k[sel])
        regs.append(np.array([reg_for_target(b, gt) for b in boxes[sel]]).reshape(-1, 4))
    return np.concatenate(xs), np.concatenate(kinds), np.concatenate(regs)


def jitter_boxes(gt, rng, n: int, spread: float = 0.25):
    """Squares around ``gt`` with random shift and size change (relative to its side)."""
    x, y, w, h = gt
    s = rng.uniform(1 - spread, 1 + spread, n) * w
    cx = x + w / 2 + rng.uniform(-spread, spread, n) * w
    cy = y + h / 2 + rng.uniform(-spread, spread, n) * h
    return [BBox(a - b / 2, c - b / 2, b, b) for a, c, b in zip(cx, cy, s)]


def crop_samples(image, gt, boxes, bank, size: int, mode: str = "gt"):
    if not boxes:
        return None
    arr = np.array([b.as_tuple() for b in boxes])
    k = label_kinds(iou_many(arr, gt))
    sel = np.flatnonzero(k >= 0)
    if not sel.size:
        return None
    crops = np.stack([crop_resize(image, boxes[i], size) for i in sel])
    regs = np.array([reg_for_target(boxes[i], gt) for i in sel])
    return prepare_inputs(crops, mode, bank), k[sel], regs


@dataclass
class CascadeTrainConfig:
    n_scenes: int = 200
    scene_size: int = 64
    face_range: tuple = (14, 30)
    seed: int = 0
    neg_ratio: float = 3.0
    jitter_per_scene: int = 6
    random_negs_per_scene: int = 4
    epochs: tuple = (12, 12, 12)
    batch: int = 64
    lr: float = 0.01
    fused: bool = True
    candidate_threshold: tuple = (0.3, 0.3)  # stage-1 / stage-2 thresholds when mining candidates
    detect: CascadeConfig = field(default_factory=CascadeConfig)


def _split(data: StageData, rng, frac=0.1):
    idx = rng.permutation(len(data.kinds))
    nv = max(1, int(frac * len(idx)))
    v, t = np.sort(idx[:nv]), np.sort(idx[nv:])
    return (StageData(data.x[t], data.kinds[t], data.regs[t]), StageData(data.x[v], data.kinds[v], data.regs[v]))


def detection_accuracy(net, x, y) -> float:
    """Face/non-face accuracy over positive and negative samples."""
    kinds = y[:, 0].astype(np.int64)
    m = kinds != PART
    if not m.any():
        return float("nan")
    out = net.predict(x[m]).reshape(int(m.sum()), -1)
    return float(np.mean((sigmoid(out[:, 0]) >= 0.5) == (kinds[m] == POS)))


def _fit(net, data: StageData, cfg: CascadeTrainConfig, stage: int, rng):
    tr, va = _split(data, rng)
    tc = TrainConfig(epochs=cfg.epochs[stage], batch=cfg.batch, lr=cfg.lr, seed=cfg.seed + 101 * stage)

    def loss(out, y):
        v, g = detection_loss(out.reshape(len(out), -1), y[:, 0].astype(np.int64), y[:, 1:])
        return v, g.reshape(out.shape)

    _, hist = train(net, tr.x, tr.targets, loss, tc, val=(va.x, va.targets), metric=detection_accuracy)
    return hist


def make_scenes(n: int, seed: int, size: int = 64, face_range=(14, 30)):
    rng = np.random.default_rng(seed)
    return [make_face_scene(size, rng, face_range) for _ in range(n)]


def train_cascade(cfg: CascadeTrainConfig | None = None, bank: FilterBank | None = None):
    """Train P, R and O nets in sequence; returns ``(nets, report)``."""
    cfg = cfg or CascadeTrainConfig()
    bank = bank or make_bank(Preset.DETECTION)
    dcfg = cfg.detect
    mode = "gt" if cfg.fused else "image"
    rng = np.random.default_rng([cfg.seed, 7])
    scenes = make_scenes(cfg.n_scenes, cfg.seed, cfg.scene_size, cfg.face_range)
    report = {}

    xs, ks, rs = [], [], []
    for img, gt in scenes:
        x, k, r = pnet_windows(img, gt, bank, dcfg, mode)
        keep = _balance(k, rng, cfg.neg_ratio)
        xs.append(x[keep]); ks.append(k[keep]); rs.append(r[keep])
    data = StageData(np.concatenate(xs), np.concatenate(ks), np.concatenate(rs))
    del xs
    pnet = stage_net(0, cfg.fused, len(bank), seed=cfg.seed)
    report["pnet"] = {"samples": data.counts(), "history": _fit(pnet, data, cfg, 0, rng)}

    nets = [pnet]
    for stage in (1, 2):
        size = dcfg.windows[stage]
        xs, ks, rs = [], [], []
        for img, gt in scenes:
            boxes = refine_boxes(propose(img, pnet, bank, dcfg, cfg.candidate_threshold[0]))
            if stage == 2:
                dets = refine(img, boxes, nets[1], bank, dcfg.windows[1], cfg.candidate_threshold[1], dcfg.nms_iou[1])
                boxes = refine_boxes(dets)
            boxes = boxes + jitter_boxes(gt, rng, cfg.jitter_per_scene)
            S = cfg.scene_size
            for _ in range(cfg.random_negs_per_scene):
                s = float(rng.uniform(12, S / 2))
                boxes.append(BBox(float(rng.uniform(0, S - s)), float(rng.uniform(0, S - s)), s, s))
            got = crop_samples(img, gt, boxes, bank, size, mode)
            if got is not None:
                xs.append(got[0]); ks.append(got[1]); rs.append(got[2])
        data = StageData(np.concatenate(xs), np.concatenate(ks), np.concatenate(rs))
        net = stage_net(stage, cfg.fused, len(bank), seed=cfg.seed + stage)
        report[("rnet", "onet")[stage - 1]] = {"samples": data.counts(), "history": _fit(net, data, cfg, stage, rng)}
        nets.append(net)
    return nets, report


def stage_input_mode(net) -> str:
    return _mode(net)
