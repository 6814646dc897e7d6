"""Desk-scale experiments: orientation classification by feeding mode, and the detection cascade."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .cascade import CascadeTrainConfig, detect, score, train_cascade
from .cascade.training import make_scenes
from .data import make_synthetic_orientation_set
from .gabor import Preset, make_bank
from .models import build_network, prepare_inputs
from .nn import LossKind, TrainConfig, train
from .nn.checkpoint import to_bytes


@dataclass
class OrientationConfig:
    n: int = 2000
    size: int = 24
    noise: float = 0.25
    contrast: float = 0.5
    wavelength: float = 2.5
    data_seed: int = 0
    n_train: int = 1600
    conv: tuple = (8, 16)
    fc: tuple = (32,)
    dropout: float = 0.5
    preset: str = "age"
    train: TrainConfig = field(default_factory=lambda: TrainConfig(epochs=30, batch=32, lr=0.01, momentum=0.9))


@dataclass
class RunResult:
    mode: str
    seed: int
    net: object
    history: list
    meta: dict

    @property
    def final(self) -> float:
        return self.history[-1].val_metric if self.history else float("nan")

    def checkpoint(self) -> bytes:
        return to_bytes(self.net, self.meta)


def orientation_data(cfg: OrientationConfig, mode: str):
    X, y = make_synthetic_orientation_set(cfg.n, cfg.size, cfg.noise, cfg.data_seed, cfg.wavelength,
                                          contrast=cfg.contrast)
    Xi = prepare_inputs(X, mode, make_bank(Preset.from_name(cfg.preset)))
    k = cfg.n_train
    return (Xi[:k], y[:k]), (Xi[k:], y[k:])


def run_orientation(mode: str, seed: int, cfg: OrientationConfig | None = None) -> RunResult:
    """Train one model in ``mode`` (image, gt, gf) with network/data-order seed ``seed``."""
    cfg = cfg or OrientationConfig()
    (Xt, yt), val = orientation_data(cfg, mode)
    net = build_network(mode, (cfg.size, cfg.size), 4, seed=seed, conv=cfg.conv, fc=cfg.fc, dropout=cfg.dropout)
    tc = TrainConfig(**{**asdict(cfg.train), "seed": seed})
    _, hist = train(net, Xt, yt, LossKind.SOFTMAX_CE, tc, val=val)
    meta = {"task": "orient", "input": mode, "seed": seed, "metric": "accuracy",
            "final_val": hist[-1].val_metric if hist else None,
            "config": {k: v for k, v in asdict(cfg).items() if k != "train"}, "train": asdict(tc)}
    return RunResult(mode, seed, net, hist, meta)


def run_cascade(seed: int = 0, n_test: int = 50, test_seed: int = 12345, cfg: CascadeTrainConfig | None = None):
    """Train the cascade and score it on ``n_test`` fresh one-face scenes.

    Returns ``(nets, report, detections per scene, DetectionScore)``.
    """
    cfg = cfg or CascadeTrainConfig(seed=seed)
    bank = make_bank(Preset.DETECTION)
    nets, report = train_cascade(cfg, bank)
    scenes = make_scenes(n_test, test_seed, cfg.scene_size, cfg.face_range)
    dets = [detect(img, nets, bank, cfg.detect) for img, _ in scenes]
    return nets, report, dets, score(dets, [[gt] for _, gt in scenes])


def summarize_orientation(results) -> list[str]:
    lines = []
    for r in results:
        lines.append(f"{r.mode:5s} seed {r.seed}  val_acc {r.final:.6f}  best {max(h.val_metric for h in r.history):.6f}")
    return lines


def mean_final(results, mode) -> float:
    return float(np.mean([r.final for r in results if r.mode == mode]))
