"""Detection scoring in the FDDB style: a discrete (count-based) and a continuous (overlap-based) score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import BBox, iou


@dataclass
class DetectionScore:
    n_truth: int
    true_positives: int
    false_positives: int
    continuous: float  # summed IoU of matched pairs divided by the number of true faces

    @property
    def recall(self) -> float:
        return self.true_positives / self.n_truth if self.n_truth else float("nan")

    def lines(self) -> list[str]:
        return [f"faces {self.n_truth}", f"true_positives {self.true_positives}",
                f"false_positives {self.false_positives}", f"discrete_recall {self.recall:.6f}",
                f"continuous {self.continuous:.6f}"]


def match(dets, truths, iou_thresh: float = 0.5):
    """Greedy one-to-one matching in detection score order; returns [(det index, truth index, iou)]."""
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    used, pairs = set(), []
    for i in order:
        best, bj = iou_thresh, None
        for j, t in enumerate(truths):
            if j in used:
                continue
            v = iou(dets[i].box, t)
            if v >= best:
                best, bj = v, j
        if bj is not None:
            used.add(bj)
            pairs.append((i, bj, best))
    return pairs


def score(dets_per_image, truths_per_image, iou_thresh: float = 0.5) -> DetectionScore:
    n_truth = tp = fp = 0
    cont = 0.0
    for dets, truths in zip(dets_per_image, truths_per_image):
        truths = [t if isinstance(t, BBox) else BBox(*t) for t in truths]
        pairs = match(dets, truths, iou_thresh)
        n_truth += len(truths)
        tp += len(pairs)
        fp += len(dets) - len(pairs)
        cont += sum(v for _, _, v in pairs)
    return DetectionScore(n_truth, tp, fp, cont / n_truth if n_truth else float("nan"))
