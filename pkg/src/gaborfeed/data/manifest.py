"""Samples, JSON-lines manifests and subject-exclusive fold plans."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .._io import atomic_write


@dataclass
class Sample:
    image: Any  # path to a PNM file, or an in-memory array
    label: Any  # class index, real-valued age, or a list of boxes
    subject_id: str

    def __post_init__(self):
        self.subject_id = str(self.subject_id)
        if not self.subject_id:
            raise ValueError("subject_id must be non-empty")


def read_manifest(path) -> list[Sample]:
    """One JSON object per line with keys path, subject, label; relative paths
    are resolved against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                p = rec["path"]
                out.append(Sample(p if os.path.isabs(p) else os.path.join(base, p), rec["label"], rec["subject"]))
            except (KeyError, json.JSONDecodeError, ValueError) as e:
                raise ValueError(f"{path}:{lineno}: bad manifest record ({e})") from None
    return out


def write_manifest(path, records):
    """``records`` are (path, subject, label) triples."""
    lines = [json.dumps({"path": p, "subject": s, "label": l}) for p, s, l in records]
    atomic_write(path, "\n".join(lines) + ("\n" if lines else ""))


@dataclass
class FoldPlan:
    k: int
    assignment: dict[str, int] = field(default_factory=dict)

    def fold_of(self, sample: Sample) -> int:
        return self.assignment[sample.subject_id]

    def split(self, samples, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, held-out indices) with ``fold`` held out."""
        folds = np.array([self.assignment[s.subject_id] for s in samples])
        return np.flatnonzero(folds != fold), np.flatnonzero(folds == fold)

    def subjects(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignment.items() if f == fold)


def split_folds(samples, k: int, seed: int = 0) -> FoldPlan:
    """Shuffle the distinct subjects with ``seed`` and deal them round-robin into k folds.

    Fold sizes (in subjects) differ by at most one; k equal to the number of
    subjects is leave-one-person-out.
    """
    subjects = sorted({s.subject_id for s in samples})
    if k < 2 and k != len(subjects):
        raise ValueError("need k >= 2 folds")
    if len(subjects) < k:
        raise ValueError(f"{len(subjects)} subjects cannot fill {k} folds")
    order = np.random.default_rng(seed).permutation(len(subjects))
    return FoldPlan(k, {subjects[j]: i % k for i, j in enumerate(order)})
