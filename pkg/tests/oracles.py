"""Independent slow reference implementations used by the tests."""

import math

import numpy as np


def naive_correlate(image, kernel, border="zero"):
    H, W = image.shape
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    out = np.zeros((H, W))
    for r in range(H):
        for c in range(W):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    y, x = r + i - ph, c + j - pw
                    if border == "replicate":
                        y, x = min(max(y, 0), H - 1), min(max(x, 0), W - 1)
                    elif not (0 <= y < H and 0 <= x < W):
                        continue
                    acc += image[y, x] * kernel[i, j]
            out[r, c] = acc
    return out


def loop_fuse(t, w):
    H, W, C = t.shape
    out = np.zeros((H, W))
    for r in range(H):
        for c in range(W):
            out[r, c] = sum(w[k] * t[r, c, k] for k in range(C))
    return out


def conv1x1(t, w):
    """1x1 convolution with a single output channel, written as a matrix product."""
    H, W, C = t.shape
    return (t.reshape(H * W, C) @ np.asarray(w).reshape(C, 1)).reshape(H, W)


def box_iou(a, b):
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter) if inter > 0 else 0.0


def reference_nms(items, thresh):
    """items: list of ((x, y, w, h), score). Returns kept indices.

    Processes candidates in (score desc, x, y) order; a candidate is kept iff it
    overlaps no already-kept box by more than ``thresh``.
    """
    order = sorted(range(len(items)), key=lambda i: (-items[i][1], items[i][0][0], items[i][0][1]))
    kept = []
    for i in order:
        if all(box_iou(items[i][0], items[k][0]) <= thresh for k in kept):
            kept.append(i)
    return kept


def check_greedy_assignment(items, kept, thresh):
    """Exhaustive check of a kept set against the greedy definition."""
    order = sorted(range(len(items)), key=lambda i: (-items[i][1], items[i][0][0], items[i][0][1]))
    rank = {i: r for r, i in enumerate(order)}
    kept_set = set(kept)
    for i in range(len(items)):
        blockers = [k for k in kept_set if rank[k] < rank[i] and box_iou(items[i][0], items[k][0]) > thresh]
        if (i in kept_set) == bool(blockers):
            return False
    return True


def bilinear_at(image, y, x):
    H, W = image.shape
    y = min(max(y, 0.0), H - 1.0)
    x = min(max(x, 0.0), W - 1.0)
    y0, x0 = int(math.floor(y)), int(math.floor(x))
    y1, x1 = min(y0 + 1, H - 1), min(x0 + 1, W - 1)
    fy, fx = y - y0, x - x0
    return ((1 - fy) * (1 - fx) * image[y0, x0] + (1 - fy) * fx * image[y0, x1]
            + fy * (1 - fx) * image[y1, x0] + fy * fx * image[y1, x1])
