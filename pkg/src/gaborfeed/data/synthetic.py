"""Synthetic desk-scale datasets: oriented stripe patches and schematic-face scenes."""

from __future__ import annotations

import math

import numpy as np

from ..gabor import BANK_THETAS


def stripe_patch(size: int, theta: float, wavelength: float, phase: float = 0.0) -> np.ndarray:
    """cos(2 pi x' / wavelength + phase) on a size x size grid, x' = x cos(theta) + y sin(theta)."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    xr = x * math.cos(theta) + y * math.sin(theta)
    return np.cos(2 * math.pi * xr / wavelength + phase)


def make_synthetic_orientation_set(n: int, size: int = 24, noise: float = 0.5, seed: int = 0,
                                   wavelength: float = 2.5, patch: int | None = None,
                                   contrast: float = 0.5):
    """Stripe patches at one of the four bank orientations on a flat grey field plus noise.

    Each image holds a ``patch``-sided square (default ``size // 2``) of
    sinusoidal stripes at a random position and phase, amplitude
    ``contrast / 2`` around 0.5, then i.i.d. Gaussian noise of std ``noise``.
    Labels are the orientation index into (0, pi/4, pi/2, 3 pi/4), balanced
    to within one sample per class. Returns ``(images (n, size, size), labels (n,))``.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    patch = size // 2 if patch is None else patch
    if not 1 <= patch <= size:
        raise ValueError("patch must fit in the image")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % len(BANK_THETAS))
    images = np.full((n, size, size), 0.5)
    for i, lab in enumerate(labels):
        r, c = rng.integers(0, size - patch + 1, size=2)
        phase = rng.uniform(0, 2 * math.pi)
        images[i, r:r + patch, c:c + patch] += 0.5 * contrast * stripe_patch(patch, BANK_THETAS[lab], wavelength, phase)
    if noise > 0:
        images += rng.normal(0.0, noise, size=images.shape)
    return images, labels.astype(np.int64)


def _supersampled(size: int, draw, ss: int = 4) -> np.ndarray:
    """Evaluate ``draw(u, v)`` on an ss-times finer grid over [-1, 1]^2 and box-average down."""
    m = size * ss
    t = (np.arange(m) + 0.5) / m * 2 - 1
    v, u = np.meshgrid(t, t, indexing="ij")
    return draw(u, v).reshape(size, ss, size, ss).mean(axis=(1, 3))


def face_pattern(size: int, rng=None):
    """A schematic face: bright oval, two dark eyes, dark mouth bar.

    Returns ``(values, alpha)``; alpha is the oval's coverage so the pattern
    can be composited over a background. Mild random variation if ``rng`` given.
    """
    j = (lambda s: rng.uniform(-s, s)) if rng is not None else (lambda s: 0.0)
    skin = 0.78 + j(0.08)
    dark = 0.12 + j(0.06)
    ey, ex = -0.22 + j(0.05), 0.36 + j(0.04)
    my = 0.45 + j(0.05)

    def oval(u, v):
        return ((u / 0.82) ** 2 + (v / 0.98) ** 2 <= 1.0).astype(np.float64)

    def face(u, v):
        img = np.full(u.shape, skin)
        eyes = (((u - ex) / 0.2) ** 2 + ((v - ey) / 0.11) ** 2 <= 1) | (((u + ex) / 0.2) ** 2 + ((v - ey) / 0.11) ** 2 <= 1)
        mouth = (np.abs(u) <= 0.34) & (np.abs(v - my) <= 0.07)
        brow = (np.abs(np.abs(u) - ex) <= 0.2) & (np.abs(v - (ey - 0.22)) <= 0.04)
        img[eyes | mouth | brow] = dark
        return img

    return _supersampled(size, face), _supersampled(size, oval)


def _background(size: int, rng) -> np.ndarray:
    """Smooth low-frequency field plus fine noise, in roughly [0.2, 0.8]."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) / size
    img = np.full((size, size), rng.uniform(0.35, 0.65))
    for _ in range(3):
        fx, fy = rng.uniform(-2, 2, size=2)
        img += rng.uniform(0.02, 0.08) * np.cos(2 * math.pi * (fx * x + fy * y) + rng.uniform(0, 2 * math.pi))
    return img


def _distractor(img, rng, avoid):
    """Paint a featureless blob or stripe patch away from ``avoid`` (x, y, w, h)."""
    size = img.shape[0]
    for _ in range(20):
        s = int(rng.integers(8, max(9, size // 3)))
        r, c = (int(v) for v in rng.integers(0, size - s + 1, size=2))
        ax, ay, aw, ah = avoid
        if c + s <= ax or ax + aw <= c or r + s <= ay or ay + ah <= r:
            break
    else:
        return
    if rng.random() < 0.5:
        _, alpha = face_pattern(s)
        img[r:r + s, c:c + s] = alpha * rng.uniform(0.6, 0.9) + (1 - alpha) * img[r:r + s, c:c + s]
    else:
        th = rng.uniform(0, math.pi)
        img[r:r + s, c:c + s] += 0.15 * stripe_patch(s, th, rng.uniform(2.5, 6), rng.uniform(0, 6.3))


def make_face_scene(size: int = 64, seed=0, face_range=(14, 30), noise: float = 0.03,
                    distractors: int = 2):
    """One square scene with exactly one planted face; returns ``(image, (x, y, w, h))``.

    Distractors are blank ovals and stripe textures that do not overlap the face.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    img = _background(size, rng)
    s = int(rng.integers(face_range[0], face_range[1] + 1))
    x, y = (int(v) for v in rng.integers(0, size - s + 1, size=2))
    box = (float(x), float(y), float(s), float(s))
    for _ in range(distractors):
        _distractor(img, rng, box)
    vals, alpha = face_pattern(s, rng)
    img[y:y + s, x:x + s] = alpha * vals + (1 - alpha) * img[y:y + s, x:x + s]
    if noise > 0:
        img += rng.normal(0.0, noise, size=img.shape)
    return np.clip(img, 0.0, 1.0), box


def make_blank_scene(size: int = 64, seed=0, noise: float = 0.03):
    """Background only, no face and no distractors."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    img = _background(size, rng)
    if noise > 0:
        img += rng.normal(0.0, noise, size=img.shape)
    return np.clip(img, 0.0, 1.0)
