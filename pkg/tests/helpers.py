"""Shared fixture builders: deterministic synthetic portraits."""

import numpy as np

from purikit.imgcore import ImageF


def _smooth(plane, passes=2):
    """Cheap separable 1-2-1 smoothing with edge replication."""
    for _ in range(passes):
        p = np.pad(plane, 1, mode="edge")
        plane = 0.25 * p[:-2, 1:-1] + 0.5 * p[1:-1, 1:-1] + 0.25 * p[2:, 1:-1]
        p = np.pad(plane, 1, mode="edge")
        plane = 0.25 * p[1:-1, :-2] + 0.5 * p[1:-1, 1:-1] + 0.25 * p[1:-1, 2:]
    return plane


def make_portrait(seed: int, size: int = 128) -> ImageF:
    """A smooth, compressible portrait-like test image.

    Centered skin-tone ellipse over a graded background, dark hair band,
    eyes and mouth, mild per-seed variation, light texture noise.
    """
    rng = np.random.default_rng(seed)
    h = w = size
    ys = (np.arange(h) + 0.5) / h
    xs = (np.arange(w) + 0.5) / w
    yy = ys[:, None] * np.ones((1, w))
    xx = np.ones((h, 1)) * xs[None, :]

    bg_hue = rng.uniform(0.0, 1.0)
    bg = 0.35 + 0.25 * yy + 0.08 * np.sin(2 * np.pi * (xx + bg_hue))
    r = bg * (0.8 + 0.2 * bg_hue)
    g = bg
    b = bg * (1.1 - 0.2 * bg_hue)

    cx = 0.5 + rng.uniform(-0.03, 0.03)
    cy = 0.52 + rng.uniform(-0.03, 0.03)
    rx, ry = 0.30, 0.40
    face = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    skin = 0.55 + rng.uniform(-0.05, 0.05)
    r = np.where(face, skin + 0.25, r)
    g = np.where(face, skin + 0.08, g)
    b = np.where(face, skin - 0.05, b)

    hair = (((xx - cx) / (rx * 1.15)) ** 2 + ((yy - (cy - 0.18)) / (ry * 0.8)) ** 2 <= 1.0) \
        & (yy < cy - 0.18)
    hair_tone = rng.uniform(0.1, 0.3)
    r = np.where(hair, hair_tone + 0.05, r)
    g = np.where(hair, hair_tone, g)
    b = np.where(hair, hair_tone - 0.02, b)

    for side in (-1.0, 1.0):
        eye = ((xx - (cx + side * 0.11)) / 0.045) ** 2 + ((yy - (cy - 0.08)) / 0.03) ** 2 <= 1.0
        r = np.where(eye, 0.15, r)
        g = np.where(eye, 0.12, g)
        b = np.where(eye, 0.12, b)
    mouth = ((xx - cx) / 0.09) ** 2 + ((yy - (cy + 0.17)) / 0.025) ** 2 <= 1.0
    r = np.where(mouth, 0.62, r)
    g = np.where(mouth, 0.25, g)
    b = np.where(mouth, 0.25, b)

    planes = []
    for p in (r, g, b):
        p = p + rng.normal(0.0, 0.012, p.shape)
        planes.append(_smooth(p, passes=2))
    return ImageF(np.clip(np.stack(planes), 0.0, 1.0))


def make_gray(seed: int, size: int = 64) -> ImageF:
    """Single-channel smooth fixture."""
    return ImageF(make_portrait(seed, size).data[:1].copy())
