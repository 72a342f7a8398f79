"""Deterministic synthetic test images (unit range, float64).

``phantom``: piecewise-smooth head-like phantom with edges at many
orientations. ``texture``: photographic-style scene with smooth shading,
hard-edged objects and oriented gratings, built from a fixed-seed PCG64
stream.
"""

import numpy as np

from .sensing import rng_for
from .transforms import TransformKind, inverse, zero_coeffs

FIXTURES = ("phantom", "texture")


def _grid(n):
    c = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    return np.meshgrid(c, c, indexing="xy")


def _ellipse(x, y, cx, cy, a, b, theta):
    ct, st = np.cos(theta), np.sin(theta)
    u = (x - cx) * ct + (y - cy) * st
    v = -(x - cx) * st + (y - cy) * ct
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def phantom(n=256):
    x, y = _grid(n)
    img = np.zeros((n, n))
    img[_ellipse(x, y, 0.0, 0.0, 0.72, 0.92, 0.0)] = 0.8
    img[_ellipse(x, y, 0.0, -0.02, 0.66, 0.85, 0.0)] = 0.25
    # smooth intensity inside the skull
    inside = _ellipse(x, y, 0.0, -0.02, 0.66, 0.85, 0.0)
    img[inside] += 0.12 * (1 - y[inside]) * 0.5
    for cx, cy, a, b, th, v in [
        (0.22, 0.0, 0.11, 0.31, -0.31, 0.35),
        (-0.22, 0.0, 0.16, 0.41, 0.31, 0.30),
        (0.0, 0.35, 0.21, 0.25, 0.0, 0.20),
        (0.0, 0.1, 0.046, 0.046, 0.0, 0.25),
        (-0.08, -0.605, 0.046, 0.023, 0.0, 0.30),
        (0.06, -0.605, 0.023, 0.046, 0.0, 0.30),
        (0.35, -0.4, 0.15, 0.05, 0.7, 0.28),
        (-0.35, -0.35, 0.18, 0.04, -0.9, 0.22),
    ]:
        img[_ellipse(x, y, cx, cy, a, b, th)] += v
    return np.clip(img, 0.0, 1.0)


def texture(n=256, seed=20190529):
    x, y = _grid(n)
    rng = rng_for(seed, 9)
    # smooth shading
    img = 0.45 + 0.2 * x - 0.1 * y + 0.08 * np.sin(2.1 * x + 1.3 * y)
    # oriented grating patches
    for _ in range(6):
        cx, cy = rng.uniform(-0.7, 0.7, 2)
        theta = rng.uniform(0, np.pi)
        freq = rng.uniform(6.0, 18.0)
        radius = rng.uniform(0.15, 0.3)
        env = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * radius ** 2))
        img += 0.15 * env * np.sin(freq * np.pi * (x * np.cos(theta) + y * np.sin(theta)))
    # hard-edged objects at assorted orientations
    for _ in range(8):
        cx, cy = rng.uniform(-0.8, 0.8, 2)
        a, b = rng.uniform(0.05, 0.25, 2)
        theta = rng.uniform(0, np.pi)
        img[_ellipse(x, y, cx, cy, a, b, theta)] += rng.uniform(-0.25, 0.25)
    lo, hi = img.min(), img.max()
    return (img - lo) / (hi - lo)


def sparse_image(kind, n=256, k=50, levels=3, seed=0):
    """Image equal to the inverse transform of ``k`` nonzero detail coefficients.

    Positions are uniform over all detail coefficients (every tree, level
    and orientation); values are standard normal (complex subbands get a
    complex normal with unit variance per part). Returns ``(image, coeffs)``.
    """
    kind = TransformKind.parse(kind)
    coeffs = zero_coeffs(kind, (n, n), levels)
    rng = rng_for(seed, 7)
    sizes = np.array([sb.data.size for sb in coeffs.subbands])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    for flat in rng.choice(int(offsets[-1]), size=k, replace=False):
        s = int(np.searchsorted(offsets, flat, side="right") - 1)
        data = coeffs.subbands[s].data
        v = rng.standard_normal()
        if np.iscomplexobj(data):
            v = v + 1j * rng.standard_normal()
        data.flat[int(flat - offsets[s])] = v
    return inverse(coeffs), coeffs


def load_fixture(name, n=256):
    if name == "phantom":
        return phantom(n)
    if name == "texture":
        return texture(n)
    raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURES}")
