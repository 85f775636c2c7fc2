"""Deterministic synthetic test cases with known ground-truth masks."""

from __future__ import annotations

import numpy as np

from .errors import UnknownFixture
from .raster import GrayImage, Mask

FIXTURE_NAMES = ("disk", "distorted-disk", "cavity", "translating-stack")


def _grid(size: int):
    yy, xx = np.mgrid[0:size, 0:size]
    return xx + 0.5, yy + 0.5  # pixel centers


def _noisy(field: np.ndarray, noise: float, seed: int) -> np.ndarray:
    if noise > 0:
        rng = np.random.default_rng(seed)
        field = field + rng.normal(0.0, noise, field.shape)
    return np.clip(field, 0.0, 1.0)


def disk(size: int = 128, noise: float = 0.0, seed: int = 0,
         radius: float | None = None, center=None):
    """Bright disk on dark background. Returns (GrayImage, truth Mask)."""
    radius = size * 0.25 if radius is None else radius
    cx, cy = (size / 2.0, size / 2.0) if center is None else center
    x, y = _grid(size)
    inside = (x - cx) ** 2 + (y - cy) ** 2 <= radius**2
    image = GrayImage(_noisy(inside.astype(float), noise, seed))
    return image, Mask(inside)


def distorted_disk(size: int = 96, noise: float = 0.0, seed: int = 0,
                   radius: float | None = None, bite: float = 0.45,
                   arc_deg: float = 36.0, n_bites: int = 5):
    """Disk whose boundary carries sharp sinusoidal bites on evenly spaced arcs.

    Returns (GrayImage, distorted truth Mask, undistorted disk Mask); the
    last one is the reference for shape-prior comparisons. The bites are
    narrow and deep so that following them is curvature-expensive.
    """
    radius = size * 0.25 if radius is None else radius
    cx = cy = size / 2.0
    x, y = _grid(size)
    theta = np.arctan2(y - cy, x - cx)
    half = np.radians(arc_deg) / 2.0
    dent = np.zeros_like(x)
    for center in 2.0 * np.pi * np.arange(n_bites) / n_bites:
        delta = np.angle(np.exp(1j * (theta - center)))
        profile = bite * radius * np.cos(np.pi * delta / (2 * half)) ** 2
        dent = np.maximum(dent, np.where(np.abs(delta) <= half, profile, 0.0))
    r = np.hypot(x - cx, y - cy)
    distorted = r <= radius - dent
    image = GrayImage(_noisy(distorted.astype(float), noise, seed))
    return image, Mask(distorted), Mask(r <= radius)


def cavity(size: int = 128, noise: float = 0.0, seed: int = 0):
    """Bright U-shaped block (a rectangle with a top notch) on dark background."""
    s = size / 128.0
    x, y = _grid(size)
    outer = ((x >= 32 * s) & (x <= 96 * s) & (y >= 32 * s) & (y <= 96 * s))
    notch = ((x >= 52 * s) & (x <= 76 * s) & (y >= 32 * s) & (y <= 72 * s))
    shape = outer & ~notch
    image = GrayImage(_noisy(shape.astype(float), noise, seed))
    return image, Mask(shape)


def translating_stack(size: int = 128, n_slices: int = 5, step: float = 2.0,
                      noise: float = 0.0, seed: int = 0,
                      radius: float | None = None):
    """Stack of disks translating `step` px per slice along x.

    Returns (list of GrayImage, list of truth Mask).
    """
    radius = size * 0.2 if radius is None else radius
    images, truths = [], []
    for i in range(n_slices):
        cx = size / 2.0 - step * (n_slices - 1) / 2.0 + step * i
        img, truth = disk(size, noise, seed + i, radius=radius, center=(cx, size / 2.0))
        images.append(img)
        truths.append(truth)
    return images, truths


def make_fixture(name: str, size: int = 128, noise: float = 0.0, seed: int = 0):
    """Dispatch by fixture name; see FIXTURE_NAMES."""
    if name == "disk":
        return disk(size, noise, seed)
    if name == "distorted-disk":
        img, truth, _ = distorted_disk(size, noise, seed)
        return img, truth
    if name == "cavity":
        return cavity(size, noise, seed)
    if name == "translating-stack":
        return translating_stack(size, noise=noise, seed=seed)
    raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
