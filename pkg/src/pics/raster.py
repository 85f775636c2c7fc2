"""Pixel-grid side of the contour: masks, image gradients, region statistics.

Coordinate convention (used everywhere in the package): pixel (p, q) occupies
the unit square [p, p+1) x [q, q+1) with its center at (p + 0.5, q + 0.5).
Arrays are indexed [q, p] (row-major, q is the y index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class GrayImage:
    """Grayscale image with intensities normalized to [0, 1]."""

    pixels: np.ndarray  # (Ny, Nx) float64

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 4 or arr.shape[1] < 4:
            raise ValueError("image must be 2D, at least 4x4")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Mask:
    """Binary occupancy grid matching an image's dimensions."""

    inside: np.ndarray  # (Ny, Nx) bool

    def __post_init__(self):
        arr = np.array(self.inside, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("mask must be 2D")
        arr.setflags(write=False)
        object.__setattr__(self, "inside", arr)

    @property
    def width(self) -> int:
        return self.inside.shape[1]

    @property
    def height(self) -> int:
        return self.inside.shape[0]

    @property
    def count(self) -> int:
        return int(self.inside.sum())


@dataclass(frozen=True)
class GradField:
    """Squared gradient magnitude |grad I|^2 per pixel."""

    values: np.ndarray  # (Ny, Nx) float64

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("squared gradient magnitudes must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def rasterize_mask(polyline: np.ndarray, width: int, height: int) -> Mask:
    """Even-odd fill of a closed polygon on the pixel grid.

    A pixel is inside iff its center lies inside the polygon under the
    even-odd rule (counting edge crossings along a horizontal ray). Regions
    of the polygon outside the image are clipped implicitly.
    """
    pts = np.asarray(polyline, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("polyline needs at least 3 points")
    x1, y1 = pts[:, 0], pts[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)

    yc = np.arange(height) + 0.5
    crosses = (y1[None, :] <= yc[:, None]) != (y2[None, :] <= yc[:, None])  # (H, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (yc[:, None] - y1[None, :]) / (y2 - y1)[None, :]
        xcross = np.where(crosses, x1[None, :] + t * (x2 - x1)[None, :], np.inf)

    centers = np.arange(width) + 0.5
    counts = (xcross[:, :, None] < centers[None, None, :]).sum(axis=1)
    return Mask(counts % 2 == 1)


def image_gradient(image: GrayImage) -> GradField:
    """|grad I|^2 via central differences (one-sided at the borders)."""
    gy, gx = np.gradient(image.pixels)
    return GradField(gx * gx + gy * gy)


def region_means(image: GrayImage, mask: Mask):
    """(mu_in, mu_out, n_in, n_out) over chi=1 and chi=0 pixels.

    An empty region contributes an empty sum: its mean is reported as 0.
    """
    if (mask.height, mask.width) != (image.height, image.width):
        raise DimensionMismatch("mask dimensions do not match image")
    chi = mask.inside
    n_in = int(chi.sum())
    n_out = chi.size - n_in
    mu_in = float(image.pixels[chi].sum() / n_in) if n_in else 0.0
    mu_out = float(image.pixels[~chi].sum() / n_out) if n_out else 0.0
    return mu_in, mu_out, n_in, n_out
