"""Slice-by-slice segmentation of image stacks with warm-started knots."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .energy import Hyperparameters
from .errors import DimensionMismatch, OutOfBounds
from .optim import IterationRecord, OptimizationTrace, optimize
from .raster import GrayImage, Mask, rasterize_mask
from .spline import KnotVector, fit_periodic_spline, sample_polygon

MIN_POLYGON_AREA = 4.0  # px^2; below this the contour likely collapsed


@dataclass(frozen=True)
class ImageStack:
    """Ordered slices of identical dimensions."""

    slices: tuple[GrayImage, ...]
    spacing: Optional[float] = None  # informational only

    def __post_init__(self):
        if len(self.slices) < 1:
            raise ValueError("stack needs at least one slice")
        w, h = self.slices[0].width, self.slices[0].height
        for i, s in enumerate(self.slices):
            if (s.width, s.height) != (w, h):
                raise DimensionMismatch(f"slice {i} is {s.width}x{s.height}, expected {w}x{h}")

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def width(self) -> int:
        return self.slices[0].width

    @property
    def height(self) -> int:
        return self.slices[0].height


@dataclass
class SliceResult:
    index: int
    knots: KnotVector
    mask: Mask
    iterations: int
    final_loss: float
    mean_opi: float
    flagged: bool            # suspected contour collapse / topology change
    iou: Optional[float] = None
    trace: Optional[OptimizationTrace] = None


@dataclass
class VolumeResult:
    slices: list[SliceResult] = field(default_factory=list)


def init_from_click(click, radius: float, n_knots: int,
                    width: int | None = None, height: int | None = None) -> KnotVector:
    """Knots equally spaced counter-clockwise on a circle about the click."""
    cx, cy = float(click[0]), float(click[1])
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if width is not None and not (0 <= cx <= width and 0 <= cy <= height):
        raise OutOfBounds(f"click ({cx}, {cy}) outside {width}x{height} image")
    angles = 2.0 * np.pi * np.arange(n_knots) / max(n_knots, 1)
    pts = np.stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)], axis=1)
    return KnotVector(pts)


def polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def contour_mask(knots: KnotVector, width: int, height: int,
                 samples_per_segment: int) -> Mask:
    poly = sample_polygon(fit_periodic_spline(knots), samples_per_segment)
    return rasterize_mask(poly, width, height)


def segment_volume(stack: ImageStack, click, hyper: Hyperparameters,
                   observer: Callable[[int, IterationRecord], None] | None = None,
                   reference: list[Mask] | None = None,
                   keep_traces: bool = False) -> VolumeResult:
    """Optimize every slice in order, warm-starting from the previous optimum.

    Slice 0 is initialized from the click; each later slice starts from the
    previous slice's final knots. Per-slice errors are re-raised with the
    slice index attached.
    """
    result = VolumeResult()
    knots = init_from_click(click, hyper.init_radius, hyper.n_knots,
                            stack.width, stack.height)
    for i, image in enumerate(stack.slices):
        cb = (lambda rec, _i=i: observer(_i, rec)) if observer else None
        try:
            knots, trace = optimize(image, knots, hyper, observer=cb)
        except Exception as exc:
            raise type(exc)(f"slice {i}: {exc}") from exc
        mask = contour_mask(knots, stack.width, stack.height,
                            hyper.samples_per_segment)
        poly = sample_polygon(fit_periodic_spline(knots), hyper.samples_per_segment)
        opi_vals = trace.opi
        opi_vals = opi_vals[~np.isnan(opi_vals)]
        res = SliceResult(
            index=i,
            knots=knots,
            mask=mask,
            iterations=len(trace),
            final_loss=float(trace.j_total[-1]) if len(trace) else float("nan"),
            mean_opi=float(opi_vals.mean()) if opi_vals.size else float("nan"),
            flagged=polygon_area(poly) < MIN_POLYGON_AREA,
            trace=trace if keep_traces else None,
        )
        if reference is not None:
            res.iou = iou(mask, reference[i])
        result.slices.append(res)
    return result


def iou(a: Mask, b: Mask) -> float:
    """Intersection over union of two masks; 1.0 when both are empty."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch("mask dimensions differ")
    union = np.logical_or(a.inside, b.inside).sum()
    if union == 0:
        return 1.0
    inter = np.logical_and(a.inside, b.inside).sum()
    return float(inter / union)
