"""Closed periodic cubic splines through 2D control knots.

The contour is a parametric curve psi(s) = (u(s), v(s)), s in [0, 1), built
from N cubic segments joined with C1/C2 continuity and periodic wrap. Knot
parameters are uniform: s_k = k/N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateKnots, SingularTangent, TooFewKnots

MIN_KNOTS = 4
MIN_KNOT_SPACING = 1e-9
MIN_TANGENT_SPEED = 1e-12


@dataclass(frozen=True)
class KnotVector:
    """Ordered control knots in pixel coordinates plus per-knot pin flags."""

    points: np.ndarray          # (N, 2) float64
    pinned: np.ndarray = None   # (N,) bool, default all free

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (N, 2)")
        n = pts.shape[0]
        if n < MIN_KNOTS:
            raise TooFewKnots(f"need at least {MIN_KNOTS} knots, got {n}")
        gaps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if np.any(gaps <= MIN_KNOT_SPACING):
            raise DegenerateKnots("consecutive knots coincide")
        if self.pinned is None:
            pins = np.zeros(n, dtype=bool)
        else:
            pins = np.array(self.pinned, dtype=bool)
            if pins.shape != (n,):
                raise ValueError("pinned must have exactly one flag per knot")
        pts.setflags(write=False)
        pins.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "pinned", pins)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def with_points(self, points: np.ndarray) -> "KnotVector":
        return KnotVector(points, self.pinned)


@dataclass(frozen=True)
class PeriodicSpline:
    """Per-segment cubic coefficients of a fitted closed contour.

    coeffs[k, c, j] is the coefficient of t**j for coordinate c (0 = u, 1 = v)
    on segment k, with local parameter t = s - k/N, t in [0, 1/N).
    """

    coeffs: np.ndarray  # (N, 2, 4)
    knots: np.ndarray   # (N, 2), the interpolated points

    def __post_init__(self):
        self.coeffs.setflags(write=False)
        self.knots.setflags(write=False)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def knot_params(self) -> np.ndarray:
        return np.arange(self.n) / self.n


@lru_cache(maxsize=32)
def _cyclic_inverse(n: int) -> np.ndarray:
    """Inverse of the cyclic tridiagonal matrix of the C2 spline system."""
    a = np.zeros((n, n))
    idx = np.arange(n)
    a[idx, idx] = 4.0
    a[idx, (idx + 1) % n] = 1.0
    a[idx, (idx - 1) % n] = 1.0
    return np.linalg.inv(a)


def fit_periodic_spline(knots: KnotVector) -> PeriodicSpline:
    """Solve for segment coefficients satisfying interpolation, C1, C2 and
    periodicity, with uniform knot parameters s_k = k/N."""
    pts = knots.points
    n = knots.n
    h = 1.0 / n

    # second derivatives M at the knots from the cyclic tridiagonal system
    rhs = 6.0 / h**2 * (np.roll(pts, -1, axis=0) - 2.0 * pts + np.roll(pts, 1, axis=0))
    m = _cyclic_inverse(n) @ rhs  # (N, 2)

    m_next = np.roll(m, -1, axis=0)
    dpts = np.roll(pts, -1, axis=0) - pts
    c0 = pts
    c1 = dpts / h - h * (2.0 * m + m_next) / 6.0
    c2 = m / 2.0
    c3 = (m_next - m) / (6.0 * h)
    coeffs = np.stack([c0, c1, c2, c3], axis=-1)  # (N, 2, 4)
    return PeriodicSpline(coeffs=coeffs.transpose(0, 1, 2).copy(), knots=pts.copy())


def _locate(spline: PeriodicSpline, s):
    s = np.asarray(s, dtype=float) % 1.0
    n = spline.n
    k = np.minimum((s * n).astype(int), n - 1)
    t = s - k / n
    return k, t


def eval_spline(spline: PeriodicSpline, s):
    """Point(s) on the contour; s wraps modulo 1. Returns shape (..., 2)."""
    k, t = _locate(spline, s)
    c = spline.coeffs[k]  # (..., 2, 4)
    t = np.asarray(t)[..., None]
    return c[..., 0] + t * (c[..., 1] + t * (c[..., 2] + t * c[..., 3]))


def eval_derivatives(spline: PeriodicSpline, s):
    """Analytic (d psi/ds, d2 psi/ds2) at s; each of shape (..., 2)."""
    k, t = _locate(spline, s)
    c = spline.coeffs[k]
    t = np.asarray(t)[..., None]
    d1 = c[..., 1] + t * (2.0 * c[..., 2] + t * 3.0 * c[..., 3])
    d2 = 2.0 * c[..., 2] + t * 6.0 * c[..., 3]
    return d1, d2


def knot_derivatives(spline: PeriodicSpline):
    """First and second derivatives at the N knot parameters (t = 0)."""
    d1 = spline.coeffs[:, :, 1]
    d2 = 2.0 * spline.coeffs[:, :, 2]
    return d1, d2


def curvature_at_knots(spline: PeriodicSpline) -> np.ndarray:
    """Signed curvature kappa = (v_ss u_s - u_ss v_s) / speed^3 at each knot."""
    d1, d2 = knot_derivatives(spline)
    speed = np.linalg.norm(d1, axis=1)
    if np.any(speed <= MIN_TANGENT_SPEED):
        raise SingularTangent("tangent speed vanishes at a knot")
    num = d2[:, 1] * d1[:, 0] - d2[:, 0] * d1[:, 1]
    return num / speed**3


def sample_polygon(spline: PeriodicSpline, samples_per_segment: int) -> np.ndarray:
    """Ordered points tracing the contour once, implicitly closed.

    Returns (N * samples_per_segment, 2); every knot is included.
    """
    if samples_per_segment < 2:
        raise ValueError("samples_per_segment must be >= 2")
    total = spline.n * samples_per_segment
    s = np.arange(total) / total
    return eval_spline(spline, s)
