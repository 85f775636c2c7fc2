"""Loss terms of the contour-selection functional and their assembly.

Total loss:  J = alpha*J_psi_s + beta*J_psi_ss + mu*J_cv + sigma*mean(kappa^2)

The smoothness terms are averages of squared first/second spline derivative
magnitudes over the knot parameters; J_cv is the region-based (Chan-Vese)
energy evaluated on the rasterized mask, with an optional interior-gradient
term weighted by gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SingularTangent
from .raster import GradField, GrayImage, Mask, rasterize_mask, region_means
from .spline import (
    KnotVector,
    PeriodicSpline,
    curvature_at_knots,
    fit_periodic_spline,
    knot_derivatives,
    sample_polygon,
)


@dataclass(frozen=True)
class Hyperparameters:
    """Loss weights plus optimizer settings."""

    alpha: float = 0.5        # first-derivative smoothness weight
    beta: float = 1e-2        # second-derivative smoothness weight
    mu: float = 1e3           # region-energy weight (adapted during a run)
    gamma: float = 0.0        # interior-gradient weight inside J_cv
    sigma: float = 0.0        # convexity (squared-curvature) weight
    learning_rate: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_iters: int = 500
    fd_step: float = 1.0      # central-difference probe step, pixels
    opi_window: int = 10
    opi_threshold: float = 0.8
    mu_cap_ratio: float = 1e4
    samples_per_segment: int = 8
    init_radius: float = 5.0
    n_knots: int = 10
    snapshot_every: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "mu", "gamma", "sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be > 0")
        if self.opi_window < 2:
            raise ValueError("opi_window must be >= 2")
        if self.mu_cap_ratio <= 1:
            raise ValueError("mu_cap_ratio must be > 1")

    def with_weights(self, alpha=None, beta=None, mu=None, gamma=None, sigma=None):
        updates = {
            k: v
            for k, v in dict(alpha=alpha, beta=beta, mu=mu, gamma=gamma, sigma=sigma).items()
            if v is not None
        }
        return replace(self, **updates)


@dataclass(frozen=True)
class LossBreakdown:
    """All terms of one loss evaluation, raw and weighted."""

    j_psi_s: float
    j_psi_ss: float
    j_cv: float
    curv_penalty: float
    j_int: float
    j_ext: float
    j_shape: float
    j_total: float

    @classmethod
    def assemble(cls, j_psi_s, j_psi_ss, j_cv, curv_penalty, hyper: Hyperparameters,
                 mu: float | None = None) -> "LossBreakdown":
        mu = hyper.mu if mu is None else mu
        j_int = hyper.alpha * j_psi_s + hyper.beta * j_psi_ss
        j_ext = mu * j_cv
        j_shape = hyper.sigma * curv_penalty
        return cls(
            j_psi_s=j_psi_s,
            j_psi_ss=j_psi_ss,
            j_cv=j_cv,
            curv_penalty=curv_penalty,
            j_int=j_int,
            j_ext=j_ext,
            j_shape=j_shape,
            j_total=j_int + j_ext + j_shape,
        )


def internal_energy(spline: PeriodicSpline):
    """(j_psi_s, j_psi_ss): mean squared derivative magnitudes at the knots."""
    d1, d2 = knot_derivatives(spline)
    j_s = float(np.mean(np.sum(d1 * d1, axis=1)))
    j_ss = float(np.mean(np.sum(d2 * d2, axis=1)))
    return j_s, j_ss


def chan_vese_energy(image: GrayImage, gradfield: GradField, mask: Mask,
                     gamma: float) -> float:
    """Region energy of the mask against the image, means recomputed here."""
    mu_in, mu_out, _, _ = region_means(image, mask)
    chi = mask.inside
    pix = image.pixels
    inner = np.sum(((pix - mu_in) ** 2)[chi])
    outer = np.sum(((pix - mu_out) ** 2)[~chi])
    grad = gamma * np.sum(gradfield.values[chi]) if gamma else 0.0
    return float(inner + grad + outer)


def shape_penalty(spline: PeriodicSpline) -> float:
    """Mean squared signed curvature over the knots."""
    kappa = curvature_at_knots(spline)
    return float(np.mean(kappa * kappa))


def total_loss(image: GrayImage, gradfield: GradField, knots: KnotVector,
               hyper: Hyperparameters, mu: float | None = None) -> LossBreakdown:
    """Fit, sample, rasterize, and evaluate every term for one knot set."""
    spline = fit_periodic_spline(knots)
    j_s, j_ss = internal_energy(spline)
    poly = sample_polygon(spline, hyper.samples_per_segment)
    mask = rasterize_mask(poly, image.width, image.height)
    j_cv = chan_vese_energy(image, gradfield, mask, hyper.gamma)
    curv = shape_penalty(spline) if hyper.sigma else _safe_shape(spline)
    return LossBreakdown.assemble(j_s, j_ss, j_cv, curv, hyper, mu=mu)


def _safe_shape(spline: PeriodicSpline) -> float:
    # with sigma == 0 the penalty is informational and must not abort the run
    try:
        return shape_penalty(spline)
    except SingularTangent:
        return 0.0
