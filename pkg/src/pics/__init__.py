"""Interactive, label-free image segmentation with spline snakes.

A closed periodic cubic spline, parameterized by its control knots, is
driven by finite-difference gradient descent on a region-based energy with
smoothness and convexity priors. Includes a CLI, an HTTP session service,
and slice-to-slice transfer for 3D stacks.
"""

from .energy import Hyperparameters, LossBreakdown, chan_vese_energy, internal_energy, shape_penalty, total_loss
from .errors import PicsError
from .image_io import (
    AnnotationRecord,
    builtin_presets,
    export_annotation,
    import_annotation,
    load_gray,
    load_stack,
    save_gray,
    save_mask,
)
from .optim import (
    AdamState,
    OptimizationTrace,
    OptimizerControl,
    adam_step,
    adapt_mu,
    compute_opi,
    fd_gradient,
    optimize,
)
from .raster import GradField, GrayImage, Mask, image_gradient, rasterize_mask, region_means
from .spline import (
    KnotVector,
    PeriodicSpline,
    curvature_at_knots,
    eval_derivatives,
    eval_spline,
    fit_periodic_spline,
    sample_polygon,
)
from .fixtures import cavity, disk, distorted_disk, make_fixture, translating_stack
from .volume import (
    ImageStack,
    SliceResult,
    VolumeResult,
    contour_mask,
    init_from_click,
    iou,
    polygon_area,
    segment_volume,
)

__version__ = "0.1.0"
