"""Gradient-descent driver for the contour knots.

Gradients of the (non-differentiable-in-closed-form) loss are obtained by
central differences over the 2N knot coordinates; updates use bias-corrected
Adam. A windowed trend score (OPI) of the internal vs external energy
histories triggers adaptive growth of the region weight mu, capped once the
external energy dominates the internal one by mu_cap_ratio.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .energy import Hyperparameters, LossBreakdown, total_loss
from .errors import InsufficientHistory, InvalidEdit
from .raster import GradField, GrayImage
from .spline import KnotVector

DISPLACEMENT_TOL = 1e-3       # px; "converged" once max knot move stays below
PLATEAU_REL_TOL = 1e-8        # relative j_total improvement counted as progress
STALL_ITERS = 20              # consecutive stalled iterations before stopping


@dataclass
class AdamState:
    """First/second moment accumulators over the flattened 2N coordinates."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_knots: int) -> "AdamState":
        return cls(m=np.zeros(2 * n_knots), v=np.zeros(2 * n_knots))


@dataclass
class IterationRecord:
    iteration: int
    breakdown: LossBreakdown
    opi: float          # nan until the window is filled
    mu: float
    knots: Optional[np.ndarray]  # snapshot, None on skipped iterations
    wall_time: float


@dataclass
class OptimizationTrace:
    """Per-iteration history of one optimization run."""

    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def j_int(self) -> np.ndarray:
        return np.array([r.breakdown.j_int for r in self.records])

    @property
    def j_ext(self) -> np.ndarray:
        return np.array([r.breakdown.j_ext for r in self.records])

    @property
    def j_total(self) -> np.ndarray:
        return np.array([r.breakdown.j_total for r in self.records])

    @property
    def opi(self) -> np.ndarray:
        return np.array([r.opi for r in self.records])

    @property
    def mu(self) -> np.ndarray:
        return np.array([r.mu for r in self.records])


class OptimizerControl:
    """Thread-safe channel for pausing and editing a running optimization.

    Edits are lists of (knot_index, new_point_or_None, new_pin_or_None); they
    are drained and applied only at iteration boundaries.
    """

    def __init__(self):
        import threading

        self._lock = threading.Lock()
        self._edits: list[list[tuple]] = []
        self._resume = threading.Event()
        self._resume.set()
        self._stop = False

    def queue_edits(self, edits: list[tuple]) -> None:
        with self._lock:
            self._edits.append(list(edits))

    def pause(self) -> None:
        self._resume.clear()

    def resume(self) -> None:
        self._resume.set()

    def request_stop(self) -> None:
        self._stop = True
        self._resume.set()

    @property
    def paused(self) -> bool:
        return not self._resume.is_set()

    def _drain(self) -> list[list[tuple]]:
        with self._lock:
            batches, self._edits = self._edits, []
        return batches

    def _wait_if_paused(self) -> None:
        self._resume.wait()


def apply_edits(knots: KnotVector, edits: list[tuple]) -> KnotVector:
    """One atomic edit batch; raises InvalidEdit if the result is invalid."""
    pts = knots.points.copy()
    pins = knots.pinned.copy()
    for index, point, pin in edits:
        if not 0 <= index < knots.n:
            raise InvalidEdit(f"knot index {index} out of range")
        if point is not None:
            pts[index] = point
        if pin is not None:
            pins[index] = bool(pin)
    try:
        return KnotVector(pts, pins)
    except Exception as exc:
        raise InvalidEdit(str(exc)) from exc


def _probe_count() -> int:
    try:
        return max(1, int(os.environ.get("PICS_THREADS", "1")))
    except ValueError:
        return 1


def fd_gradient(loss: Callable[[KnotVector], float], knots: KnotVector,
                h: float) -> np.ndarray:
    """Central-difference loss gradient over the flattened (u1,v1,...,uN,vN).

    Components belonging to pinned knots are forced to zero and their probes
    are skipped entirely.
    """
    if h <= 0:
        raise ValueError("fd step must be > 0")
    flat = knots.points.ravel()
    free = np.repeat(~knots.pinned, 2)
    grad = np.zeros(flat.size)

    def component(j: int) -> float:
        plus = flat.copy()
        minus = flat.copy()
        plus[j] += h
        minus[j] -= h
        jp = loss(knots.with_points(plus.reshape(-1, 2)))
        jm = loss(knots.with_points(minus.reshape(-1, 2)))
        return (jp - jm) / (2.0 * h)

    indices = np.flatnonzero(free)
    workers = _probe_count()
    if workers > 1 and indices.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(component, indices))
    else:
        values = [component(j) for j in indices]
    grad[indices] = values
    return grad


def adam_step(state: AdamState, knots: KnotVector, grad: np.ndarray,
              learning_rate: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8, bounds: tuple | None = None):
    """One bias-corrected Adam update on the unpinned coordinates.

    bounds, when given, is (width, height): updated knots are clamped to the
    image rectangle. Returns (new knots, new state).
    """
    flat = knots.points.ravel()
    if grad.shape != flat.shape:
        raise ValueError("gradient length must be 2N")
    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    step = learning_rate * m_hat / (np.sqrt(v_hat) + eps)

    free = np.repeat(~knots.pinned, 2)
    new_flat = flat.copy()
    new_flat[free] -= step[free]
    pts = new_flat.reshape(-1, 2)
    if bounds is not None:
        width, height = bounds
        clamped = np.clip(pts, [0.0, 0.0], [float(width), float(height)])
        pts = np.where(knots.pinned[:, None], pts, clamped)
    return knots.with_points(pts), AdamState(m=m, v=v, t=t)


def opi_from_histories(j_int: np.ndarray, j_ext: np.ndarray, k: int,
                       w: int) -> float:
    """Trend score at iteration k over a window of w energy differences.

    P pairs the signs of the windowed forward differences of the internal and
    external energies; theta weights recent iterations exponentially. A value
    of 1 means both energies fell throughout the window.
    """
    if k < w:
        raise InsufficientHistory(f"need at least {w} iterations, have {k}")
    d_int = np.diff(np.asarray(j_int)[k - w : k + 1])
    d_ext = np.diff(np.asarray(j_ext)[k - w : k + 1])
    p = np.sign(d_int) - np.sign(d_ext)
    d = 1.0 / (w - 1)
    theta = np.exp(1.0 + d * np.arange(w))
    theta = theta / theta.sum()
    return float(1.0 - np.dot(theta, p) / (2.0 * theta.sum()))


def compute_opi(trace: OptimizationTrace, k: int, w: int) -> float:
    return opi_from_histories(trace.j_int, trace.j_ext, k, w)


def adapt_mu(hyper: Hyperparameters, mu: float, j_ext: float,
             j_int: float) -> float:
    """Grow mu by 2**log10(j_ext/j_int) unless the cap is already exceeded."""
    if j_int <= 0 or j_ext <= 0:
        return mu
    if j_ext >= hyper.mu_cap_ratio * j_int:
        return mu
    return mu + 2.0 ** np.log10(j_ext / j_int)


def optimize(image: GrayImage, init: KnotVector, hyper: Hyperparameters,
             observer: Callable[[IterationRecord], None] | None = None,
             control: OptimizerControl | None = None,
             gradfield: GradField | None = None):
    """Run the full descent loop; returns (final KnotVector, trace).

    Per iteration: drain queued external edits, evaluate the loss, update the
    trend score and (when it falls below threshold) the region weight, then
    take one FD-gradient Adam step clamped to the image rectangle. Stops at
    max_iters, or once knot displacement stays below 1e-3 px, or the total
    loss stops improving, for 20 consecutive iterations.
    """
    from .raster import image_gradient

    if gradfield is None:
        gradfield = image_gradient(image)

    knots = init
    state = AdamState.zeros(init.n)
    trace = OptimizationTrace()
    mu = hyper.mu
    bounds = (image.width, image.height)
    still = 0
    stalled = 0
    best_total = np.inf

    for k in range(hyper.max_iters):
        tic = time.perf_counter()
        if control is not None:
            control._wait_if_paused()
            if control._stop:
                break
            for batch in control._drain():
                try:
                    knots = apply_edits(knots, batch)
                except InvalidEdit:
                    continue  # rejected whole, loop continues

        breakdown = total_loss(image, gradfield, knots, hyper, mu=mu)

        opi = float("nan")
        if k >= hyper.opi_window:
            opi = opi_from_histories(
                np.append(trace.j_int, breakdown.j_int),
                np.append(trace.j_ext, breakdown.j_ext),
                k, hyper.opi_window)
            if opi < hyper.opi_threshold:
                mu = adapt_mu(hyper, mu, breakdown.j_ext, breakdown.j_int)

        def probe_loss(kv: KnotVector, _mu=mu) -> float:
            return total_loss(image, gradfield, kv, hyper, mu=_mu).j_total

        grad = fd_gradient(probe_loss, knots, hyper.fd_step)
        new_knots, state = adam_step(
            state, knots, grad, hyper.learning_rate, hyper.adam_beta1,
            hyper.adam_beta2, hyper.adam_eps, bounds=bounds)

        snapshot = None
        if hyper.snapshot_every and k % hyper.snapshot_every == 0:
            snapshot = knots.points.copy()
        record = IterationRecord(
            iteration=k, breakdown=breakdown, opi=opi, mu=mu,
            knots=snapshot, wall_time=time.perf_counter() - tic)
        trace.records.append(record)
        if observer is not None:
            observer(record)

        displacement = float(np.abs(new_knots.points - knots.points).max())
        knots = new_knots
        still = still + 1 if displacement < DISPLACEMENT_TOL else 0
        if not np.isfinite(best_total) or \
                breakdown.j_total < best_total - PLATEAU_REL_TOL * max(1.0, abs(best_total)):
            best_total = breakdown.j_total
            stalled = 0
        else:
            stalled += 1
        if still >= STALL_ITERS or stalled >= STALL_ITERS:
            break

    return knots, trace
