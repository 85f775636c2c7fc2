import numpy as np
import pytest

from pics.spline import KnotVector


def random_knots(rng: np.random.Generator, n: int | None = None,
                 center=(50.0, 50.0), pinned=False) -> KnotVector:
    """Random valid knot set: jittered points on a star-shaped contour."""
    if n is None:
        n = int(rng.integers(4, 20))
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    # keep consecutive angles apart so knots never coincide
    angles = (angles + np.linspace(0, 2 * np.pi, n, endpoint=False)) / 2.0
    radii = rng.uniform(5.0, 40.0, n)
    pts = np.stack([center[0] + radii * np.cos(angles),
                    center[1] + radii * np.sin(angles)], axis=1)
    pins = rng.random(n) < 0.2 if pinned else None
    return KnotVector(pts, pins)


def circle_knots(n: int, radius: float, center=(0.0, 0.0)) -> KnotVector:
    th = 2 * np.pi * np.arange(n) / n
    return KnotVector(np.stack([center[0] + radius * np.cos(th),
                                center[1] + radius * np.sin(th)], axis=1))


def point_in_polygon(px: float, py: float, poly: np.ndarray) -> bool:
    """Scalar even-odd ray cast; the brute-force oracle for rasterization."""
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 <= py) != (y2 <= py):
            xin = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if xin < px:
                inside = not inside
    return inside


def brute_force_mask(poly: np.ndarray, width: int, height: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for q in range(height):
        for p in range(width):
            out[q, p] = point_in_polygon(p + 0.5, q + 0.5, poly)
    return out


def global_spline_solve(knots: KnotVector) -> np.ndarray:
    """Independent oracle: solve the full 8N-unknown constraint system for
    per-segment global-parameter cubics and return it as a dense sampler.

    Returns a function-like ndarray closure is avoided; instead returns the
    (N, 2, 4) array of global-s coefficients [c0, c1, c2, c3] per segment.
    """
    pts = knots.points
    n = knots.n
    sk = np.arange(n + 1) / n  # segment k spans [sk[k], sk[k+1]]

    def rows(s):  # value basis at global parameter s
        return np.array([1.0, s, s * s, s**3])

    def drows(s):
        return np.array([0.0, 1.0, 2 * s, 3 * s * s])

    def ddrows(s):
        return np.array([0.0, 0.0, 2.0, 6 * s])

    coeffs = np.zeros((n, 2, 4))
    for c in range(2):
        a = np.zeros((4 * n, 4 * n))
        b = np.zeros(4 * n)
        row = 0
        for k in range(n):
            a[row, 4 * k : 4 * k + 4] = rows(sk[k])
            b[row] = pts[k, c]
            row += 1
            a[row, 4 * k : 4 * k + 4] = rows(sk[k + 1])
            b[row] = pts[(k + 1) % n, c]
            row += 1
        for k in range(n):  # join of segment k with segment (k+1)%n at sk[k+1]
            nxt = (k + 1) % n
            s_here = sk[k + 1]
            s_next = sk[k + 1] if nxt != 0 else sk[0]
            a[row, 4 * k : 4 * k + 4] = drows(s_here)
            a[row, 4 * nxt : 4 * nxt + 4] -= drows(s_next)
            row += 1
            a[row, 4 * k : 4 * k + 4] = ddrows(s_here)
            a[row, 4 * nxt : 4 * nxt + 4] -= ddrows(s_next)
            row += 1
        sol = np.linalg.solve(a, b)
        coeffs[:, c, :] = sol.reshape(n, 4)
    return coeffs


def eval_global(coeffs: np.ndarray, s: float) -> np.ndarray:
    n = coeffs.shape[0]
    k = min(int((s % 1.0) * n), n - 1)
    powers = np.array([1.0, s % 1.0, (s % 1.0) ** 2, (s % 1.0) ** 3])
    return coeffs[k] @ powers


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
