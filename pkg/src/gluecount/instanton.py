"""Pointwise curvature of a single concentrated bubble, and the quaternion
map that compares its radial directions seen from two marked points.

A bubble is a (center, scale, angle) triple.  In the exterior radial
gauge its curvature matrix at x is

    scale^2 / (scale^2 + |x - center|^2)^2  *  angle^T R(u),

where u is the unit displacement quaternion (x - center)/|x - center| and
R is the quaternion-to-rotation covering map.  The matrix is always a
positive multiple of a rotation; the multiple depends only on scale and
distance, the rotation only on the gluing angle and the direction.

The regular gauge evaluator (a scalar multiple of the identity) exists
purely as a test oracle: the two gauges differ by left multiplication
with R(u).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rotations import quat_conj, quat_mul, unit_quat_to_rotation

CENTER_EXCLUSION = 1e-12


@dataclass(frozen=True)
class Bubble:
    """Gluing data: center in R^4, scale > 0, gluing angle in SO(3)."""

    center: np.ndarray
    scale: float
    angle: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "angle", np.asarray(self.angle, dtype=float))
        if self.center.shape != (4,) or not np.all(np.isfinite(self.center)):
            raise ValueError("bubble center must be a finite point of R^4")
        if not self.scale > 0.0:
            raise ValueError("bubble scale must be positive")


@dataclass(frozen=True)
class TwoPointConfig:
    """The marked points p = (L, 0, 0, 0) and q = (-L, 0, 0, 0)."""

    L: float
    p: np.ndarray = field(init=False)
    q: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.L > 0.0:
            raise ValueError("separation parameter L must be positive")
        object.__setattr__(self, "p", np.array([self.L, 0.0, 0.0, 0.0]))
        object.__setattr__(self, "q", np.array([-self.L, 0.0, 0.0, 0.0]))


def magnitude_arrays(center, scale, x) -> np.ndarray:
    """scale^2 / (scale^2 + |x - center|^2)^2, broadcasting over all arguments."""
    center = np.asarray(center, dtype=float)
    scale = np.asarray(scale, dtype=float)
    x = np.asarray(x, dtype=float)
    r2 = np.sum((x - center) ** 2, axis=-1)
    # NaN/overflow pass through: batched searches treat such rows as dead
    with np.errstate(invalid="ignore", over="ignore"):
        lam2 = scale**2
        return lam2 / (lam2 + r2) ** 2


def magnitude(bubble: Bubble, x) -> np.ndarray:
    """Curvature magnitude of the bubble at x; equals scale**-2 at the center."""
    return magnitude_arrays(bubble.center, bubble.scale, x)


def curvature_arrays(center, scale, angle, x) -> np.ndarray:
    """Exterior-gauge curvature matrix, broadcasting over bubble data and x.

    No singularity guard: callers that may hit the center go through
    curvature().  Division by zero at the center produces NaN rows, which
    batched searches treat as dead starts.
    """
    center = np.asarray(center, dtype=float)
    scale = np.asarray(scale, dtype=float)
    angle = np.asarray(angle, dtype=float)
    x = np.asarray(x, dtype=float)
    d = x - center
    r = np.linalg.norm(d, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = d / r
    mag = magnitude_arrays(center, scale, x)
    rot = unit_quat_to_rotation(u)
    return mag[..., None, None] * (np.swapaxes(angle, -1, -2) @ rot)


def curvature(bubble: Bubble, x) -> np.ndarray:
    """Exterior-gauge curvature matrix of the bubble at x (x may be batched).

    Raises ValueError within 1e-12 * scale of the center, where this gauge
    is singular.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x - bubble.center, axis=-1)
    if np.any(r < CENTER_EXCLUSION * bubble.scale):
        raise ValueError("exterior radial gauge is singular at the bubble center")
    return curvature_arrays(bubble.center, bubble.scale, bubble.angle, x)


def regular_gauge_curvature(scale: float, center, x) -> np.ndarray:
    """Regular-gauge curvature matrix: the magnitude times the identity.

    Test oracle only; the solver works exclusively in the exterior gauge.
    """
    mag = magnitude_arrays(center, scale, x)
    return mag[..., None, None] * np.eye(3)


def direction_ratio_arrays(p, q, y) -> np.ndarray:
    """conj(y - p) * (y - q), normalized: the unit quaternion comparing the
    two sightline directions.  NaN where y collides with p or q."""
    y = np.asarray(y, dtype=float)
    dp = y - np.asarray(p, dtype=float)
    dq = y - np.asarray(q, dtype=float)
    num = quat_mul(quat_conj(dp), dq)
    denom = np.linalg.norm(dp, axis=-1) * np.linalg.norm(dq, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / denom[..., None]


def direction_ratio(cfg: TwoPointConfig, y) -> np.ndarray:
    """Unit quaternion g(y) with R(g(y)) = R(u_p)^T R(u_q), where u_p and
    u_q are the unit displacements from the marked points to y.

    For y on the slice y0 = 0 this equals
    (|y_I|^2 - L^2 - 2 L y_I) / (L^2 + |y_I|^2); in particular g(0) = -1,
    g approaches -1 - 2 y_I / L near the midpoint and 1 - 2 L y_I / |y_I|^2
    far away, with quadratically small remainders.

    Raises ValueError within 1e-12 of either marked point.
    """
    y = np.asarray(y, dtype=float)
    if np.any(np.linalg.norm(y - cfg.p, axis=-1) < CENTER_EXCLUSION) or np.any(
        np.linalg.norm(y - cfg.q, axis=-1) < CENTER_EXCLUSION
    ):
        raise ValueError("direction ratio undefined at the marked points")
    return direction_ratio_arrays(cfg.p, cfg.q, y)
