"""Accumulator-based boundary detection.

The iris/sclera border is an ellipse centered on the pupil, searched inside
the [1.2r, 2.4r] annulus. The eyelids are parabolas from the two-parameter
polar family d = rho * (1 + cos(phi - theta_v)) about the pupil center
(focus at the center, vertex at distance d/2 in direction theta_v).
Coordinates are image coordinates: x right, y down, angles from atan2(dy, dx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import (
    AccumulatorPeakNotFound,
    DegenerateAxis,
    EmptyAnnulus,
    NoEllipseFound,
    NoParabolaFound,
)
from .imaging import EdgeMap
from .segmentation import PupilCircle

__all__ = [
    "ANNULUS_INNER",
    "ANNULUS_OUTER",
    "Accumulator",
    "EllipseParams",
    "ParabolaParams",
    "accumulator_peak",
    "convert_parabola",
    "elliptic_hough",
    "parabola_points",
    "parabolic_hough",
]

ANNULUS_INNER = 1.2   # iris border search annulus, in pupil radii
ANNULUS_OUTER = 2.4

DEFAULT_ELLIPSE_BIN = 1.0
DEFAULT_ELLIPSE_VOTE_FRAC = 0.08

DEFAULT_AXIS_RANGE_DEG = 15.0
DEFAULT_AXIS_BIN_DEG = 2.0
DEFAULT_D_BIN = 2.0
DEFAULT_PARABOLA_VOTE_FRAC = 0.25

_SMOOTH_KERNEL = np.ones((3, 3), dtype=np.int64)


@dataclass(frozen=True)
class Accumulator:
    """Vote grid plus (lo, bin width) descriptors, one per axis."""

    counts: np.ndarray
    axes: tuple[tuple[float, float], ...]

    def bin_center(self, axis: int, index: int) -> float:
        lo, width = self.axes[axis]
        return lo + (index + 0.5) * width


@dataclass(frozen=True)
class EllipseParams:
    a: float      # semi-axis along x
    b: float      # semi-axis along y
    cx: float
    cy: float


@dataclass(frozen=True)
class ParabolaParams:
    d: float               # semi-latus rectum (focus-to-directrix distance)
    theta_axis: float      # opening direction (vertex toward focus), radians
    vertex: tuple[float, float]
    quad: tuple[float, float, float]   # y = A x^2 + B x + C


def accumulator_peak(acc: Accumulator, vote_threshold: float) -> tuple[int, ...]:
    """Index of the maximal cell; ties go to the lowest flat index."""
    flat = int(np.argmax(acc.counts))
    if acc.counts.flat[flat] < vote_threshold:
        raise AccumulatorPeakNotFound(
            f"peak {acc.counts.flat[flat]} below threshold {vote_threshold}"
        )
    return np.unravel_index(flat, acc.counts.shape)


def elliptic_hough(
    edges: EdgeMap,
    pupil: PupilCircle,
    bin_width: float = DEFAULT_ELLIPSE_BIN,
    vote_threshold: Optional[float] = None,
    vote_frac: float = DEFAULT_ELLIPSE_VOTE_FRAC,
    return_accumulator: bool = False,
):
    """Detect the iris/sclera ellipse about the pupil center.

    Each annulus edge point (x, y) votes its curve a = (x-x0)/cos(t),
    b = (y-y0)/sin(t) whenever both semi-axes fall inside [1.2r, 2.4r];
    the kernel rasterises the curve once per a-column so no cell on it is
    skipped.  Pixel quantisation spreads each point's vote over adjacent
    cells, so the peak is taken on a 3x3 neighbourhood sum.
    """
    r = pupil.radius
    lo, hi = ANNULUS_INNER * r, ANNULUS_OUTER * r

    dx = edges.xs.astype(np.float64) - pupil.cx
    dy = edges.ys.astype(np.float64) - pupil.cy
    dist = np.hypot(dx, dy)
    keep = (dist >= lo) & (dist <= hi)
    if not keep.any():
        raise EmptyAnnulus("no edge points inside the search annulus")
    dx, dy = dx[keep], dy[keep]

    counts = kernels.ellipse_votes(
        np.ascontiguousarray(dx), np.ascontiguousarray(dy), lo, hi, bin_width,
    )
    acc = Accumulator(counts, ((lo, bin_width), (lo, bin_width)))

    if vote_threshold is None:
        # fraction of the mid-annulus circle perimeter
        vote_threshold = vote_frac * 2.0 * math.pi * 1.8 * r
    smoothed = ndimage.convolve(counts, _SMOOTH_KERNEL, mode="constant")
    smooth_acc = Accumulator(smoothed, acc.axes)
    try:
        ia, ib = accumulator_peak(smooth_acc, vote_threshold)
    except AccumulatorPeakNotFound as exc:
        raise NoEllipseFound(str(exc)) from exc
    a, b = acc.bin_center(0, ia), acc.bin_center(1, ib)
    a, b = _refine_ellipse(dx, dy, a, b, lo, hi)
    params = EllipseParams(a=a, b=b, cx=pupil.cx, cy=pupil.cy)
    return (params, acc) if return_accumulator else params


_REFINE_TOL = 2.5         # inlier distance to the peak ellipse, pixels
_REFINE_MIN_POINTS = 20


def _refine_ellipse(dx, dy, a, b, lo, hi):
    """Least-squares polish of a Hough peak.

    Points within _REFINE_TOL of the peak ellipse are fit linearly to
    dx^2 * p + dy^2 * q = 1 with (p, q) = (1/a^2, 1/b^2).  This recovers
    sub-pixel semi-axes even when eyelids hide the top and bottom arcs,
    where the accumulator alone conditions b poorly on the quantised a.
    The peak values are kept when the fit is degenerate or leaves the
    search annulus.
    """
    phi = np.arctan2(dy, dx)
    r_ell = 1.0 / np.hypot(np.cos(phi) / a, np.sin(phi) / b)
    inl = np.abs(np.hypot(dx, dy) - r_ell) <= _REFINE_TOL
    if inl.sum() < _REFINE_MIN_POINTS:
        return a, b
    design = np.column_stack([dx[inl] ** 2, dy[inl] ** 2])
    (p, q), *_ = np.linalg.lstsq(design, np.ones(int(inl.sum())), rcond=None)
    if p <= 0.0 or q <= 0.0:
        return a, b
    a_fit, b_fit = 1.0 / math.sqrt(p), 1.0 / math.sqrt(q)
    if not (lo <= a_fit <= hi and lo <= b_fit <= hi):
        return a, b
    return a_fit, b_fit


def parabola_points(d: float, theta_axis: float, vertex: tuple[float, float],
                    psis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample the polar parabola rho = d / (1 + cos(psi)) about its focus.

    psi is measured from the vertex direction; the focus sits at distance
    d/2 from the vertex along theta_axis.
    """
    fx = vertex[0] + 0.5 * d * math.cos(theta_axis)
    fy = vertex[1] + 0.5 * d * math.sin(theta_axis)
    pole = theta_axis + math.pi  # vertex direction seen from the focus
    rho = d / (1.0 + np.cos(psis))
    xs = fx + rho * np.cos(pole + psis)
    ys = fy + rho * np.sin(pole + psis)
    return xs, ys


def convert_parabola(d: float, theta_axis: float,
                     vertex: tuple[float, float]) -> tuple[float, float, float]:
    """Cartesian y = A x^2 + B x + C coefficients of the polar model.

    Exact for a vertical axis; a tilted parabola has no exact single-valued
    quadratic, so axes off vertical are resolved by a deterministic
    least-squares fit of sampled model points. Near-horizontal axes have no
    y(x) form at all.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    if abs(math.sin(theta_axis)) < 1e-3:
        raise DegenerateAxis(f"axis {theta_axis:.6f} rad is too close to horizontal")
    xv, yv = vertex
    if abs(math.cos(theta_axis)) < 1e-9:
        sign = 1.0 if math.sin(theta_axis) > 0 else -1.0
        a = sign / (2.0 * d)
        return (a, -2.0 * a * xv, a * xv * xv + yv)
    psis = np.linspace(-2.0, 2.0, 201)
    xs, ys = parabola_points(d, theta_axis, vertex, psis)
    a, b, c = np.polyfit(xs, ys, 2)
    return (float(a), float(b), float(c))


def parabolic_hough(
    edges: EdgeMap,
    pupil: PupilCircle,
    which: str,
    axis_range_deg: float = DEFAULT_AXIS_RANGE_DEG,
    axis_bin_deg: float = DEFAULT_AXIS_BIN_DEG,
    d_bin: float = DEFAULT_D_BIN,
    vote_threshold: Optional[float] = None,
    vote_frac: float = DEFAULT_PARABOLA_VOTE_FRAC,
    band_factor: float = ANNULUS_OUTER,
    return_accumulator: bool = False,
):
    """Detect one eyelid parabola in the band above/below the pupil center.

    The accumulator is (axis direction, d): every band edge point at polar
    (rho, phi) votes d = rho * (1 + cos(phi - theta_v)) for each candidate
    vertex direction theta_v within +/-axis_range_deg of vertical.
    """
    if which not in ("upper", "lower"):
        raise ValueError("which must be 'upper' or 'lower'")
    r = pupil.radius
    dx = edges.xs.astype(np.float64) - pupil.cx
    dy = edges.ys.astype(np.float64) - pupil.cy
    in_cols = np.abs(dx) <= band_factor * r
    band = in_cols & ((dy < 0) if which == "upper" else (dy > 0))
    if not band.any():
        raise NoParabolaFound(f"no edge points in the {which} band")
    dx, dy = dx[band], dy[band]

    vertical = -math.pi / 2.0 if which == "upper" else math.pi / 2.0
    half = math.radians(axis_range_deg)
    bin_rad = math.radians(axis_bin_deg)
    n_theta = max(1, int(round(2.0 * half / bin_rad)))
    theta_v = vertical - half + (np.arange(n_theta) + 0.5) * bin_rad

    d_lo, d_hi = 2.0 * r, 8.0 * r
    counts = kernels.parabola_votes(
        np.ascontiguousarray(np.hypot(dx, dy)),
        np.ascontiguousarray(np.arctan2(dy, dx)),
        np.ascontiguousarray(theta_v),
        d_lo, d_hi, d_bin,
    )
    acc = Accumulator(counts, ((vertical - half, bin_rad), (d_lo, d_bin)))

    if vote_threshold is None:
        vote_threshold = vote_frac * 2.0 * band_factor * r
    try:
        it, idx = accumulator_peak(acc, vote_threshold)
    except AccumulatorPeakNotFound as exc:
        raise NoParabolaFound(str(exc)) from exc

    tv = acc.bin_center(0, it)
    d = acc.bin_center(1, idx)
    vertex = (pupil.cx + 0.5 * d * math.cos(tv), pupil.cy + 0.5 * d * math.sin(tv))
    theta_axis = math.atan2(-math.sin(tv), -math.cos(tv))  # opening = away from vertex
    params = ParabolaParams(
        d=d, theta_axis=theta_axis, vertex=vertex,
        quad=convert_parabola(d, theta_axis, vertex),
    )
    return (params, acc) if return_accumulator else params
