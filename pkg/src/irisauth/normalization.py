"""Rubber-sheet normalization: map the iris annulus to a fixed 64x256
pseudo-polar strip with an occlusion mask, then equalize its contrast."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GeometryInvalid
from .hough import EllipseParams, ParabolaParams
from .imaging import GrayImage, equalization_map
from .segmentation import PupilCircle

__all__ = [
    "STRIP_ROWS",
    "STRIP_COLS",
    "IrisGeometry",
    "NormalizedStrip",
    "boundary_points",
    "source_point",
    "rubber_sheet",
    "occlusion_fraction",
    "equalize_strip",
]

STRIP_ROWS = 64
STRIP_COLS = 256

# Slack for "on the pupil boundary" tests against float roundoff.
_PUPIL_TOL = 1e-6
_LID_GUARD = 3.0  # pixels masked inside the fitted lid curve


@dataclass(frozen=True)
class IrisGeometry:
    pupil: PupilCircle
    ellipse: EllipseParams
    upper_lid: Optional[ParabolaParams] = None
    lower_lid: Optional[ParabolaParams] = None


@dataclass(frozen=True)
class NormalizedStrip:
    """64x256 intensity strip; mask bit 1 = valid iris texture."""

    values: np.ndarray   # float64, [0, 255] in the integer-image path
    mask: np.ndarray     # bool

    def __post_init__(self):
        if self.values.shape != (STRIP_ROWS, STRIP_COLS):
            raise ValueError(f"strip must be {STRIP_ROWS}x{STRIP_COLS}")
        if self.mask.shape != self.values.shape:
            raise ValueError("mask shape must match values")


def boundary_points(geom: IrisGeometry, theta: float):
    """Pupil-circle and iris-ellipse boundary points at angle theta."""
    p = geom.pupil
    e = geom.ellipse
    ct, st = math.cos(theta), math.sin(theta)
    return (p.cx + p.radius * ct, p.cy + p.radius * st), (e.cx + e.a * ct, e.cy + e.b * st)


def source_point(geom: IrisGeometry, r: float, theta: float):
    """Linear blend between the two boundary points (r=0 pupil, r=1 iris)."""
    (xp, yp), (xi, yi) = boundary_points(geom, theta)
    return ((1.0 - r) * xp + r * xi, (1.0 - r) * yp + r * yi)


def _bilinear(px: np.ndarray, xs: np.ndarray, ys: np.ndarray):
    """Bilinear samples plus an in-bounds flag per point."""
    h, w = px.shape
    inside = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    xc = np.clip(xs, 0, w - 1)
    yc = np.clip(ys, 0, h - 1)
    x0 = np.clip(np.floor(xc).astype(np.int64), 0, w - 2) if w > 1 else np.zeros_like(xc, np.int64)
    y0 = np.clip(np.floor(yc).astype(np.int64), 0, h - 2) if h > 1 else np.zeros_like(yc, np.int64)
    fx = xc - x0
    fy = yc - y0
    v00 = px[y0, x0]
    v01 = px[y0, x0 + 1]
    v10 = px[y0 + 1, x0]
    v11 = px[y0 + 1, x0 + 1]
    vals = (v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy)
            + v10 * (1 - fx) * fy + v11 * fx * fy)
    return vals, inside


def rubber_sheet(img: GrayImage, geom: IrisGeometry) -> NormalizedStrip:
    """Sample the annulus between pupil circle and iris ellipse onto the strip.

    Cell (i, j) uses r = i/63, theta = 2*pi*j/256. Cells whose source point
    is outside the image, inside the pupil, or behind a detected eyelid are
    masked out rather than rejected.
    """
    p = geom.pupil
    if not (0 <= p.cx <= img.width - 1 and 0 <= p.cy <= img.height - 1):
        raise GeometryInvalid("pupil center outside the image")

    r = (np.arange(STRIP_ROWS) / (STRIP_ROWS - 1))[:, None]
    theta = (2.0 * math.pi * np.arange(STRIP_COLS) / STRIP_COLS)[None, :]
    ct, st = np.cos(theta), np.sin(theta)
    xp = p.cx + p.radius * ct
    yp = p.cy + p.radius * st
    xi = geom.ellipse.cx + geom.ellipse.a * ct
    yi = geom.ellipse.cy + geom.ellipse.b * st
    xs = (1.0 - r) * xp + r * xi
    ys = (1.0 - r) * yp + r * yi

    vals, inside = _bilinear(img.pixels.astype(np.float64), xs, ys)
    mask = inside
    dist = np.hypot(xs - p.cx, ys - p.cy)
    mask &= dist >= p.radius - _PUPIL_TOL
    for lid, above in ((geom.upper_lid, True), (geom.lower_lid, False)):
        if lid is None:
            continue
        a, b, c = lid.quad
        y_lid = a * xs * xs + b * xs + c
        # Guard band: the fitted lid curve can sit a few pixels off the true
        # boundary, and lid pixels carry no iris texture, so mask slightly
        # inside the fitted curve rather than exactly up to it.
        if above:
            mask &= ys >= y_lid + _LID_GUARD
        else:
            mask &= ys <= y_lid - _LID_GUARD
    vals = np.where(mask, vals, 0.0)
    return NormalizedStrip(values=vals, mask=mask)


def occlusion_fraction(strip: NormalizedStrip) -> float:
    return float(np.count_nonzero(~strip.mask)) / strip.mask.size


def equalize_strip(strip: NormalizedStrip) -> NormalizedStrip:
    """Histogram-equalize the unmasked cells; masked cells and the mask
    itself are untouched."""
    levels = np.clip(np.rint(strip.values), 0, 255).astype(np.int64)
    hist = np.bincount(levels[strip.mask].ravel(), minlength=256)
    remap = equalization_map(hist)
    out = np.where(strip.mask, remap[levels].astype(np.float64), strip.values)
    return NormalizedStrip(values=out, mask=strip.mask.copy())
