"""Code comparison: masked normalized Hamming distance, eye-corner rotation
estimation and rotation-corrected alignment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoding import CODE_BITS, N_ANGULAR, N_RADIAL, N_SCALES, IrisCode
from .errors import (
    CoincidentPoints,
    InsufficientOverlap,
    NoIntersection,
    TangentLids,
)
from .hough import ParabolaParams

__all__ = [
    "DEFAULT_THRESHOLD",
    "MIN_OVERLAP_BITS",
    "MatchResult",
    "EyeCorners",
    "decide",
    "hamming_distance",
    "eye_corners",
    "rotation_angle",
    "shift_code",
    "align_and_match",
]

DEFAULT_THRESHOLD = 0.39
MIN_OVERLAP_BITS = 256
_COLS_PER_SLOT = 256 // N_ANGULAR   # strip columns per angular code position


@dataclass(frozen=True)
class MatchResult:
    hd: float
    compared_bits: int
    shift_applied: int   # signed strip-column offset applied to code b
    decision: str        # "authentic" | "impostor"


@dataclass(frozen=True)
class EyeCorners:
    p1: tuple[float, float]   # left intersection of the lid parabolas
    p2: tuple[float, float]   # right intersection


def decide(hd: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    """Authentic strictly below the threshold; the boundary is an impostor."""
    return "authentic" if hd < threshold else "impostor"


def hamming_distance(a: IrisCode, b: IrisCode, threshold: float = DEFAULT_THRESHOLD,
                     shift_applied: int = 0) -> MatchResult:
    """Fraction of differing bits among jointly valid positions."""
    joint = a.mask & b.mask
    n = int(joint.sum())
    if n < MIN_OVERLAP_BITS:
        raise InsufficientOverlap(f"only {n} jointly valid bits")
    differing = int(((a.bits ^ b.bits) & joint).sum())
    hd = differing / n
    return MatchResult(hd=hd, compared_bits=n, shift_applied=shift_applied,
                       decision=decide(hd, threshold))


def eye_corners(upper: ParabolaParams, lower: ParabolaParams,
                tol: float = 1e-9) -> EyeCorners:
    """Intersections of the two lid parabolas, left then right."""
    a1, b1, c1 = upper.quad
    a2, b2, c2 = lower.quad
    da, db, dc = a1 - a2, b1 - b2, c1 - c2
    if abs(da) < tol:
        if abs(db) < tol:
            raise NoIntersection("parabolas are parallel")
        x = -dc / db
        y = a1 * x * x + b1 * x + c1
        raise TangentLids("equal curvature: single crossing", point=(x, y))
    disc = db * db - 4.0 * da * dc
    if disc < -tol:
        raise NoIntersection("lid parabolas do not intersect")
    if disc < tol:
        x = -db / (2.0 * da)
        y = a1 * x * x + b1 * x + c1
        raise TangentLids("lid parabolas are tangent", point=(x, y))
    sq = math.sqrt(disc)
    x1, x2 = sorted(((-db - sq) / (2.0 * da), (-db + sq) / (2.0 * da)))
    return EyeCorners(
        p1=(x1, a1 * x1 * x1 + b1 * x1 + c1),
        p2=(x2, a1 * x2 * x2 + b1 * x2 + c1),
    )


def rotation_angle(corner: tuple[float, float], center: tuple[float, float]) -> float:
    """Signed inclination of the corner above/below the horizontal through
    the center: arccos(|dx| / hypot), with the sign of dy."""
    dx = corner[0] - center[0]
    dy = corner[1] - center[1]
    hyp = math.hypot(dx, dy)
    if hyp < 1e-12:
        raise CoincidentPoints("corner coincides with the center")
    theta = math.acos(min(1.0, abs(dx) / hyp))
    return math.copysign(theta, dy) if dy != 0 else 0.0


def _roll_pairs(code: IrisCode, slots: int) -> IrisCode:
    """Cyclic shift by whole angular positions within every (scale, radial)
    block."""
    shape = (N_SCALES * N_RADIAL, N_ANGULAR, 2)
    bits = np.roll(code.bits.reshape(shape), slots, axis=1).reshape(CODE_BITS)
    mask = np.roll(code.mask.reshape(shape), slots, axis=1).reshape(CODE_BITS)
    return IrisCode(bits=bits, mask=mask, subject=code.subject, capture=code.capture)


def shift_code(code: IrisCode, columns: int) -> IrisCode:
    """Shift by a strip-column offset, realized at the angular-position
    granularity of the layout (8 columns per position)."""
    return _roll_pairs(code, round(columns / _COLS_PER_SLOT))


def align_and_match(
    a: IrisCode,
    b: IrisCode,
    angle_a: Optional[float] = None,
    angle_b: Optional[float] = None,
    threshold: float = DEFAULT_THRESHOLD,
    search_columns: int = 8,
) -> MatchResult:
    """Rotation-corrected comparison.

    With both capture angles known, b is cyclically shifted by the column
    offset equivalent to the relative angle. Without angles, the best
    (minimal-HD) shift within +/-search_columns is used.
    """
    if angle_a is not None and angle_b is not None:
        d_theta = angle_b - angle_a
        cols = round(d_theta * 256.0 / (2.0 * math.pi))
        return hamming_distance(a, shift_code(b, cols), threshold,
                                shift_applied=cols)
    best: Optional[MatchResult] = None
    max_slot = search_columns // _COLS_PER_SLOT
    for slot in range(-max_slot, max_slot + 1):
        res = hamming_distance(a, _roll_pairs(b, slot), threshold,
                               shift_applied=slot * _COLS_PER_SLOT)
        if best is None or res.hd < best.hd:
            best = res
    return best
