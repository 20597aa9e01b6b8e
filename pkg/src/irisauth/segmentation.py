"""Pupil extraction: dark histogram peak, threshold mask, largest
connected component, projection-midpoint center and area radius."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyPupil, NoDarkPeak
from .imaging import GrayImage

__all__ = [
    "PupilCircle",
    "pupil_threshold",
    "binarize_pupil",
    "pupil_center",
    "pupil_radius",
    "segment_pupil",
]

# The pupil is the darkest structure in the eye; searching the whole
# histogram would pick the sclera on bright images.
DARK_BAND_MAX = 100
DEFAULT_MARGIN = 5


@dataclass(frozen=True)
class PupilCircle:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("pupil radius must be positive")


def pupil_threshold(hist: np.ndarray, dark_max: int = DARK_BAND_MAX) -> int:
    """Index of the fullest bin within the dark band [0, dark_max].

    Ties go to the lower intensity.
    """
    band = np.asarray(hist[: dark_max + 1])
    if band.max(initial=0) <= 0:
        raise NoDarkPeak(f"no pixels with intensity <= {dark_max}")
    return int(np.argmax(band))


def binarize_pupil(img: GrayImage, level: int, margin: int = DEFAULT_MARGIN) -> np.ndarray:
    """Boolean mask of the largest 4-connected region at or below level+margin."""
    if not 0 <= level <= 255:
        raise ValueError("level must be in [0, 255]")
    raw = img.pixels <= level + margin
    if not raw.any():
        raise EmptyPupil(f"no pixel at or below {level + margin}")
    labels, count = ndimage.label(raw)  # default structure = 4-connectivity
    if count == 1:
        return raw
    sizes = ndimage.sum_labels(raw, labels, index=np.arange(1, count + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def pupil_center(mask: np.ndarray) -> tuple[float, float]:
    """Midpoints of the x- and y-projection supports of the mask."""
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        raise EmptyPupil("empty mask")
    return (float(xs.min() + xs.max()) / 2.0, float(ys.min() + ys.max()) / 2.0)


def pupil_radius(mask: np.ndarray) -> float:
    """Radius of the disk with the same area as the mask."""
    area = int(np.count_nonzero(mask))
    if area == 0:
        raise EmptyPupil("empty mask")
    return math.sqrt(area / math.pi)


def segment_pupil(img: GrayImage, margin: int = DEFAULT_MARGIN,
                  dark_max: int = DARK_BAND_MAX) -> tuple[PupilCircle, np.ndarray]:
    """Full pupil stage: threshold level -> mask -> circle."""
    level = pupil_threshold(np.bincount(img.pixels.ravel(), minlength=256), dark_max)
    mask = binarize_pupil(img, level, margin)
    cx, cy = pupil_center(mask)
    return PupilCircle(cx, cy, pupil_radius(mask)), mask
