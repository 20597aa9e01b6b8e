"""Grayscale primitives: image container, histogram, Sobel gradient,
edge thresholding and histogram equalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall

__all__ = [
    "GrayImage",
    "EdgeMap",
    "compute_histogram",
    "gradient_magnitude",
    "threshold_edges",
    "equalize_histogram",
]


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image, row-major (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be a 2D array with positive dimensions")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class EdgeMap:
    """Pixels whose gradient magnitude passed the threshold."""

    xs: np.ndarray          # column of each edge point
    ys: np.ndarray          # row of each edge point
    magnitudes: np.ndarray
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.xs)


def compute_histogram(img: GrayImage) -> np.ndarray:
    """256-bin intensity histogram; bins sum to the pixel count."""
    return np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def gradient_magnitude(img: GrayImage) -> np.ndarray:
    """Sobel magnitude rounded to integers; border pixels are zero."""
    if img.width < 3 or img.height < 3:
        raise ImageTooSmall(f"gradient needs at least 3x3, got {img.height}x{img.width}")
    px = img.pixels.astype(np.float64)
    gx = ndimage.correlate(px, _SOBEL_X, mode="constant")
    gy = ndimage.correlate(px, _SOBEL_Y, mode="constant")
    mag = np.rint(np.hypot(gx, gy))
    mag[0, :] = mag[-1, :] = 0
    mag[:, 0] = mag[:, -1] = 0
    return mag.astype(np.int64)


def threshold_edges(grid: np.ndarray, t: float) -> EdgeMap:
    """Keep every pixel whose gradient magnitude is >= t."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    ys, xs = np.nonzero(grid >= t)
    return EdgeMap(
        xs=xs.astype(np.int64),
        ys=ys.astype(np.int64),
        magnitudes=grid[ys, xs],
        width=grid.shape[1],
        height=grid.shape[0],
    )


def equalization_map(hist: np.ndarray) -> np.ndarray:
    """Monotone intensity remap out = floor(255 * cdf(in))."""
    total = int(hist.sum())
    if total == 0:
        return np.arange(256, dtype=np.uint8)
    cdf = np.cumsum(hist) / total
    return np.floor(255.0 * cdf).astype(np.uint8)


def equalize_histogram(img: GrayImage) -> GrayImage:
    """Contrast stretch by the cumulative-distribution remap."""
    remap = equalization_map(compute_histogram(img))
    return GrayImage(remap[img.pixels])
