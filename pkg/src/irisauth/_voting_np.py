"""NumPy implementation of the Hough vote-accumulation kernels.

Import-time fallback for the compiled `_voting_cy` extension; the two must
produce identical integer accumulators (see tests/test_kernel_parity.py).
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def ellipse_votes(dx, dy, lo, hi, bin_w):
    """Accumulate (a, b) votes for an axis-aligned ellipse through each point.

    Each edge offset (dx, dy) defines the one-parameter curve
    a = dx / cos(t), b = dy / sin(t).  The curve is rasterised per
    accumulator column: for every semi-axis bin centre a with a > |dx| the
    crossing b = |dy| * a / sqrt(a^2 - dx^2) is voted when it lands in
    [lo, hi].  Column-wise sampling places one vote exactly on the curve in
    every column it crosses, so a point can never skip the cell of the true
    ellipse the way a fixed grid of t samples can where the curve is steep.
    Returns an (n_a, n_b) int64 grid with n_a = n_b = ceil((hi - lo)/bin_w).
    """
    n_bins = int(np.ceil((hi - lo) / bin_w))
    acc = np.zeros((n_bins, n_bins), dtype=np.int64)
    a_centers = lo + (np.arange(n_bins) + 0.5) * bin_w
    abs_dx = np.abs(np.asarray(dx, dtype=np.float64))
    abs_dy = np.abs(np.asarray(dy, dtype=np.float64))
    for px, py in zip(abs_dx, abs_dy):
        under = a_centers * a_centers - px * px
        ok = under > 1e-12
        if not ok.any():
            continue
        b = py * a_centers[ok] / np.sqrt(under[ok])
        ia = np.nonzero(ok)[0]
        inb = (b >= lo) & (b <= hi)
        if not inb.any():
            continue
        ib = np.minimum(((b[inb] - lo) / bin_w).astype(np.int64), n_bins - 1)
        np.add.at(acc, (ia[inb], ib), 1)
    return acc


def parabola_votes(rdist, phi, theta_v, d_lo, d_hi, bin_w):
    """Accumulate (axis-direction, d) votes for the focus-at-center parabola
    family d = r * (1 + cos(phi - theta)). Returns (len(theta_v), n_d) int64."""
    n_d = int(np.ceil((d_hi - d_lo) / bin_w))
    acc = np.zeros((len(theta_v), n_d), dtype=np.int64)
    for k, tv in enumerate(theta_v):
        d = rdist * (1.0 + np.cos(phi - tv))
        ok = (d >= d_lo) & (d <= d_hi)
        if not ok.any():
            continue
        idx = np.minimum(((d[ok] - d_lo) / bin_w).astype(np.int64), n_d - 1)
        np.add.at(acc[k], idx, 1)
    return acc
