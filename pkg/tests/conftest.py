"""Shared fixtures and synthetic-data helpers for the test suite."""

import math

import numpy as np
import pytest

from irisauth.hough import EllipseParams, ParabolaParams
from irisauth.normalization import IrisGeometry, NormalizedStrip
from irisauth.segmentation import PupilCircle
from irisauth.synth import EyeSpec, render

N_HARMONICS = 16
TEXTURE_AMP = 45.0


def lid_from_quad(quad, d=100.0, which="upper"):
    """Wrap a y = Ax^2 + Bx + C triple as ParabolaParams; only the quad is
    consumed by normalization, so the polar fields carry nominal values."""
    a, b, c = quad
    xv = -b / (2.0 * a) if a else 0.0
    yv = a * xv * xv + b * xv + c
    axis = math.pi / 2 if which == "upper" else -math.pi / 2
    return ParabolaParams(d=d, theta_axis=axis, vertex=(xv, yv), quad=quad)


def geometry_from_truth(truth):
    """Exact IrisGeometry from a synthetic render's ground-truth record.

    Only valid for unrotated renders: the truth quads live in the
    derotated frame.
    """
    pupil = PupilCircle(truth["cx"], truth["cy"], truth["r"])
    ellipse = EllipseParams(a=truth["a"], b=truth["b"],
                            cx=truth["cx"], cy=truth["cy"])
    upper = (lid_from_quad(truth["upper_quad"], which="upper")
             if truth["upper_quad"] else None)
    lower = (lid_from_quad(truth["lower_quad"], which="lower")
             if truth["lower_quad"] else None)
    return IrisGeometry(pupil=pupil, ellipse=ellipse,
                        upper_lid=upper, lower_lid=lower)


def random_texture_strip(rng):
    """Fully valid strip with an independent random band-limited texture.

    Same harmonic family as the synthetic eye generator, painted directly
    in strip coordinates via one complex rank-16 product.
    """
    m = rng.integers(1, 11, N_HARMONICS)
    q = rng.uniform(0.25, 5.0, N_HARMONICS)
    psi = rng.uniform(0.0, 2.0 * math.pi, N_HARMONICS)
    amp = rng.uniform(0.5, 1.0, N_HARMONICS)
    amp *= TEXTURE_AMP / amp.sum()
    rho = np.arange(64) / 63.0
    phi = 2.0 * math.pi * np.arange(256) / 256.0
    coeff = (amp * np.exp(1j * psi))[:, None] * np.exp(
        2j * math.pi * np.outer(q, rho))              # (16, 64)
    carrier = np.exp(1j * np.outer(m, phi))           # (16, 256)
    tex = 128.0 + (coeff.T @ carrier).real
    return NormalizedStrip(values=np.clip(tex, 0, 255),
                           mask=np.ones((64, 256), dtype=bool))


@pytest.fixture(scope="session")
def clean_eye():
    """Default synthetic eye with both lids, no rotation, no noise."""
    spec = EyeSpec(upper_lid_d=128.0, lower_lid_d=136.0)
    img, truth = render(spec, seed=0)
    return spec, img, truth
