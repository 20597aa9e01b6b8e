"""Deterministic synthetic eye generator with exact ground truth.

The iris texture is a seeded sum of radial-angular sinusoids painted in a
polar chart around the pupil center, so rotating the eye shifts the texture
angularly without changing it. The outer ellipse stays axis-aligned under
rotation (foreshortening is a camera property, head roll is not); eyelids
and texture rotate together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import SpecInvalid
from .imaging import GrayImage

__all__ = ["EyeSpec", "random_spec", "render"]

N_HARMONICS = 16
TEXTURE_AMP = 45.0
TEXTURE_BASE = 128.0


@dataclass(frozen=True)
class EyeSpec:
    width: int = 352
    height: int = 288
    cx: float = 176.0
    cy: float = 144.0
    pupil_radius: float = 40.0
    pupil_intensity: int = 20
    a: float = 72.0             # outer ellipse semi-axis along x
    b: float = 64.0             # along y
    texture_seed: int = 0
    sclera_intensity: int = 230
    lid_intensity: int = 180
    upper_lid_d: Optional[float] = None   # semi-latus rectum, focus at center
    lower_lid_d: Optional[float] = None
    rotation: float = 0.0       # radians, about the pupil center
    noise_amp: int = 0

    def validate(self) -> None:
        r = self.pupil_radius
        if r <= 0:
            raise SpecInvalid("pupil radius must be positive")
        if r >= min(self.a, self.b):
            raise SpecInvalid("pupil must fit inside the iris ellipse")
        for ax in (self.a, self.b):
            if not 1.2 <= ax / r <= 2.4:
                raise SpecInvalid(f"semi-axis {ax} outside [1.2r, 2.4r]")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise SpecInvalid("pupil center outside the image")

    def lid_quads(self):
        """Unrotated-frame (A, B, C) of each lid, or None. Upper opens
        downward (A > 0 with y growing down), lower upward."""
        quads = []
        for d, sign in ((self.upper_lid_d, 1.0), (self.lower_lid_d, -1.0)):
            if d is None:
                quads.append(None)
                continue
            a = sign / (2.0 * d)
            yv = self.cy - sign * d / 2.0
            quads.append((a, -2.0 * a * self.cx, a * self.cx ** 2 + yv))
        return tuple(quads)

    def corners(self):
        """Image-frame lid intersection points (left, right), or None."""
        qu, ql = self.lid_quads()
        if qu is None or ql is None:
            return None
        da, db, dc = qu[0] - ql[0], qu[1] - ql[1], qu[2] - ql[2]
        disc = db * db - 4 * da * dc
        if disc <= 0:
            return None
        pts = []
        for x in sorted(((-db - math.sqrt(disc)) / (2 * da),
                         (-db + math.sqrt(disc)) / (2 * da))):
            y = qu[0] * x * x + qu[1] * x + qu[2]
            # the whole eye is rotated about the center
            dx, dy = x - self.cx, y - self.cy
            c, s = math.cos(self.rotation), math.sin(self.rotation)
            pts.append((self.cx + c * dx - s * dy, self.cy + s * dx + c * dy))
        return tuple(pts)


def _texture_params(seed: int):
    rng = np.random.default_rng(seed)
    m = rng.integers(1, 11, size=N_HARMONICS)          # angular cycles per rev
    q = rng.uniform(0.25, 5.0, size=N_HARMONICS)       # radial cycles
    psi = rng.uniform(0.0, 2.0 * math.pi, size=N_HARMONICS)
    amp = rng.uniform(0.5, 1.0, size=N_HARMONICS)
    amp *= TEXTURE_AMP / amp.sum()
    return m, q, psi, amp


def render(spec: EyeSpec, seed: int = 0) -> tuple[GrayImage, dict]:
    """Paint the eye and return it with its exact geometry record.

    `seed` drives only the additive noise; the identity texture comes from
    spec.texture_seed, so two captures of one identity share texture.
    """
    spec.validate()
    ys, xs = np.mgrid[0: spec.height, 0: spec.width].astype(np.float64)
    dx = xs - spec.cx
    dy = ys - spec.cy
    rdist = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)

    # ellipse radius along each image direction
    r_ell = (spec.a * spec.b) / np.hypot(spec.b * np.cos(phi), spec.a * np.sin(phi))

    out = np.full((spec.height, spec.width), float(spec.sclera_intensity))

    # iris texture in the derotated chart
    iris = (rdist > spec.pupil_radius) & (rdist <= r_ell)
    rho_n = np.clip((rdist - spec.pupil_radius) / np.maximum(r_ell - spec.pupil_radius, 1e-9), 0, 1)
    phi_u = phi - spec.rotation
    m, q, psi, amp = _texture_params(spec.texture_seed)
    tex = np.full_like(out, TEXTURE_BASE)
    for k in range(N_HARMONICS):
        tex += amp[k] * np.cos(m[k] * phi_u + 2.0 * math.pi * q[k] * rho_n + psi[k])
    out[iris] = tex[iris]

    out[rdist <= spec.pupil_radius] = float(spec.pupil_intensity)

    # eyelids occlude in the derotated frame
    qu, ql = spec.lid_quads()
    if qu is not None or ql is not None:
        c, s = math.cos(-spec.rotation), math.sin(-spec.rotation)
        xu = spec.cx + c * dx - s * dy
        yu = spec.cy + s * dx + c * dy
        if qu is not None:
            out[yu < qu[0] * xu * xu + qu[1] * xu + qu[2]] = float(spec.lid_intensity)
        if ql is not None:
            out[yu > ql[0] * xu * xu + ql[1] * xu + ql[2]] = float(spec.lid_intensity)

    if spec.noise_amp > 0:
        rng = np.random.default_rng(seed)
        out += rng.integers(-spec.noise_amp, spec.noise_amp + 1,
                            size=out.shape).astype(np.float64)

    img = GrayImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))
    truth = {
        "cx": spec.cx, "cy": spec.cy, "r": spec.pupil_radius,
        "a": spec.a, "b": spec.b,
        "rotation": spec.rotation,
        "upper_quad": qu, "lower_quad": ql,
        "corners": spec.corners(),
        "noise_amp": spec.noise_amp,
        "texture_seed": spec.texture_seed,
    }
    return img, truth


def random_spec(rng: np.random.Generator, with_lids: bool = True,
                width: int = 352, height: int = 288) -> EyeSpec:
    """Draw a well-posed eye: axes safely inside the search annulus, lids
    (when present) high enough to leave the pupil clear."""
    r = float(rng.uniform(32.0, 46.0))
    cx = float(rng.uniform(width / 2 - 15, width / 2 + 15))
    cy = float(rng.uniform(height / 2 - 12, height / 2 + 12))
    a = float(rng.uniform(1.4, 2.2) * r)
    b = float(rng.uniform(1.4, 2.2) * r)
    spec = EyeSpec(
        width=width, height=height, cx=cx, cy=cy,
        pupil_radius=r, a=a, b=b,
        texture_seed=int(rng.integers(0, 2**31)),
    )
    if with_lids:
        # Keep the lid vertex outside ~0.75 of the iris semi-axis so lids
        # clip the outer annulus without swallowing large code sectors.
        d_lo = max(2.8 * r, 1.5 * b)
        spec = replace(
            spec,
            upper_lid_d=float(rng.uniform(d_lo, d_lo + 0.8 * r)),
            lower_lid_d=float(rng.uniform(d_lo, d_lo + 0.8 * r)),
        )
    return spec
