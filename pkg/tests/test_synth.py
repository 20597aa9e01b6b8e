import dataclasses
import math

import numpy as np
import pytest

from irisauth.errors import SpecInvalid
from irisauth.normalization import rubber_sheet
from irisauth.synth import EyeSpec, random_spec, render

from conftest import geometry_from_truth


def test_render_is_deterministic():
    spec = EyeSpec(noise_amp=10, upper_lid_d=128.0, lower_lid_d=136.0)
    a, _ = render(spec, seed=7)
    b, _ = render(spec, seed=7)
    assert a.pixels.tobytes() == b.pixels.tobytes()
    c, _ = render(spec, seed=8)
    assert a.pixels.tobytes() != c.pixels.tobytes()


def test_noise_seed_is_irrelevant_without_noise():
    spec = EyeSpec()
    a, _ = render(spec, seed=1)
    b, _ = render(spec, seed=2)
    assert a.pixels.tobytes() == b.pixels.tobytes()


def test_spec_validation():
    with pytest.raises(SpecInvalid):
        EyeSpec(pupil_radius=0.0).validate()
    with pytest.raises(SpecInvalid):
        EyeSpec(pupil_radius=40.0, a=39.0).validate()
    with pytest.raises(SpecInvalid):
        EyeSpec(pupil_radius=40.0, a=120.0).validate()     # > 2.4 r
    with pytest.raises(SpecInvalid):
        EyeSpec(cx=-4.0).validate()


def test_truth_record_matches_spec(clean_eye):
    spec, img, truth = clean_eye
    assert (truth["cx"], truth["cy"], truth["r"]) == (
        spec.cx, spec.cy, spec.pupil_radius)
    assert (truth["a"], truth["b"]) == (spec.a, spec.b)
    assert truth["upper_quad"] is not None and truth["lower_quad"] is not None
    # rendered pupil pixels have the pupil intensity
    assert img.pixels[int(spec.cy), int(spec.cx)] == spec.pupil_intensity


def test_corners_satisfy_both_lid_quadratics():
    spec = EyeSpec(upper_lid_d=128.0, lower_lid_d=136.0)
    _, truth = render(spec, seed=0)
    qu, ql = truth["upper_quad"], truth["lower_quad"]
    for x, y in truth["corners"]:
        assert abs(qu[0] * x * x + qu[1] * x + qu[2] - y) < 1e-6
        assert abs(ql[0] * x * x + ql[1] * x + ql[2] - y) < 1e-6


def test_rotation_shifts_texture_cyclically():
    base = EyeSpec(texture_seed=11)
    rot_deg = 10.0
    rotated = dataclasses.replace(base, rotation=math.radians(rot_deg))
    strips = []
    for spec in (base, rotated):
        img, truth = render(spec, seed=0)
        geom = geometry_from_truth({**truth, "upper_quad": None,
                                    "lower_quad": None})
        strips.append(rubber_sheet(img, geom))
    shift = round(rot_deg / 360.0 * 256)
    aligned = np.roll(strips[1].values, -shift, axis=1)
    inner = slice(4, 56)   # boundary rows see pupil/sclera interpolation
    diff = np.abs(strips[0].values[inner] - aligned[inner])
    assert diff.mean() < 5.0


def test_random_spec_is_always_valid():
    rng = np.random.default_rng(0)
    for _ in range(20):
        spec = random_spec(rng)
        spec.validate()
        assert spec.upper_lid_d is not None and spec.lower_lid_d is not None
    for _ in range(5):
        random_spec(rng, with_lids=False).validate()
