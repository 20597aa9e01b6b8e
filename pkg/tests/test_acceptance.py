"""End-to-end acceptance criteria on synthetic data.

Each test prints a single PASS/FAIL summary line on the live terminal
(via capsys.disabled) in addition to its asserts.
"""

import dataclasses
import math
import time

import numpy as np

import irisauth.hough as hough
import irisauth.matching as matching
import irisauth.pipeline as pipeline
import irisauth.segmentation as segmentation
import irisauth.synth as synth
from irisauth.config import PipelineConfig
from irisauth.encoding import (GaborParams, default_layout, encode,
                               gabor_response, quadrant_code,
                               _window_half_extents)
from irisauth.errors import InsufficientOverlap, PipelineError
from irisauth.imaging import EdgeMap, gradient_magnitude, threshold_edges
from irisauth.normalization import (NormalizedStrip, STRIP_COLS, STRIP_ROWS,
                                    boundary_points, equalize_strip,
                                    rubber_sheet, source_point)

from conftest import random_texture_strip
from test_normalization import concentric_geometry, radial_gradient_image

LAYOUT = default_layout()


def report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{name}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_impostor_mean(capsys):
    """1000 random-texture strips, 1000 sampled pairs:
    mean HD in [0.49, 0.51], under 30 s."""
    t0 = time.time()
    rng = np.random.default_rng(99)
    codes = [encode(equalize_strip(random_texture_strip(rng)), LAYOUT)
             for _ in range(1000)]
    pairs = rng.choice(1000, size=(1200, 2))
    pairs = pairs[pairs[:, 0] != pairs[:, 1]][:1000]
    hds = [matching.hamming_distance(codes[a], codes[b]).hd for a, b in pairs]
    mean = float(np.mean(hds))
    elapsed = time.time() - t0
    ok = 0.49 <= mean <= 0.51 and elapsed < 30.0
    report(capsys, "criterion 1", ok,
           f"mean HD {mean:.4f} over {len(hds)} pairs "
           f"(want [0.49, 0.51]), {elapsed:.1f}s (limit 30s)")


def test_criterion_02_threshold_regime(capsys):
    """20 identities x 4 captures (noise 10, rotations within +/-10 deg):
    every genuine HD < 0.39, >= 99% impostor HD > 0.39,
    calibrated threshold in [0.31, 0.47], under 60 s."""
    t0 = time.time()
    rng = np.random.default_rng(7)
    cfg = PipelineConfig(pupil_margin=20)      # noise 10 needs ~2x margin
    codes = []
    failures = 0
    for ident in range(20):
        base = synth.random_spec(rng, with_lids=True)
        for cap in range(4):
            rot = rng.uniform(-10, 10) * math.pi / 180.0
            spec = dataclasses.replace(base, rotation=rot, noise_amp=10)
            img, _ = synth.render(spec, seed=5000 + ident * 10 + cap)
            try:
                res = pipeline.run_pipeline(img, cfg)
            except PipelineError:
                failures += 1
                continue
            codes.append((ident, res.code, res.rotation))
    genuine, impostor = [], []
    for x in range(len(codes)):
        for y in range(x + 1, len(codes)):
            try:
                m = matching.align_and_match(codes[x][1], codes[y][1],
                                             codes[x][2], codes[y][2])
            except InsufficientOverlap:
                continue
            (genuine if codes[x][0] == codes[y][0] else impostor).append(m.hd)
    g = np.array(genuine)
    i = np.array(impostor)
    threshold = pipeline.calibrate_threshold(g, i)
    elapsed = time.time() - t0
    impostor_above = float((i > 0.39).mean())
    ok = (failures == 0 and g.max() < 0.39 and impostor_above >= 0.99
          and 0.31 <= threshold <= 0.47 and elapsed < 60.0)
    report(capsys, "criterion 2", ok,
           f"genuine max {g.max():.3f} (<0.39), impostors above 0.39: "
           f"{100 * impostor_above:.2f}% (>=99%), calibrated threshold "
           f"{threshold:.3f} (in [0.31, 0.47]), {failures} pipeline failures, "
           f"{elapsed:.1f}s (limit 60s)")


def _geometry_trial(clutter_frac, seed=123):
    """50 random eyes; count cases with pupil center error <= 2 px,
    radius error <= 5%, and (a, b) within one accumulator bin of truth."""
    rng = np.random.default_rng(seed)
    ok = 0
    for k in range(50):
        spec = synth.random_spec(rng, with_lids=bool(rng.integers(0, 2)))
        img, _ = synth.render(spec, seed=900 + k)
        try:
            if clutter_frac:
                pupil, _ = segmentation.segment_pupil(img, margin=5, dark_max=100)
                edges = threshold_edges(gradient_magnitude(img), 200.0)
                n = int(len(edges) * clutter_frac)
                cx = rng.integers(0, img.width, n)
                cy = rng.integers(0, img.height, n)
                edges = EdgeMap(xs=np.concatenate([edges.xs, cx]),
                                ys=np.concatenate([edges.ys, cy]),
                                magnitudes=np.concatenate(
                                    [edges.magnitudes, np.full(n, 300.0)]),
                                width=img.width, height=img.height)
                lids = {}
                for which in ("upper", "lower"):
                    try:
                        lid = hough.parabolic_hough(edges, pupil, which)
                        lids[which] = (lid if pipeline._lid_plausible(img, lid, pupil)
                                       else None)
                    except Exception:
                        lids[which] = None
                kept = pipeline._exclude_lid_edges(edges, lids["upper"],
                                                   lids["lower"])
                ell = hough.elliptic_hough(kept, pupil, bin_width=1.0)
                a_m, b_m = ell.a, ell.b
            else:
                res = pipeline.run_pipeline(img)
                geom = res.geometry
                pupil, a_m, b_m = geom.pupil, geom.ellipse.a, geom.ellipse.b
        except PipelineError:
            continue
        center_err = math.hypot(pupil.cx - spec.cx, pupil.cy - spec.cy)
        radius_err = abs(pupil.radius - spec.pupil_radius) / spec.pupil_radius
        if (center_err <= 2.0 and radius_err <= 0.05
                and abs(a_m - spec.a) <= 1.0 and abs(b_m - spec.b) <= 1.0):
            ok += 1
    return ok


def test_criterion_03_segmentation_recovery(capsys):
    """50 random eyes: center <= 2 px, radius <= 5%, (a, b) within one
    accumulator bin, in at least 48/50 cases."""
    ok = _geometry_trial(0.0)
    report(capsys, "criterion 3", ok >= 48, f"{ok}/50 recovered (need >= 48)")


def test_criterion_04_hough_clutter_robustness(capsys):
    """Criterion 3 repeated with 20% uniformly random clutter edges:
    at least 45/50."""
    ok = _geometry_trial(0.2)
    report(capsys, "criterion 4", ok >= 45,
           f"{ok}/50 recovered under 20% clutter (need >= 45)")


def test_criterion_05_quadrant_coder_exhaustive(capsys):
    """10^4 uniformly sampled phases plus the quadrant boundaries reproduce
    the half-open quadrant map with zero violations."""
    rng = np.random.default_rng(5)
    phases = np.concatenate([rng.uniform(0, 2 * math.pi, 10_000),
                             [0.0, math.pi / 2, math.pi, 1.5 * math.pi]])
    violations = 0
    for phi in phases:
        got = quadrant_code(float(phi))
        w = phi % (2 * math.pi)
        expect = ((1, 1) if w < math.pi / 2 else
                  (0, 1) if w < math.pi else
                  (0, 0) if w < 1.5 * math.pi else (1, 0))
        violations += got != expect
    report(capsys, "criterion 5", violations == 0,
           f"{violations} violations over {len(phases)} phases (need 0)")


def test_criterion_06_hamming_identities(capsys):
    """HD(a,a)=0, HD(a,complement(a))=1, symmetry, triangle bound:
    zero violations over 100 random code pairs."""
    from irisauth.encoding import CODE_BITS, IrisCode
    rng = np.random.default_rng(6)
    violations = 0
    for _ in range(100):
        bits = [rng.integers(0, 2, CODE_BITS).astype(np.uint8) for _ in range(3)]
        a, b, c = (IrisCode(bits=x, mask=np.ones(CODE_BITS, dtype=np.uint8))
                   for x in bits)
        comp = IrisCode(bits=1 - bits[0], mask=np.ones(CODE_BITS, dtype=np.uint8))
        checks = [
            matching.hamming_distance(a, a).hd == 0.0,
            matching.hamming_distance(a, comp).hd == 1.0,
            matching.hamming_distance(a, b).hd == matching.hamming_distance(b, a).hd,
            matching.hamming_distance(a, c).hd <= (
                matching.hamming_distance(a, b).hd
                + matching.hamming_distance(b, c).hd + 1e-12),
        ]
        violations += checks.count(False)
    report(capsys, "criterion 6", violations == 0,
           f"{violations} identity violations over 100 pairs (need 0)")


def _dense_oracle(strip, p):
    """Independent nested-loop evaluation of the windowed wavelet response:
    same three-envelope-width truncation and window-mean correction."""
    d_rho = 1.0 / (STRIP_ROWS - 1)
    d_phi = 2.0 * math.pi / STRIP_COLS
    wr, wc = _window_half_extents(p.alpha, p.beta)
    row_c = p.r0 / d_rho
    col_c = p.theta0 / d_phi
    cells = []
    for i in range(STRIP_ROWS):
        if abs(i - row_c) > wr:
            continue
        for j in range(STRIP_COLS):
            dj = (j - col_c + STRIP_COLS / 2) % STRIP_COLS - STRIP_COLS / 2
            if abs(dj) > wc:
                continue
            cells.append((i, j, dj))
    valid = [(i, j, dj) for i, j, dj in cells if strip.mask[i, j]]
    mu = sum(strip.values[i, j] for i, j, _ in valid) / len(valid)
    total = 0j
    for i, j, dj in valid:
        rho = i * d_rho
        dphi = dj * d_phi
        env = math.exp(-(((p.r0 - rho) / p.alpha) ** 2)
                       - ((dphi / p.beta) ** 2))
        total += (env * complex(math.cos(p.omega * dphi),
                                math.sin(p.omega * dphi))
                  * (strip.values[i, j] - mu) * rho * d_rho * d_phi)
    return total


def test_criterion_07_gabor_oracle(capsys):
    """Windowed response equals a dense nested-loop quadrature within 1e-3
    relative magnitude and 1e-3 rad phase on 20 random cases; a constant
    strip yields magnitude below 1e-9."""
    rng = np.random.default_rng(77)
    worst_mag, worst_phase = 0.0, 0.0
    for _ in range(20):
        strip = random_texture_strip(rng)
        alpha, beta, omega = LAYOUT.scales[rng.integers(0, len(LAYOUT.scales))]
        p = GaborParams(omega=omega, alpha=alpha, beta=beta,
                        r0=int(rng.integers(8, 56)) / (STRIP_ROWS - 1),
                        theta0=2 * math.pi * int(rng.integers(0, 256)) / STRIP_COLS)
        got = gabor_response(strip, p)
        want = _dense_oracle(strip, p)
        worst_mag = max(worst_mag, abs(abs(got) - abs(want)) / abs(want))
        dphase = abs(math.atan2(got.imag, got.real)
                     - math.atan2(want.imag, want.real))
        worst_phase = max(worst_phase, min(dphase, 2 * math.pi - dphase))
    flat = NormalizedStrip(values=np.full((STRIP_ROWS, STRIP_COLS), 128.0),
                           mask=np.ones((STRIP_ROWS, STRIP_COLS), bool))
    flat_mag = abs(gabor_response(flat, GaborParams(
        omega=LAYOUT.scales[1][2], alpha=LAYOUT.scales[1][0],
        beta=LAYOUT.scales[1][1], r0=0.5, theta0=math.pi)))
    ok = worst_mag <= 1e-3 and worst_phase <= 1e-3 and flat_mag < 1e-9
    report(capsys, "criterion 7", ok,
           f"worst relative magnitude error {worst_mag:.2e} (<=1e-3), worst "
           f"phase error {worst_phase:.2e} rad (<=1e-3), constant-strip "
           f"magnitude {flat_mag:.2e} (<1e-9)")


def test_criterion_08_rotation_correction(capsys):
    """Same-identity pairs rotated 8 degrees: aligned HD < 0.39 and strictly
    below unaligned HD in >= 95% of 50 trials; corner coordinates satisfy
    both lid quadratics to 1e-6; the 3-4-5 case gives arccos(3/5) to 1e-9."""
    rng = np.random.default_rng(2024)
    cfg = PipelineConfig(pupil_margin=20)
    ok_count, trials = 0, 0
    for k in range(50):
        base = synth.random_spec(rng, with_lids=True)
        s0 = dataclasses.replace(base, rotation=0.0, noise_amp=10)
        s8 = dataclasses.replace(base, rotation=math.radians(8.0), noise_amp=10)
        try:
            r0 = pipeline.run_pipeline(synth.render(s0, seed=100 + k)[0], cfg)
            r8 = pipeline.run_pipeline(synth.render(s8, seed=4100 + k)[0], cfg)
        except PipelineError:
            continue
        trials += 1
        aligned = matching.align_and_match(r0.code, r8.code,
                                           r0.rotation, r8.rotation).hd
        unaligned = matching.hamming_distance(r0.code, r8.code).hd
        if aligned < 0.39 and aligned < unaligned:
            ok_count += 1

    # corner landmarks: algebraic sub-checks
    from test_matching import parabola
    corners = matching.eye_corners(parabola((1.0, 0.0, 0.0)),
                                   parabola((-1.0, 0.0, 2.0)))
    corner_ok = all(abs(x * x - y) < 1e-6 and abs(-x * x + 2 - y) < 1e-6
                    for x, y in (corners.p1, corners.p2))
    angle = matching.rotation_angle((13.0, 24.0), (10.0, 20.0))
    angle_ok = abs(angle - math.acos(3 / 5)) < 1e-9

    ok = trials >= 48 and ok_count >= math.ceil(0.95 * trials) and corner_ok and angle_ok
    report(capsys, "criterion 8", ok,
           f"{ok_count}/{trials} rotated pairs aligned below 0.39 and below "
           f"their unaligned score (need >=95%), corner quadratics to 1e-6: "
           f"{corner_ok}, 3-4-5 angle to 1e-9: {angle_ok}")


def test_criterion_09_normalization_endpoints(capsys):
    """Inner and outer strip rows sample the pupil and ellipse boundaries
    within 0.5 px; the r=0.5 point is the exact boundary average."""
    rng = np.random.default_rng(9)
    worst = 0.0
    exact = True
    for _ in range(10):
        geom = concentric_geometry(
            cx=float(rng.uniform(120, 180)), cy=float(rng.uniform(120, 180)),
            r=float(rng.uniform(30, 45)),
            a=float(rng.uniform(60, 95)), b=float(rng.uniform(60, 95)))
        for theta in rng.uniform(0, 2 * math.pi, 32):
            (xp, yp), (xi, yi) = boundary_points(geom, theta)
            x0, y0 = source_point(geom, 0.0, theta)
            x1, y1 = source_point(geom, 1.0, theta)
            worst = max(worst, math.hypot(x0 - xp, y0 - yp),
                        math.hypot(x1 - xi, y1 - yi))
            xm, ym = source_point(geom, 0.5, theta)
            exact &= (abs(xm - (xp + xi) / 2) < 1e-9
                      and abs(ym - (yp + yi) / 2) < 1e-9)
    geom = concentric_geometry()
    strip = rubber_sheet(radial_gradient_image(geom), geom)
    rows_ok = (abs(strip.values[0].mean() - 100.0) <= 2.0
               and abs(strip.values[-1].mean() - 255.0) <= 2.0)
    ok = worst <= 0.5 and exact and rows_ok
    report(capsys, "criterion 9", ok,
           f"worst endpoint offset {worst:.2e} px (<=0.5), midpoint exact: "
           f"{exact}, boundary rows sample boundary intensities: {rows_ok}")


def test_criterion_10_determinism(capsys, tmp_path):
    """Repeated end-to-end runs on the same image produce byte-identical
    .irc template files."""
    spec = synth.EyeSpec(texture_seed=3, upper_lid_d=128.0, lower_lid_d=136.0,
                         noise_amp=10)
    img, _ = synth.render(spec, seed=12)
    cfg = PipelineConfig(pupil_margin=20)      # noise 10 needs ~2x margin
    blobs = []
    for run in range(2):
        res = pipeline.run_pipeline(img, cfg, subject="alice", capture="c1")
        path = tmp_path / f"run{run}.irc"
        res.code.save(path)
        blobs.append(path.read_bytes())
    ok = blobs[0] == blobs[1]
    report(capsys, "criterion 10", ok,
           f"two pipeline runs wrote {'identical' if ok else 'differing'} "
           f".irc bytes ({len(blobs[0])} bytes)")
