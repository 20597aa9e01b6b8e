"""End-to-end pipeline, file-based template store and threshold calibration."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hough, matching, normalization, segmentation
from .config import PipelineConfig
from .encoding import IrisCode, default_layout, encode
from .errors import (
    IrisAuthError,
    NoParabolaFound,
    NoSeparation,
    PipelineError,
    StoreCorrupt,
    SubjectUnknown,
    CaptureExists,
    TangentLids,
    NoIntersection,
)
from .imaging import GrayImage, gradient_magnitude, threshold_edges
from .normalization import IrisGeometry

__all__ = [
    "PipelineResult",
    "run_pipeline",
    "TemplateStore",
    "build_histograms",
    "calibrate_threshold",
    "evaluate_store",
]

HIST_BINS = 100
_LID_EDGE_MARGIN = 3.0   # px, clearance below/above a detected lid curve
_LID_PROBE_OFFSET = 6.0  # px, how far past the lid curve to sample intensity
_LID_SCLERA_TOL = 25     # levels; probe counts as sclera within this distance
_LID_SCLERA_REJECT = 0.6  # reject "lid" when this fraction of probes is sclera
_SCLERA_PERCENTILE = 98   # sclera grey level = this percentile of the image


def _lid_plausible(img: GrayImage, lid, pupil) -> bool:
    """Image-evidence check for a detected eyelid parabola.

    The iris/sclera ellipse arc can mimic a lid in the accumulator.  A real
    lid has lid tissue just past the boundary (away from the pupil), while
    the mimic has bare sclera there, so the detection is rejected when most
    probe pixels past the curve sit at the sclera grey level.  Sclera is
    the brightest extended region of an eye image, so its grey level is
    referenced from a high percentile of all pixels; lid tissue sits below
    it.
    """
    sclera = float(np.percentile(img.pixels, _SCLERA_PERCENTILE))
    a, b, c = lid.quad
    away = -_LID_PROBE_OFFSET if a > 0 else _LID_PROBE_OFFSET  # a>0: upper lid
    xs = pupil.cx + np.linspace(-1.2, 1.2, 25) * pupil.radius
    ys = a * xs * xs + b * xs + c + away
    xi = np.rint(xs).astype(int)
    yi = np.rint(ys).astype(int)
    ok = (xi >= 0) & (xi < img.width) & (yi >= 0) & (yi < img.height)
    if ok.sum() < 10:
        return True   # not enough evidence to overrule the accumulator
    probes = img.pixels[yi[ok], xi[ok]].astype(int)
    frac_sclera = np.mean(np.abs(probes - sclera) <= _LID_SCLERA_TOL)
    return frac_sclera < _LID_SCLERA_REJECT


def _exclude_lid_edges(edges, upper, lower):
    from .imaging import EdgeMap

    keep = np.ones(len(edges), dtype=bool)
    xs = edges.xs.astype(np.float64)
    ys = edges.ys.astype(np.float64)
    for lid, above in ((upper, True), (lower, False)):
        if lid is None:
            continue
        a, b, c = lid.quad
        y_lid = a * xs * xs + b * xs + c
        keep &= (ys > y_lid + _LID_EDGE_MARGIN) if above \
            else (ys < y_lid - _LID_EDGE_MARGIN)
    return EdgeMap(xs=edges.xs[keep], ys=edges.ys[keep],
                   magnitudes=edges.magnitudes[keep],
                   width=edges.width, height=edges.height)


@dataclass(frozen=True)
class PipelineResult:
    code: IrisCode
    geometry: IrisGeometry
    rotation: Optional[float]     # radians, None when no corner pair was found
    diagnostics: dict


def run_pipeline(img: GrayImage, config: PipelineConfig | None = None,
                 subject: str = "", capture: str = "") -> PipelineResult:
    """segment -> hough -> normalize -> equalize -> encode.

    Stage failures are re-raised as PipelineError with the stage name.
    """
    cfg = config or PipelineConfig()
    diag: dict = {}

    def stage(name, fn):
        try:
            return fn()
        except PipelineError:
            raise
        except IrisAuthError as exc:
            raise PipelineError(name, exc) from exc

    pupil, _mask = stage("segmentation", lambda: segmentation.segment_pupil(
        img, margin=cfg.pupil_margin, dark_max=cfg.pupil_dark_max))
    diag.update(cx=pupil.cx, cy=pupil.cy, r=pupil.radius)

    edges = stage("gradient", lambda: threshold_edges(
        gradient_magnitude(img), cfg.gradient_threshold))
    diag["edge_points"] = len(edges)

    # Lids first: their boundary edges are the main clutter for the
    # ellipse vote, so detected lid regions are excluded from it.
    lids = {}
    for which in ("upper", "lower"):
        try:
            lids[which] = hough.parabolic_hough(
                edges, pupil, which,
                axis_range_deg=cfg.axis_range_deg, axis_bin_deg=cfg.axis_bin_deg,
                d_bin=cfg.parabola_d_bin, vote_frac=cfg.parabola_vote_frac)
            if not _lid_plausible(img, lids[which], pupil):
                lids[which] = None
        except NoParabolaFound:
            lids[which] = None   # treated as no occlusion
    diag["upper_quad"] = lids["upper"].quad if lids["upper"] else None
    diag["lower_quad"] = lids["lower"].quad if lids["lower"] else None

    ellipse_edges = _exclude_lid_edges(edges, lids["upper"], lids["lower"])
    ellipse = stage("ellipse", lambda: hough.elliptic_hough(
        ellipse_edges, pupil,
        bin_width=cfg.ellipse_bin, vote_frac=cfg.ellipse_vote_frac))
    diag.update(a=ellipse.a, b=ellipse.b)

    geom = IrisGeometry(pupil=pupil, ellipse=ellipse,
                        upper_lid=lids["upper"], lower_lid=lids["lower"])
    strip = stage("normalize", lambda: normalization.rubber_sheet(img, geom))
    strip = normalization.equalize_strip(strip)
    diag["occlusion"] = normalization.occlusion_fraction(strip)

    rotation = None
    if lids["upper"] and lids["lower"]:
        try:
            corners = matching.eye_corners(lids["upper"], lids["lower"])
            rotation = matching.rotation_angle(corners.p1, (pupil.cx, pupil.cy))
            diag["corners"] = (corners.p1, corners.p2)
        except (NoIntersection, TangentLids):
            pass
    diag["rotation"] = rotation

    layout = default_layout(omega_beta=cfg.omega_beta)
    code = stage("encode", lambda: encode(
        strip, layout, support_threshold=cfg.support_threshold,
        occlusion_gate=cfg.occlusion_gate, subject=subject, capture=capture))
    return PipelineResult(code=code, geometry=geom, rotation=rotation,
                          diagnostics=diag)


_NAME_RE = re.compile(r"^(?P<subject>.+)__(?P<capture>[^_].*)\.irc$")


class TemplateStore:
    """One .irc file per (subject, capture); a .ang sidecar holds the
    capture's rotation angle when one was measured."""

    def __init__(self, root):
        self.root = str(root)
        os.makedirs(self.root, exist_ok=True)

    def _path(self, subject: str, capture: str) -> str:
        if "__" in subject or "/" in subject or "/" in capture:
            raise ValueError("subject/capture must not contain '__' or '/'")
        return os.path.join(self.root, f"{subject}__{capture}.irc")

    def enroll(self, code: IrisCode, angle: Optional[float] = None) -> str:
        path = self._path(code.subject, code.capture)
        if os.path.exists(path):
            raise CaptureExists(f"capture already enrolled: {path}")
        code.save(path)
        if angle is not None:
            with open(path[:-4] + ".ang", "w", encoding="ascii") as fh:
                fh.write(f"{angle!r}\n")
        return path

    def entries(self):
        """All (subject, capture, code, angle), format-audited, sorted."""
        out = []
        for name in sorted(os.listdir(self.root)):
            m = _NAME_RE.match(name)
            if not m:
                continue
            path = os.path.join(self.root, name)
            try:
                code = IrisCode.load(path, capture=m["capture"])
            except (StoreCorrupt, OSError) as exc:
                raise StoreCorrupt(f"{path}: {exc}") from exc
            if code.subject != m["subject"]:
                raise StoreCorrupt(f"{path}: label {code.subject!r} does not "
                                   f"match filename")
            angle = None
            ang_path = path[:-4] + ".ang"
            if os.path.exists(ang_path):
                with open(ang_path, "r", encoding="ascii") as fh:
                    angle = float(fh.read().strip())
            out.append((m["subject"], m["capture"], code, angle))
        return out

    def verify(self, subject: str, probe: IrisCode,
               probe_angle: Optional[float] = None,
               threshold: float = matching.DEFAULT_THRESHOLD) -> matching.MatchResult:
        """Minimal HD over the claimed subject's enrolled captures."""
        candidates = [(c, ang) for s, _cap, c, ang in self.entries() if s == subject]
        if not candidates:
            raise SubjectUnknown(f"no enrolled captures for {subject!r}")
        best = None
        for code, angle in candidates:
            res = matching.align_and_match(code, probe, angle_a=angle,
                                           angle_b=probe_angle, threshold=threshold)
            if best is None or res.hd < best.hd:
                best = res
        return best


def evaluate_store(store: TemplateStore,
                   threshold: float = matching.DEFAULT_THRESHOLD):
    """All-pairs scores, split genuine/impostor by subject label."""
    entries = store.entries()
    genuine, impostor = [], []
    for i in range(len(entries)):
        si, _, ci, ai = entries[i]
        for j in range(i + 1, len(entries)):
            sj, _, cj, aj = entries[j]
            res = matching.align_and_match(ci, cj, angle_a=ai, angle_b=aj,
                                           threshold=threshold)
            (genuine if si == sj else impostor).append(res.hd)
    return genuine, impostor


def build_histograms(genuine, impostor, bins: int = HIST_BINS):
    """Counts over fixed bins k/bins of [0, 1]; scores of exactly 1.0 land
    in the last bin."""
    edges = np.arange(bins + 1) / bins
    g = np.histogram(np.clip(genuine, 0, 1 - 1e-12), bins=edges)[0]
    i = np.histogram(np.clip(impostor, 0, 1 - 1e-12), bins=edges)[0]
    return g, i


def calibrate_threshold(genuine, impostor, bins: int = HIST_BINS) -> float:
    """Crossing of the genuine and impostor score histograms.

    Midpoint between the last genuine-dominant bin and the first
    impostor-dominant bin at or after it.
    """
    if len(genuine) < 30 or len(impostor) < 30:
        raise ValueError("need at least 30 scores per class")
    if float(np.mean(genuine)) >= float(np.mean(impostor)):
        raise NoSeparation("genuine mean is not below impostor mean")
    g, i = build_histograms(genuine, impostor, bins)
    dominant_g = np.nonzero(g > i)[0]
    k1 = int(dominant_g[-1]) if len(dominant_g) else 0
    after = np.nonzero((i > g) & (np.arange(bins) >= k1))[0]
    if len(after) == 0:
        raise NoSeparation("no impostor-dominant bin after the genuine mass")
    k2 = int(after[0])
    center = lambda k: (k + 0.5) / bins
    return (center(k1) + center(k2)) / 2.0
