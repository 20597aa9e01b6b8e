"""Iris authentication: segmentation, Hough boundary fitting, rubber-sheet
normalization, Gabor phase coding and Hamming-distance verification."""

from .config import PipelineConfig
from .encoding import CodeLayout, GaborParams, IrisCode, default_layout, encode, \
    gabor_response, quadrant_code
from .hough import Accumulator, EllipseParams, ParabolaParams, convert_parabola, \
    elliptic_hough, parabolic_hough
from .imaging import EdgeMap, GrayImage, compute_histogram, equalize_histogram, \
    gradient_magnitude, threshold_edges
from .kernels import USING_COMPILED
from .matching import EyeCorners, MatchResult, align_and_match, decide, \
    eye_corners, hamming_distance, rotation_angle, shift_code
from .normalization import IrisGeometry, NormalizedStrip, boundary_points, \
    equalize_strip, occlusion_fraction, rubber_sheet, source_point
from .pgm import read_pgm, write_pgm
from .pipeline import PipelineResult, TemplateStore, calibrate_threshold, \
    evaluate_store, run_pipeline
from .segmentation import PupilCircle, binarize_pupil, pupil_center, \
    pupil_radius, pupil_threshold, segment_pupil
from .synth import EyeSpec, random_spec, render

__version__ = "0.1.0"
