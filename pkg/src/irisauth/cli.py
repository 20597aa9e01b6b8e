"""Command-line front end.

Exit codes: 0 authentic (or plain success), 1 impostor, 2 error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import hough, matching, normalization, pipeline, segmentation
from .config import PipelineConfig
from .encoding import IrisCode
from .errors import IrisAuthError
from .imaging import GrayImage, gradient_magnitude, threshold_edges
from .pgm import read_pgm, write_pgm
from .synth import EyeSpec, render

EXIT_AUTHENTIC = 0
EXIT_IMPOSTOR = 1
EXIT_ERROR = 2


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = value
    return cfg.with_overrides(overrides)


def _write_accumulator(path, acc: hough.Accumulator) -> None:
    counts = acc.counts.astype(np.float64)
    top = counts.max()
    scaled = np.zeros_like(counts) if top == 0 else counts * (255.0 / top)
    write_pgm(path, GrayImage(np.rint(scaled).astype(np.uint8)))


def _print_match(res: matching.MatchResult) -> int:
    print(f"HD={res.hd:.6f} N={res.compared_bits} shift={res.shift_applied} "
          f"decision={res.decision}")
    return EXIT_AUTHENTIC if res.decision == "authentic" else EXIT_IMPOSTOR


def cmd_synth(args) -> int:
    spec = EyeSpec(
        texture_seed=args.seed,
        rotation=math.radians(args.rotation),
        noise_amp=args.noise,
        upper_lid_d=args.upper_lid_d if args.lids else None,
        lower_lid_d=args.lower_lid_d if args.lids else None,
    )
    img, truth = render(spec, seed=args.noise_seed)
    write_pgm(args.out, img)
    if args.truth:
        with open(args.truth, "w", encoding="ascii") as fh:
            fh.write(f"cx={truth['cx']!r}\ncy={truth['cy']!r}\nr={truth['r']!r}\n")
            fh.write(f"a={truth['a']!r}\nb={truth['b']!r}\n")
            fh.write(f"rotation={truth['rotation']!r}\n")
            for key in ("upper_quad", "lower_quad"):
                if truth[key] is not None:
                    qa, qb, qc = truth[key]
                    fh.write(f"{key}={qa!r},{qb!r},{qc!r}\n")
    return EXIT_AUTHENTIC


def cmd_segment(args) -> int:
    cfg = _load_config(args)
    img = read_pgm(args.image)
    pupil, mask = segmentation.segment_pupil(img, margin=cfg.pupil_margin,
                                             dark_max=cfg.pupil_dark_max)
    edges = threshold_edges(gradient_magnitude(img), cfg.gradient_threshold)
    ellipse, acc = hough.elliptic_hough(
        edges, pupil, bin_width=cfg.ellipse_bin,
        vote_frac=cfg.ellipse_vote_frac, return_accumulator=True)
    if args.dump_accumulator:
        _write_accumulator(args.dump_accumulator, acc)
    if args.mask_out:
        write_pgm(args.mask_out, GrayImage(mask.astype(np.uint8) * 255))
    if args.circle_out:
        with open(args.circle_out, "w", encoding="ascii") as fh:
            fh.write(f"{pupil.cx!r} {pupil.cy!r} {pupil.radius!r}\n")
    print(f"{pupil.cx:.2f} {pupil.cy:.2f} {pupil.radius:.2f}")
    print(f"ellipse a={ellipse.a:.2f} b={ellipse.b:.2f}")
    return EXIT_AUTHENTIC


def _normalized_strip(img, cfg):
    res = pipeline.run_pipeline(img, cfg)
    geom = res.geometry
    strip = normalization.rubber_sheet(img, geom)
    return normalization.equalize_strip(strip), res


def cmd_normalize(args) -> int:
    cfg = _load_config(args)
    img = read_pgm(args.image)
    strip, _ = _normalized_strip(img, cfg)
    write_pgm(args.strip_out,
              GrayImage(np.clip(np.rint(strip.values), 0, 255).astype(np.uint8)))
    write_pgm(args.mask_out, GrayImage(strip.mask.astype(np.uint8) * 255))
    return EXIT_AUTHENTIC


def _run(args, subject="", capture=""):
    cfg = _load_config(args)
    img = read_pgm(args.image)
    res = pipeline.run_pipeline(img, cfg, subject=subject, capture=capture)
    if getattr(args, "diagnostics", False):
        diag = dict(res.diagnostics)
        diag = {k: (list(v) if isinstance(v, tuple) else v) for k, v in diag.items()}
        print(json.dumps(diag, default=float))
    return res, cfg


def cmd_encode(args) -> int:
    res, _ = _run(args, subject=args.subject, capture=args.capture)
    res.code.save(args.out)
    return EXIT_AUTHENTIC


def cmd_enroll(args) -> int:
    res, _ = _run(args, subject=args.subject, capture=args.capture)
    store = pipeline.TemplateStore(args.store)
    path = store.enroll(res.code, angle=res.rotation)
    print(path)
    return EXIT_AUTHENTIC


def cmd_verify(args) -> int:
    res, cfg = _run(args, subject=args.subject, capture="probe")
    store = pipeline.TemplateStore(args.store)
    match = store.verify(args.subject, res.code, probe_angle=res.rotation,
                         threshold=cfg.decision_threshold)
    return _print_match(match)


def cmd_match(args) -> int:
    cfg = _load_config(args)
    a = IrisCode.load(args.code_a)
    b = IrisCode.load(args.code_b)
    res = matching.align_and_match(a, b, threshold=cfg.decision_threshold)
    return _print_match(res)


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    store = pipeline.TemplateStore(args.store)
    genuine, impostor = pipeline.evaluate_store(store, threshold=cfg.decision_threshold)
    g, i = pipeline.build_histograms(genuine, impostor)
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write("bin_low,genuine_count,impostor_count\n")
        for k in range(pipeline.HIST_BINS):
            fh.write(f"{k / pipeline.HIST_BINS:.2f},{g[k]},{i[k]}\n")
    if args.scores_out:
        with open(args.scores_out, "w", encoding="ascii") as fh:
            fh.write("kind,hd\n")
            for hd in genuine:
                fh.write(f"genuine,{hd!r}\n")
            for hd in impostor:
                fh.write(f"impostor,{hd!r}\n")
    print(f"genuine={len(genuine)} impostor={len(impostor)}")
    return EXIT_AUTHENTIC


def cmd_calibrate(args) -> int:
    genuine, impostor = [], []
    with open(args.scores, "r", encoding="ascii") as fh:
        header = fh.readline()
        if header.strip() != "kind,hd":
            raise ValueError(f"{args.scores}: expected 'kind,hd' header")
        for line in fh:
            kind, hd = line.strip().split(",")
            (genuine if kind == "genuine" else impostor).append(float(hd))
    threshold = pipeline.calibrate_threshold(genuine, impostor)
    print(f"threshold={threshold:.4f}")
    return EXIT_AUTHENTIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irisauth",
                                     description="Iris authentication pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value (repeatable)")

    p = sub.add_parser("synth", help="render a synthetic eye")
    p.add_argument("--seed", type=int, default=0, help="identity texture seed")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--rotation", type=float, default=0.0, help="degrees")
    p.add_argument("--noise", type=int, default=0)
    p.add_argument("--lids", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--upper-lid-d", type=float, default=128.0)
    p.add_argument("--lower-lid-d", type=float, default=136.0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("segment", help="pupil circle and iris ellipse")
    common(p)
    p.add_argument("image")
    p.add_argument("--mask-out")
    p.add_argument("--circle-out")
    p.add_argument("--dump-accumulator")
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("normalize", help="write the 64x256 strip and mask")
    common(p)
    p.add_argument("image")
    p.add_argument("--strip-out", required=True)
    p.add_argument("--mask-out", required=True)
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("encode", help="image -> .irc code file")
    common(p)
    p.add_argument("image")
    p.add_argument("--out", required=True)
    p.add_argument("--subject", default="")
    p.add_argument("--capture", default="")
    p.add_argument("--diagnostics", action="store_true")
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("enroll", help="encode and store a capture")
    common(p)
    p.add_argument("image")
    p.add_argument("--store", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--capture", required=True)
    p.add_argument("--diagnostics", action="store_true")
    p.set_defaults(fn=cmd_enroll)

    p = sub.add_parser("verify", help="match a probe against a claimed subject")
    common(p)
    p.add_argument("image")
    p.add_argument("--store", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--diagnostics", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("match", help="compare two .irc files")
    common(p)
    p.add_argument("code_a")
    p.add_argument("code_b")
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("evaluate", help="all-pairs scores over a store")
    common(p)
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True, help="histogram CSV")
    p.add_argument("--scores-out", help="raw per-pair scores CSV")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("calibrate", help="decision threshold from scores CSV")
    p.add_argument("scores", help="CSV produced by evaluate --scores-out")
    p.set_defaults(fn=cmd_calibrate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (IrisAuthError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
