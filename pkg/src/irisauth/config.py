"""Tunable parameters for every stage, loadable from key=value text files
with CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

__all__ = ["PipelineConfig"]


@dataclass(frozen=True)
class PipelineConfig:
    # imaging / segmentation
    gradient_threshold: float = 200.0
    pupil_dark_max: int = 100
    pupil_margin: int = 5
    # elliptic Hough
    ellipse_bin: float = 1.0
    ellipse_vote_frac: float = 0.08
    # parabolic Hough
    parabola_d_bin: float = 2.0
    axis_bin_deg: float = 2.0
    axis_range_deg: float = 15.0
    parabola_vote_frac: float = 0.25
    # encoding
    support_threshold: float = 0.7
    occlusion_gate: float = 0.6
    omega_beta: float = 1.0
    # decision
    decision_threshold: float = 0.39

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        pairs = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, value = line.split("=", 1)
                pairs[key.strip()] = value.strip()
        return cls().with_overrides(pairs)

    def with_overrides(self, pairs: dict) -> "PipelineConfig":
        types = {f.name: f.type for f in fields(self)}
        casts = {"int": int, "float": float}
        updates = {}
        for key, value in pairs.items():
            if key not in types:
                raise ValueError(f"unknown config key: {key}")
            updates[key] = casts[types[key]](value)
        return replace(self, **updates)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
