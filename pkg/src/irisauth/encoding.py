"""Gabor phase demodulation of the normalized strip into the 2048-bit code.

Each of 4 scales x 8 radial x 32 angular wavelet applications yields one
complex response whose phase is quantized to 2 bits (4-quadrant coding).
Responses are computed over truncated windows (+/-3 envelope widths,
wrapping in the angular direction) with the window mean subtracted so that
constant brightness encodes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import InsufficientSupport, StoreCorrupt, TooOccluded
from .normalization import STRIP_COLS, STRIP_ROWS, NormalizedStrip, occlusion_fraction

__all__ = [
    "CODE_BITS",
    "GaborParams",
    "CodeLayout",
    "IrisCode",
    "default_layout",
    "gabor_response",
    "quadrant_code",
    "encode",
]

CODE_BITS = 2048
N_SCALES = 4
N_RADIAL = 8
N_ANGULAR = 32

_D_RHO = 1.0 / (STRIP_ROWS - 1)
_D_PHI = 2.0 * math.pi / STRIP_COLS

# Envelope widths per scale, in strip cells. The angular modulation rate is
# tied to the envelope so every scale keeps the same cycles-per-envelope.
DEFAULT_LADDER_CELLS = (1.5, 3.0, 6.0, 12.0)
# omega = OMEGA_BETA / beta. One radian of carrier phase per envelope width
# keeps genuine pairs stable under residual angular misalignment while still
# spreading response phases over all four quadrants.
DEFAULT_OMEGA_BETA = 1.0
DEFAULT_SUPPORT_THRESHOLD = 0.7
DEFAULT_OCCLUSION_GATE = 0.6


@dataclass(frozen=True)
class GaborParams:
    """One wavelet application: center (r0, theta0), widths and modulation."""

    omega: float   # rad per angular radian
    alpha: float   # radial width, normalized-r units
    beta: float    # angular width, radians
    r0: float
    theta0: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0 or self.omega <= 0:
            raise ValueError("alpha, beta and omega must be positive")


@dataclass(frozen=True)
class CodeLayout:
    """Center grid and scale triples; must tile exactly 2048 bits."""

    radial_rows: tuple[int, ...]        # strip rows of the radial centers
    angular_cols: tuple[int, ...]       # strip columns of the angular centers
    scales: tuple[tuple[float, float, float], ...]   # (alpha, beta, omega)

    def __post_init__(self):
        total = len(self.scales) * len(self.radial_rows) * len(self.angular_cols) * 2
        if total != CODE_BITS:
            raise ValueError(f"layout yields {total} bits, need {CODE_BITS}")

    @property
    def radial_centers(self) -> tuple[float, ...]:
        return tuple(r * _D_RHO for r in self.radial_rows)

    @property
    def angular_centers(self) -> tuple[float, ...]:
        return tuple(c * _D_PHI for c in self.angular_cols)


def default_layout(ladder_cells=DEFAULT_LADDER_CELLS,
                   omega_beta: float = DEFAULT_OMEGA_BETA) -> CodeLayout:
    """8x32 center grid with half-cell margins; geometric scale ladder."""
    rows = tuple(4 + 8 * i for i in range(N_RADIAL))
    cols = tuple(4 + 8 * j for j in range(N_ANGULAR))
    scales = []
    for cells in ladder_cells:
        alpha = cells * _D_RHO
        beta = cells * _D_PHI
        scales.append((alpha, beta, omega_beta / beta))
    return CodeLayout(radial_rows=rows, angular_cols=cols, scales=tuple(scales))


def _window_half_extents(alpha: float, beta: float) -> tuple[int, int]:
    wr = min(int(math.ceil(3.0 * alpha / _D_RHO)), STRIP_ROWS - 1)
    wc = min(int(math.ceil(3.0 * beta / _D_PHI)), STRIP_COLS // 2 - 1)
    return wr, wc


def gabor_response(strip: NormalizedStrip, p: GaborParams,
                   support_threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> complex:
    """Reference single-application response (direct windowed sum).

    Masked cells contribute nothing; raises InsufficientSupport when fewer
    than `support_threshold` of the window cells are valid.
    """
    wr, wc = _window_half_extents(p.alpha, p.beta)
    row_c = p.r0 / _D_RHO
    col_c = p.theta0 / _D_PHI

    rows = np.arange(STRIP_ROWS)
    rows = rows[np.abs(rows - row_c) <= wr]
    all_cols = np.arange(STRIP_COLS)
    dcol = (all_cols - col_c + STRIP_COLS / 2) % STRIP_COLS - STRIP_COLS / 2
    cols = all_cols[np.abs(dcol) <= wc]
    dphi = dcol[np.abs(dcol) <= wc] * _D_PHI   # phi - theta0, wrapped

    sub_v = strip.values[np.ix_(rows, cols)]
    sub_m = strip.mask[np.ix_(rows, cols)]
    n_tot = sub_m.size
    n_ok = int(np.count_nonzero(sub_m))
    if n_ok < support_threshold * n_tot:
        raise InsufficientSupport(f"{n_ok}/{n_tot} valid cells in window")

    mu = float(sub_v[sub_m].mean())
    rho = (rows * _D_RHO)[:, None]
    g_r = np.exp(-(((p.r0 - rho) / p.alpha) ** 2))
    g_c = np.exp(-((dphi / p.beta) ** 2))[None, :]
    mod = np.exp(1j * p.omega * dphi)[None, :]   # e^{-i omega (theta0 - phi)}
    kern = g_r * g_c * mod
    contrib = np.where(sub_m, sub_v - mu, 0.0)
    return complex(np.sum(kern * contrib * rho * _D_RHO * _D_PHI))


def quadrant_code(phase: float) -> tuple[int, int]:
    """Half-open 4-quadrant phase coding."""
    phi = phase % (2.0 * math.pi)
    if phi < math.pi / 2:
        return (1, 1)
    if phi < math.pi:
        return (0, 1)
    if phi < 1.5 * math.pi:
        return (0, 0)
    return (1, 0)


def _corr_angular(field, kern):
    """Correlate each strip row with kern, wrapping circularly. kern may be
    complex; its length is odd."""
    kre, kim = np.real(kern), np.imag(kern)
    res = correlate1d(field, kre, axis=1, mode="wrap")
    if np.any(kim):
        res = res + 1j * correlate1d(field, kim, axis=1, mode="wrap")
    return res


def _scale_responses(values, mask, alpha, beta, omega, rows):
    """Responses and support fractions at the given center rows x all columns.

    Separable evaluation: a circular 1-D correlation along the angular axis,
    then a dense radial weighting that is only evaluated at the requested
    center rows (the window is clipped at the strip's radial edges).
    """
    wr, wc = _window_half_extents(alpha, beta)
    dj = np.arange(-wc, wc + 1) * _D_PHI
    kc = np.exp(-((dj / beta) ** 2)) * np.exp(1j * omega * dj)
    box_c = np.ones(2 * wc + 1)

    off = np.arange(STRIP_ROWS)[None, :] - np.asarray(rows)[:, None]
    in_win = np.abs(off) <= wr
    w_gauss = np.where(in_win, np.exp(-((off * _D_RHO / alpha) ** 2)), 0.0)
    w_box = in_win.astype(np.float64)

    m = mask.astype(np.float64)
    rho = (np.arange(STRIP_ROWS) * _D_RHO)[:, None]
    w = rho * _D_RHO * _D_PHI
    s1 = w_gauss @ _corr_angular(values * m * w, kc)
    s2 = w_gauss @ _corr_angular(m * w, kc)
    sm = w_box @ _corr_angular(values * m, box_c)
    sn = w_box @ _corr_angular(m, box_c)
    st = (w_box.sum(axis=1) * (2 * wc + 1))[:, None]

    sn = np.maximum(sn, 0.0)
    mu = np.divide(sm, sn, out=np.zeros_like(sm), where=sn > 0.5)
    return s1 - mu * s2, sn / st


def encode(strip: NormalizedStrip, layout: CodeLayout | None = None,
           support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
           occlusion_gate: float = DEFAULT_OCCLUSION_GATE,
           subject: str = "", capture: str = "") -> "IrisCode":
    """Full 2048-bit encoding; bit pair k sits at offsets (2k, 2k+1) with
    k = (scale * 8 + radial) * 32 + angular."""
    if layout is None:
        layout = default_layout()
    if occlusion_fraction(strip) >= occlusion_gate:
        raise TooOccluded(f"occlusion {occlusion_fraction(strip):.2f} "
                          f">= gate {occlusion_gate}")

    rows = np.asarray(layout.radial_rows)
    cols = np.asarray(layout.angular_cols)
    bits = np.zeros(CODE_BITS, dtype=np.uint8)
    mask = np.zeros(CODE_BITS, dtype=np.uint8)
    pair = 0
    for alpha, beta, omega in layout.scales:
        resp, support = _scale_responses(strip.values, strip.mask,
                                         alpha, beta, omega, rows)
        for ri in range(len(rows)):
            for cj in cols:
                r = resp[ri, cj]
                b1, b2 = quadrant_code(math.atan2(r.imag, r.real))
                bits[2 * pair] = b1
                bits[2 * pair + 1] = b2
                if support[ri, cj] >= support_threshold:
                    mask[2 * pair] = mask[2 * pair + 1] = 1
                pair += 1
    return IrisCode(bits=bits, mask=mask, subject=subject, capture=capture)


_MAGIC = b"IRC1"
_VERSION = 1


@dataclass(frozen=True)
class IrisCode:
    """2048 data bits plus 2048 validity bits."""

    bits: np.ndarray
    mask: np.ndarray
    subject: str = ""
    capture: str = ""

    def __post_init__(self):
        for name in ("bits", "mask"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.uint8)
            if arr.shape != (CODE_BITS,) or arr.max(initial=0) > 1:
                raise ValueError(f"{name} must be {CODE_BITS} bits")
            object.__setattr__(self, name, arr)

    def to_bytes(self) -> bytes:
        label = self.subject.encode("utf-8")
        if len(label) > 255:
            raise ValueError("subject label longer than 255 bytes")
        return (_MAGIC + bytes([_VERSION])
                + np.packbits(self.bits, bitorder="little").tobytes()
                + np.packbits(self.mask, bitorder="little").tobytes()
                + bytes([len(label)]) + label)

    @classmethod
    def from_bytes(cls, data: bytes, capture: str = "") -> "IrisCode":
        if data[:4] != _MAGIC:
            raise StoreCorrupt("bad magic; not an iris-code file")
        if data[4] != _VERSION:
            raise StoreCorrupt(f"unsupported version {data[4]}")
        body = data[5:]
        if len(body) < 513:
            raise StoreCorrupt("truncated iris-code file")
        bits = np.unpackbits(np.frombuffer(body[:256], dtype=np.uint8),
                             bitorder="little")
        mask = np.unpackbits(np.frombuffer(body[256:512], dtype=np.uint8),
                             bitorder="little")
        n = body[512]
        label = body[513:513 + n]
        if len(label) != n:
            raise StoreCorrupt("truncated subject label")
        return cls(bits=bits, mask=mask, subject=label.decode("utf-8"),
                   capture=capture)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path, capture: str = "") -> "IrisCode":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), capture=capture)
