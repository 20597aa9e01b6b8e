"""Selects the compiled voting kernel when available, else the NumPy one.

Set IRISAUTH_NO_EXT=1 to force the fallback (used by the benchmark and the
parity tests).
"""

from __future__ import annotations

import os

from . import _voting_np

if os.environ.get("IRISAUTH_NO_EXT"):
    _impl = _voting_np
else:
    try:
        from . import _voting_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _voting_np

USING_COMPILED: bool = bool(getattr(_impl, "COMPILED", False))
ellipse_votes = _impl.ellipse_votes
parabola_votes = _impl.parabola_votes
