"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set TRICENTER_PURE_KERNELS=1 to force the pure implementation (used by the
benchmark and the fallback tests).
"""

from __future__ import annotations

import os

from . import _kernels_py as pure

if os.environ.get("TRICENTER_PURE_KERNELS", "0") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled  # type: ignore[attr-defined]
    except ImportError:
        compiled = None

active = compiled if compiled is not None else pure

BACKEND = "compiled" if compiled is not None else "pure"

orient = active.orient
segments_properly_cross = active.segments_properly_cross
point_on_open_segment = active.point_on_open_segment
point_blocks_triangle = active.point_blocks_triangle
count_crossings = active.count_crossings
count_crossings_one = active.count_crossings_one
first_crossing = active.first_crossing
enumerate_quads = active.enumerate_quads
