# utils/common.py
from __future__ import annotations

import math


def fmt_float(x: float, digits: int = 9) -> str:
    """Compact float for console summaries ('inf'/'nan' pass through)."""
    if not math.isfinite(x):
        return str(x)
    return f"{x:.{digits}g}"
