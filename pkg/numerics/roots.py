# depth_ruin/numerics/roots.py
"""
Bracketed root finding for increasing functions
"""

import logging
import math
from typing import Callable, Tuple

from scipy.optimize import brentq

from data.exceptions import BracketInvalid, NoConvergence

logger = logging.getLogger(__name__)

MAX_EXPANSIONS = 200


def find_root_increasing(f: Callable[[float], float], lo: float, hi: float,
                         tol: float = 1e-14, max_iter: int = 500) -> float:
    """Root of an increasing f on [lo, hi]; requires f(lo) <= 0 <= f(hi)."""
    if not lo <= hi:
        raise BracketInvalid(f"bracket [{lo}, {hi}] is reversed")
    f_lo, f_hi = f(lo), f(hi)
    if math.isnan(f_lo) or math.isnan(f_hi):
        raise BracketInvalid(f"f is NaN at the bracket ends [{lo}, {hi}]")
    if f_lo > 0 or f_hi < 0:
        raise BracketInvalid(f"f({lo})={f_lo}, f({hi})={f_hi} do not bracket a root")
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi

    root, info = brentq(f, lo, hi, xtol=tol, maxiter=max_iter, full_output=True, disp=False)
    if not info.converged:
        raise NoConvergence(f"brentq did not converge on [{lo}, {hi}]: {info.flag}")
    return root


def expand_upper_bracket(f: Callable[[float], float], lo: float,
                         start: float = 1.0) -> Tuple[float, float]:
    """Grow hi geometrically from `start` until f(hi) >= 0."""
    hi = max(start, lo + 1.0)
    for _ in range(MAX_EXPANSIONS):
        if f(hi) >= 0:
            return lo, hi
        lo, hi = hi, 2.0 * hi
    raise BracketInvalid(f"no sign change found above {lo}")
