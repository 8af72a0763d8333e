# depth_ruin/numerics/inversion.py
"""
Numerical Laplace inversion (fixed Talbot contour, via mpmath)
"""

import logging
from typing import Callable

import mpmath

from data.exceptions import DomainError, InversionUnstable

logger = logging.getLogger(__name__)

BASE_DPS = 30
CHECK_DPS = 45
AGREEMENT_RTOL = 1e-9


def invert_laplace(F: Callable, x: float, abscissa: float = 0.0,
                   dps: int = BASE_DPS) -> float:
    """f(x) from its transform F, valid for Re(s) > abscissa.

    The transform is shifted so every singularity sits in Re(s) <= 0 before the
    Talbot contour is applied, and the inversion is repeated at a higher working
    precision; disagreement raises InversionUnstable.
    """
    if x <= 0:
        raise DomainError(f"inversion needs x > 0, got {x}")

    def shifted(s):
        return F(s + abscissa)

    results = []
    for precision in (dps, max(dps + 15, CHECK_DPS)):
        with mpmath.workdps(precision):
            try:
                value = mpmath.invertlaplace(shifted, x, method="talbot")
            except (ZeroDivisionError, ValueError) as exc:
                raise InversionUnstable(f"Talbot inversion failed at x={x}: {exc}") from exc
            results.append(float(mpmath.re(value * mpmath.exp(abscissa * x))))

    coarse, fine = results
    if abs(coarse - fine) > AGREEMENT_RTOL * max(1.0, abs(fine)):
        raise InversionUnstable(f"inversion at x={x} unstable: {coarse} vs {fine}")
    logger.debug(f"Inverted transform at x={x}: {fine}")
    return fine
