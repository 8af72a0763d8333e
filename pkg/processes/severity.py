# depth_ruin/processes/severity.py
"""
Excursion-depth marks Y and the creeping clock: sampling and expectations
"""

import logging
import math
from typing import Callable

import numpy as np

from data.exceptions import ModelValidationError
from data.models import (CreepClock, QuadratureConfig, SeverityDistribution,
                         SeverityKind)
from numerics.quadrature import DEFAULT_QUADRATURE, expect_over_Y

logger = logging.getLogger(__name__)


def sample_Y(law: SeverityDistribution, rng: np.random.Generator, size=None):
    """Draw Y from a caller-owned generator (deterministic given its state)."""
    u = rng.random(size)
    return sample_Y_from_uniform(law, u)


def sample_Y_from_uniform(law: SeverityDistribution, u):
    """Inverse-CDF transform of uniforms in [0, 1) into depth marks."""
    u = np.asarray(u, dtype=float)
    if law.kind is SeverityKind.POINT_MASS:
        out = np.full(u.shape, law.value)
    elif law.kind is SeverityKind.EXPONENTIAL:
        out = -np.log1p(-u) / law.rate
    else:
        weights = np.array([w for w, _ in law.atoms])
        depths = np.array([y for _, y in law.atoms])
        cumulative = np.cumsum(weights)
        cumulative[-1] = 1.0
        out = depths[np.searchsorted(cumulative, u, side="right").clip(max=len(depths) - 1)]
    return out if out.ndim else float(out)


def expect(law: SeverityDistribution, g: Callable[[float], float],
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    return expect_over_Y(g, law, cfg)


def mean(law: SeverityDistribution) -> float:
    if law.kind is SeverityKind.POINT_MASS:
        return law.value
    if law.kind is SeverityKind.EXPONENTIAL:
        return 1.0 / law.rate
    return math.fsum(w * y for w, y in law.atoms)


def cdf(law: SeverityDistribution, y):
    y = np.asarray(y, dtype=float)
    if law.kind is SeverityKind.POINT_MASS:
        out = (y >= law.value).astype(float)
    elif law.kind is SeverityKind.EXPONENTIAL:
        out = np.where(y > 0, -np.expm1(-law.rate * np.maximum(y, 0.0)), 0.0)
    else:
        out = sum(w * (y >= d) for w, d in law.atoms).astype(float)
    return out if out.ndim else float(out)


def min_support(law: SeverityDistribution) -> float:
    if law.kind is SeverityKind.POINT_MASS:
        return law.value
    if law.kind is SeverityKind.EXPONENTIAL:
        return 0.0
    return min(y for w, y in law.atoms if w > 0)


def sup_support(law: SeverityDistribution) -> float:
    if law.kind is SeverityKind.POINT_MASS:
        return law.value
    if law.kind is SeverityKind.EXPONENTIAL:
        return math.inf
    return max(y for w, y in law.atoms if w > 0)


def scaled(law: SeverityDistribution, factor: float) -> SeverityDistribution:
    """Law of factor * Y (used by the Y-scale sweep)."""
    if not factor > 0:
        raise ModelValidationError(f"Y scale factor must be positive, got {factor}")
    if law.kind is SeverityKind.POINT_MASS:
        return SeverityDistribution.point_mass(law.value * factor)
    if law.kind is SeverityKind.EXPONENTIAL:
        return SeverityDistribution.exponential(law.rate / factor)
    return SeverityDistribution.mixture((w, y * factor) for w, y in law.atoms)


def require_bounded_away_from_zero(law: SeverityDistribution) -> None:
    """Unbounded-variation bankruptcy needs Y >= y_min > 0 almost surely.

    Otherwise the infinitely many small excursions straight after every visit
    to 0 make bankruptcy immediate and every Gerber-Shiu term degenerates.
    """
    if not min_support(law) > 0:
        raise ModelValidationError(
            f"{law.kind.value} depth law has mass arbitrarily close to 0; "
            "unbounded variation models need Y bounded away from 0"
        )
    if math.isinf(sup_support(law)) and law.kind is SeverityKind.POINT_MASS:
        raise ModelValidationError("the formula side needs a finite depth mark")


def sample_clock(clock: CreepClock, rng: np.random.Generator, size=None):
    return rng.exponential(1.0 / clock.rate, size)


def clock_from_uniform(clock: CreepClock, u):
    return -np.log1p(-np.asarray(u, dtype=float)) / clock.rate
