# depth_ruin/numerics/quadrature.py
"""
Adaptive quadrature with an explicit accuracy contract.

Thin layer over scipy.integrate.quad (QUADPACK Gauss-Kronrod). Integration
warnings are promoted to NoConvergence, interior kinks are passed to QUADPACK
as breakpoints and infinite ranges are truncated where a caller-supplied
envelope falls below the configured tail mass.

The reported error of every outermost integral is added to the active
ErrorBudget, so a term evaluation can report its quadrature error without
threading accumulators through nested integrands.
"""

import contextvars
import logging
import math
import warnings
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Tuple

from scipy import integrate as scipy_integrate

from data.exceptions import NoConvergence
from data.models import QuadratureConfig, SeverityDistribution, SeverityKind

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE = QuadratureConfig()

_depth = contextvars.ContextVar("quadrature_depth", default=0)
_budget = contextvars.ContextVar("quadrature_budget", default=None)


@dataclass
class ErrorBudget:
    """Sum of the error estimates reported by outermost integrals"""
    total: float = 0.0
    calls: int = 0


@contextmanager
def error_budget() -> Iterator[ErrorBudget]:
    """Collect outermost quadrature errors; nested budgets share the active one."""
    active = _budget.get()
    if active is not None:
        yield active
        return
    budget = ErrorBudget()
    token = _budget.set(budget)
    try:
        yield budget
    finally:
        _budget.reset(token)


def integrate_with_error(f: Callable[[float], float], a: float, b: float,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                         points: Optional[Iterable[float]] = None,
                         envelope: Optional[Callable[[float], float]] = None) -> Tuple[float, float]:
    """∫_a^b f with (value, error estimate); b may be +inf."""
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = integrate_with_error(f, b, a, cfg, points, envelope)
        return -value, err

    if math.isinf(b) and envelope is not None:
        b = _truncation_point(envelope, a, cfg.tail_cut_mass)
        if b <= a:
            return 0.0, 0.0

    kwargs = dict(epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions)
    if points is not None and math.isfinite(b):
        inner = sorted({p for p in points if a < p < b})
        if inner:
            kwargs["points"] = inner

    depth = _depth.get()
    token = _depth.set(depth + 1)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy_integrate.IntegrationWarning)
            try:
                value, err = scipy_integrate.quad(f, a, b, **kwargs)
            except scipy_integrate.IntegrationWarning as exc:
                raise NoConvergence(f"quadrature on [{a}, {b}] failed: {exc}") from exc
    finally:
        _depth.reset(token)

    if math.isnan(value):
        raise NoConvergence(f"quadrature on [{a}, {b}] produced NaN")

    if depth == 0:
        budget = _budget.get()
        if budget is not None:
            budget.total += err
            budget.calls += 1
    return value, err


def integrate(f: Callable[[float], float], a: float, b: float,
              cfg: QuadratureConfig = DEFAULT_QUADRATURE,
              points: Optional[Iterable[float]] = None,
              envelope: Optional[Callable[[float], float]] = None) -> float:
    """∫_a^b f to the accuracy contract in cfg."""
    value, _ = integrate_with_error(f, a, b, cfg, points, envelope)
    return value


def expect_over_Y(g: Callable[[float], float], law: SeverityDistribution,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E[g(Y)] for the excursion-depth law; point laws are summed exactly."""
    if law.kind is SeverityKind.POINT_MASS:
        return g(law.value)
    if law.kind is SeverityKind.POINT_MIXTURE:
        return math.fsum(w * g(y) for w, y in law.atoms if w > 0)

    rate = law.rate
    return integrate(lambda y: g(y) * rate * math.exp(-rate * y), 0.0, math.inf, cfg,
                     envelope=lambda t: math.exp(-rate * t))


def _truncation_point(envelope: Callable[[float], float], a: float, tail: float) -> float:
    width = 1.0
    for _ in range(200):
        if envelope(a + width) <= tail:
            return a + width
        width *= 2.0
    raise NoConvergence(f"envelope never dropped below {tail} above {a}")
