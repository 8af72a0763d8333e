# depth_ruin/processes/scale_engine.py
"""
q-scale functions of hyperexponential spectrally negative Lévy models.

For these models 1/(psi(s) - q) = Q(s)/P(s) is rational, so W^(q) is an
exact exponential sum

    W^(q)(x) = Re sum_j c_j x^{p_j} e^{r_j x},   x >= 0,

obtained from the roots r_j of P. Complex roots come in conjugate pairs and
the real part of their contribution is the damped-cosine term. Repeated
roots (p_j > 0) only occur at boundary parameters such as the driftless
Brownian model at q = 0.

Kernels built from W (H, calligraphic W, O and the diagonal derivative of O)
live here too, all vectorised over numpy arrays.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import signal

from data.exceptions import DomainError, RootIsolationFailure
from data.models import LevyModel, QuadratureConfig, VariationClass
from numerics.quadrature import DEFAULT_QUADRATURE, integrate
from numerics.roots import expand_upper_bracket, find_root_increasing
from processes import levy_model

logger = logging.getLogger(__name__)

ROOT_RESIDUAL_TOL = 1e-10
PHI_AGREEMENT_TOL = 1e-10
CLUSTER_TOL = 1e-7
NEWTON_STEPS = 3


@dataclass(frozen=True, eq=False)
class ScaleFunction:
    """Exponential-sum representation of W^(q) for one (model, q) pair"""
    model: LevyModel
    q: float
    phi_q: float
    coefficients: np.ndarray
    rates: np.ndarray
    powers: np.ndarray
    variation: VariationClass
    simple: bool = field(default=True)
    term_list: tuple = field(default=(), repr=False)

    @property
    def w_zero(self) -> float:
        """W^(q)(0+): 1/drift for bounded variation, 0 otherwise"""
        if self.variation is VariationClass.UNBOUNDED:
            return 0.0
        return float(_evaluate(self, 0.0, 0))


@dataclass(frozen=True)
class KernelContext:
    """Scale at level q (and optionally q + lambda) with the upper barrier b"""
    scale: ScaleFunction
    b: float
    shifted: Optional[ScaleFunction] = None

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"barrier must be positive, got {self.b}")
        if self.shifted is not None and self.shifted.model != self.scale.model:
            raise DomainError("kernel scales must share one model")


@lru_cache(maxsize=512)
def build_scale(model: LevyModel, q: float) -> ScaleFunction:
    """Factor psi - q exactly and return W^(q) as an exponential sum."""
    if q < 0 or math.isnan(q):
        raise DomainError(f"q must be non-negative, got {q}")

    P, Q = levy_model.characteristic_polynomials(model, q)
    dP = P.deriv()
    roots = P.roots().astype(complex)
    for _ in range(NEWTON_STEPS):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = P(roots) / dP(roots)
        ok = np.isfinite(step)
        roots = np.where(ok, roots - np.where(ok, step, 0), roots)
    roots = np.where(np.abs(roots.imag) < 1e-13 * np.maximum(1.0, np.abs(roots)), roots.real, roots)
    if q == 0:
        roots = np.where(np.abs(roots) < 1e-12, 0.0, roots)

    scale_coeffs = np.abs(P.coef)
    for r in roots:
        magnitude = np.sum(scale_coeffs * np.abs(r) ** np.arange(len(scale_coeffs)))
        if abs(P(r)) > ROOT_RESIDUAL_TOL * max(1.0, magnitude):
            raise RootIsolationFailure(f"root {r} of psi - q has residual {abs(P(r)):.3g}")

    phi_q = _max_real_root(roots, model, q)
    coefficients, rates, powers = _partial_fractions(P, Q, dP, roots)
    simple = bool(np.all(powers == 0))

    scale = ScaleFunction(model=model, q=float(q), phi_q=phi_q,
                          coefficients=coefficients, rates=rates, powers=powers,
                          variation=levy_model.variation_class(model), simple=simple,
                          term_list=tuple(zip(coefficients.tolist(), rates.tolist())))
    logger.debug(f"Built W^({q}) for {model.kind.value}: Phi={phi_q:.12g}, {len(rates)} terms")
    return scale


def _max_real_root(roots: np.ndarray, model: LevyModel, q: float) -> float:
    real_roots = [r.real for r in roots if r.imag == 0]
    if not real_roots:
        raise RootIsolationFailure("psi - q has no real root")
    phi_q = max(real_roots)
    if any(r.real > phi_q + PHI_AGREEMENT_TOL * max(1.0, phi_q) for r in roots):
        raise RootIsolationFailure("a complex root lies to the right of Phi(q)")

    if q == 0:
        if abs(phi_q) > PHI_AGREEMENT_TOL:
            raise RootIsolationFailure(f"Phi(0) should vanish under net profit, got {phi_q}")
        return 0.0

    def shifted(lam):
        return levy_model.laplace_exponent(model, lam) - q

    lo, hi = expand_upper_bracket(shifted, 0.0, start=max(1.0, phi_q))
    check = find_root_increasing(shifted, lo, hi)
    if abs(check - phi_q) > PHI_AGREEMENT_TOL * max(1.0, phi_q):
        raise RootIsolationFailure(f"Phi({q}) from roots {phi_q} disagrees with bracketing {check}")
    return check


def _partial_fractions(P, Q, dP, roots):
    order = np.argsort(-roots.real, kind="stable")
    roots = roots[order]
    gaps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(gaps, np.inf)
    clustered = np.any(gaps < CLUSTER_TOL * np.maximum(1.0, np.abs(roots))[:, None])

    if not clustered:
        coefficients = Q(roots) / dP(roots)
        return coefficients.astype(complex), roots.astype(complex), np.zeros(len(roots), dtype=int)

    residues, poles, direct = signal.residue(Q.coef[::-1], P.coef[::-1], tol=1e-6)
    if len(direct) and np.any(np.abs(direct) > 0):
        raise RootIsolationFailure("1/(psi - q) is not a proper rational function")
    coefficients, rates, powers = [], [], []
    previous, multiplicity = None, 0
    for res, pole in zip(residues, poles):
        if previous is not None and abs(pole - previous) < 1e-6 * max(1.0, abs(pole)):
            multiplicity += 1
        else:
            multiplicity = 0
        previous = pole
        coefficients.append(res / math.factorial(multiplicity))
        rates.append(0.0 if abs(pole) < 1e-12 else pole)
        powers.append(multiplicity)
    return np.asarray(coefficients, dtype=complex), np.asarray(rates, dtype=complex), np.asarray(powers, dtype=int)


def _evaluate(scale: ScaleFunction, x, order: int):
    """order-th derivative of the exponential sum (no support mask)."""
    x = np.asarray(x, dtype=float)
    exps = np.exp(np.multiply.outer(x, scale.rates))
    if scale.simple:
        return np.real(exps @ (scale.coefficients * scale.rates ** order))

    total = np.zeros(x.shape, dtype=complex)
    for j, (c, r, p) in enumerate(zip(scale.coefficients, scale.rates, scale.powers)):
        e = exps[..., j]
        for k in range(min(order, p) + 1):
            falling = math.factorial(p) // math.factorial(p - k)
            total = total + c * math.comb(order, k) * falling * x ** (p - k) * r ** (order - k) * e
    return np.real(total)


def _masked(scale: ScaleFunction, x, order: int):
    if scale.simple and np.ndim(x) == 0:
        return _scalar(scale, float(x), order)
    x_arr = np.asarray(x, dtype=float)
    values = np.where(x_arr >= 0, _evaluate(scale, np.maximum(x_arr, 0.0), order), 0.0)
    if order == 0:
        values = np.maximum(values, 0.0)
        if scale.variation is VariationClass.UNBOUNDED:
            values = np.where(x_arr == 0, 0.0, values)
    return values if values.ndim else float(values)


def _scalar(scale: ScaleFunction, x: float, order: int) -> float:
    if x < 0 or (x == 0 and order == 0 and scale.variation is VariationClass.UNBOUNDED):
        return 0.0
    total = 0.0
    for c, r in scale.term_list:
        total += (c * r ** order * cmath.exp(r * x)).real
    return max(total, 0.0) if order == 0 else total


def W(scale: ScaleFunction, x):
    """W^(q)(x); zero for x < 0, right-continuous at 0."""
    return _masked(scale, x, 0)


def W_prime(scale: ScaleFunction, x):
    """Right derivative of W^(q); zero for x < 0."""
    return _masked(scale, x, 1)


def W_second(scale: ScaleFunction, x):
    if scale.variation is VariationClass.BOUNDED and np.any(np.asarray(x) == 0):
        raise DomainError("W'' at 0 is undefined for bounded variation models")
    return _masked(scale, x, 2)


def W_integral(scale: ScaleFunction, x):
    """∫_0^x W^(q)(t) dt, term by term."""
    x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
    total = np.zeros(x_arr.shape, dtype=complex)
    for c, r, p in zip(scale.coefficients, scale.rates, scale.powers):
        total = total + c * _power_exp_integral(x_arr, r, int(p))
    values = np.real(total)
    return values if values.ndim else float(values)


def _power_exp_integral(x, r, p):
    # ∫_0^x t^p e^{rt} dt by the recursion I_p = (x^p e^{rx} - p I_{p-1}) / r
    if r == 0:
        return x ** (p + 1) / (p + 1)
    ex = np.exp(r * x)
    acc = (ex - 1.0) / r
    for k in range(1, p + 1):
        acc = (x ** k * ex - k * acc) / r
    return acc


def Z(scale: ScaleFunction, x):
    """Z^(q)(x) = 1 + q ∫_0^x W^(q); equal to 1 for x <= 0."""
    if scale.q == 0:
        values = np.ones_like(np.asarray(x, dtype=float))
        return values if values.ndim else 1.0
    return 1.0 + scale.q * W_integral(scale, x)


def laplace_transform(scale: ScaleFunction, lam: float) -> float:
    """∫_0^∞ e^{-lam x} W^(q)(x) dx for lam > Phi(q), from the exponential sum."""
    if not lam > scale.phi_q:
        raise DomainError(f"transform needs lam > Phi(q) = {scale.phi_q}, got {lam}")
    total = 0j
    for c, r, p in zip(scale.coefficients, scale.rates, scale.powers):
        total += c * math.factorial(int(p)) / (lam - r) ** (int(p) + 1)
    return float(total.real)


def phi(scale: ScaleFunction) -> float:
    return scale.phi_q


def phi_prime(scale: ScaleFunction) -> float:
    """Phi'(q) = 1 / psi'(Phi(q))."""
    slope = levy_model.psi_prime(scale.model, scale.phi_q)
    if not slope > 0:
        raise DomainError(f"psi'(Phi(q)) = {slope} is not positive")
    return 1.0 / slope


def resolvent_density(scale: ScaleFunction, y):
    """u_q(y) = Phi'(q) e^{-Phi(q) y} - W^(q)(-y)."""
    if scale.q <= 0:
        raise DomainError("the resolvent density needs q > 0")
    y = np.asarray(y, dtype=float)
    values = phi_prime(scale) * np.exp(-scale.phi_q * y) - W(scale, -y)
    return values if values.ndim else float(values)


def kernel_H_at(scale: ScaleFunction, b: float, x):
    w_b = W(scale, b)
    x = np.asarray(x, dtype=float)
    values = W(scale, b - x) / w_b - np.exp(scale.phi_q * b) * W(scale, -x) / w_b
    return values if np.ndim(values) else float(values)


def kernel_H(ctx: KernelContext, x, shifted: bool = False):
    """H(b, x) = W(b-x)/W(b) - e^{Phi b} W(-x)/W(b) at level q (or q + lambda)."""
    scale = ctx.shifted if shifted else ctx.scale
    if scale is None:
        raise DomainError("no shifted scale attached to this kernel context")
    return kernel_H_at(scale, ctx.b, x)


def kernel_Wcal(scale: ScaleFunction, a: float, x, y):
    """W(x) W(a-y) / W(a) - W(x-y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    values = W(scale, x) * W(scale, a - y) / W(scale, a) - W(scale, x - y)
    return values if np.ndim(values) else float(values)


def kernel_O(scale: ScaleFunction, a: float, x):
    """W'(x) - W(x) W'(a) / W(a); zero for x < 0 where W vanishes."""
    x = np.asarray(x, dtype=float)
    values = W_prime(scale, x) - W(scale, x) * W_prime(scale, a) / W(scale, a)
    return values if np.ndim(values) else float(values)


def kernel_O_dx_at_diag(scale: ScaleFunction, a: float) -> float:
    """d/dx O(a, x) at x = a, i.e. W''(a) - W'(a)^2 / W(a)."""
    if scale.model.sigma <= 0:
        raise DomainError("the diagonal derivative of O needs a Brownian component")
    w_a = W(scale, a)
    return float(W_second(scale, a) - W_prime(scale, a) ** 2 / w_a)


def killed_potential_density(scale: ScaleFunction, b: float, y):
    """q-potential density at y of X started at 0 and killed at tau_b+.

    e^{-Phi(q) b} W^(q)(b - y) - W^(q)(-y), for y <= b.
    """
    y = np.asarray(y, dtype=float)
    values = math.exp(-scale.phi_q * b) * W(scale, b - y) - W(scale, -y)
    return values if values.ndim else float(values)


def _kernel_H_below(scale: ScaleFunction, b: float, y: float) -> float:
    """H(b, y) for y <= 0 with the e^{-Phi(q) y} growth cancelled term by term."""
    growth = math.exp(scale.phi_q * b)
    lead = int(np.argmax(scale.rates.real))
    total = 0.0
    for j, (c, r) in enumerate(scale.term_list):
        if j != lead:
            total += (c * cmath.exp(-r * y) * (cmath.exp(r * b) - growth)).real
    return total / W(scale, b)


def excursion_potential(ctx: KernelContext, g: Callable[[float], float],
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """∫_{-inf}^b g(y) H^(q)(b, y) dy for a bounded g."""
    scale, b = ctx.scale, ctx.b
    if scale.simple:
        below = lambda y: g(y) * _kernel_H_below(scale, b, y)
    else:
        below = lambda y: g(y) * kernel_H_at(scale, b, y)
    above = lambda y: g(y) * kernel_H_at(scale, b, y)
    return integrate(below, -math.inf, 0.0, cfg) + integrate(above, 0.0, b, cfg)


def two_sided_exit(scale: ScaleFunction, x: float, a: float) -> float:
    """E_x[e^{-q tau_a+}; tau_a+ < tau_0-] = W(x)/W(a)."""
    if not 0 <= x <= a:
        raise DomainError(f"two-sided exit needs 0 <= x <= a, got x={x}, a={a}")
    return W(scale, x) / W(scale, a)


def one_sided_upcrossing(scale: ScaleFunction, x: float, a: float) -> float:
    """E_x[e^{-q tau_a+}] = e^{-Phi(q)(a - x)} for x <= a."""
    return math.exp(-scale.phi_q * (a - x))


def local_time_at_zero(scale: ScaleFunction, b: float) -> float:
    """e^{-Phi(q) b} W^(q)(b): normalised q-potential mass of 0 before tau_b+."""
    return math.exp(-scale.phi_q * b) * W(scale, b)
