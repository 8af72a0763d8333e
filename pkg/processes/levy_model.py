# depth_ruin/processes/levy_model.py
"""
Spectrally negative Lévy models with hyperexponential claims.

psi(s) = drift*s + sigma^2 s^2 / 2 - jump_rate * sum_i w_i s / (mu_i + s)

Everything here is closed form; the rational structure of psi is what lets
the scale engine factor psi(s) - q exactly.
"""

import logging
import math
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from data.exceptions import ModelValidationError
from data.models import ClaimComponent, LevyModel, ModelKind, VariationClass

logger = logging.getLogger(__name__)

PSI_ZERO_TOL = 1e-12

ClaimSpec = Union[ClaimComponent, Tuple[float, float]]


def cramer_lundberg(premium_rate: float, jump_rate: float,
                    claims: Iterable[ClaimSpec] = ((1.0, 1.0),),
                    require_net_profit: bool = True) -> LevyModel:
    """X_t = x + c t - S_t with claims from a mixture of exponentials."""
    model = LevyModel(ModelKind.CRAMER_LUNDBERG, drift=premium_rate, sigma=0.0,
                      jump_rate=jump_rate, claim_law=tuple(claims))
    return _validated(model, require_net_profit)


def brownian_drift(drift: float, sigma: float, require_net_profit: bool = True) -> LevyModel:
    model = LevyModel(ModelKind.BROWNIAN_DRIFT, drift=drift, sigma=sigma)
    return _validated(model, require_net_profit)


def jump_diffusion(drift: float, sigma: float, jump_rate: float,
                   claims: Iterable[ClaimSpec] = ((1.0, 1.0),),
                   require_net_profit: bool = True) -> LevyModel:
    model = LevyModel(ModelKind.JUMP_DIFFUSION, drift=drift, sigma=sigma,
                      jump_rate=jump_rate, claim_law=tuple(claims))
    return _validated(model, require_net_profit)


def _validated(model: LevyModel, require_net_profit: bool) -> LevyModel:
    if abs(laplace_exponent(model, 0.0)) > PSI_ZERO_TOL:
        raise ModelValidationError("psi(0) does not vanish")
    if require_net_profit:
        require_admissible(model)
    logger.debug(f"Built {model.kind.value} model (psi'(0+)={psi_prime_at_zero(model):.6g})")
    return model


def require_admissible(model: LevyModel) -> None:
    """Raise unless the net profit condition psi'(0+) > 0 holds."""
    slope = psi_prime_at_zero(model)
    if not slope > 0:
        raise ModelValidationError(
            f"net profit condition fails for {model.kind.value}: psi'(0+) = {slope:.6g}"
        )


def laplace_exponent(model: LevyModel, lam):
    """psi(lam); accepts real, complex, numpy and mpmath arguments."""
    value = model.drift * lam + 0.5 * model.sigma ** 2 * lam * lam
    for comp in model.claim_law:
        value = value + model.jump_rate * comp.weight * (comp.rate / (comp.rate + lam) - 1)
    return value


def psi_prime(model: LevyModel, lam):
    value = model.drift + model.sigma ** 2 * lam
    for comp in model.claim_law:
        value = value - model.jump_rate * comp.weight * comp.rate / (comp.rate + lam) ** 2
    return value


def psi_prime_at_zero(model: LevyModel) -> float:
    return model.drift - model.jump_rate * sum(c.weight / c.rate for c in model.claim_law)


def levy_tail(model: LevyModel, z: float) -> float:
    """Pi((-inf, -z)) for z >= 0."""
    if model.jump_rate == 0:
        return 0.0
    return model.jump_rate * math.fsum(c.weight * math.exp(-c.rate * z) for c in model.claim_law)


def levy_density(model: LevyModel, u):
    """Density of Pi at u < 0 (zero for u >= 0)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    neg = u < 0
    for comp in model.claim_law:
        out = out + np.where(neg, model.jump_rate * comp.weight * comp.rate
                             * np.exp(comp.rate * np.minimum(u, 0.0)), 0.0)
    return out if out.ndim else float(out)


def exp_moment_below(model: LevyModel, theta: float, upper: float) -> float:
    """∫_{(-inf, upper)} e^{theta u} Pi(du) for upper <= 0 and theta > -min(mu)."""
    if model.jump_rate == 0 or upper == -math.inf:
        return 0.0
    upper = min(upper, 0.0)
    total = 0.0
    for comp in model.claim_law:
        k = comp.rate + theta
        total += comp.weight * comp.rate * math.exp(k * upper) / k
    return model.jump_rate * total


def mean_claim(model: LevyModel) -> float:
    return sum(c.weight / c.rate for c in model.claim_law)


def variation_class(model: LevyModel) -> VariationClass:
    return VariationClass.UNBOUNDED if model.sigma > 0 else VariationClass.BOUNDED


def model_scale(model: LevyModel) -> float:
    """Natural length scale used for the simulator's excursion floor."""
    lengths = [1.0 / c.rate for c in model.claim_law]
    if model.sigma > 0:
        lengths.append(model.sigma ** 2 / max(abs(model.drift), model.sigma))
    return max(lengths) if lengths else 1.0


def characteristic_polynomials(model: LevyModel, q: float) -> Tuple[Polynomial, Polynomial]:
    """(P, Q) with psi(s) - q = P(s) / Q(s) and Q(s) = prod_i (mu_i + s)."""
    rates: Sequence[float] = model.claim_rates
    Q = Polynomial([1.0])
    for mu in rates:
        Q = Q * Polynomial([mu, 1.0])

    P = Polynomial([-q, model.drift, 0.5 * model.sigma ** 2]) * Q
    for i, comp in enumerate(model.claim_law):
        others = Polynomial([1.0])
        for j, mu in enumerate(rates):
            if j != i:
                others = others * Polynomial([mu, 1.0])
        P = P - model.jump_rate * comp.weight * Polynomial([0.0, 1.0]) * others
    return P.trim(), Q
