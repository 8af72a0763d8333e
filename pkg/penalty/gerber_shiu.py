# depth_ruin/penalty/gerber_shiu.py
"""
Gerber-Shiu functions at the excursion-marked bankruptcy time.

Bankruptcy happens inside a negative excursion whose depth exceeds its mark Y,
or (with a Brownian component) when a positive excursion that outlived its
exponential clock creeps down to 0. phi0_* assemble the value at x = 0 as a
ratio of term integrals; phi_x extends it to 0 < x <= b.

Conventions used throughout:

* penalties are evaluated as f(pre, post) with pre the surplus just before
  bankruptcy and post the surplus at bankruptcy;
* every inner Pi(du) integral is closed form (penalties.jump_integral,
  levy_model.exp_moment_below);
* the jump window ∫_{(-y-Y, -y)} g(y + u + Y) Pi(du) of a hyperexponential
  Pi factors as sum_i e^{-mu_i y} K_i[g](Y), so the y-integral and the
  window integral are evaluated separately (see _mark_window).
"""

import logging
import math
from typing import Callable, Dict, Optional

import numpy as np

from data.exceptions import DenominatorNonPositive, DomainError, ModelValidationError
from data.models import (CreepClock, GerberShiuResult, LevyModel, PenaltySpec,
                         QuadratureConfig, SeverityDistribution, VariationClass)
from numerics.quadrature import DEFAULT_QUADRATURE, error_budget, expect_over_Y, integrate
from penalty import penalties
from processes import levy_model, severity
from processes.scale_engine import (W, ScaleFunction, build_scale, kernel_H_at,
                                    kernel_O, kernel_O_dx_at_diag, kernel_Wcal)

logger = logging.getLogger(__name__)

CREEPING_KERNELS = ("as_printed", "q")

TERM_KEYS = ("A", "B", "C", "D", "E", "F", "J", "U", "sigma_block")


# Shared building blocks

def _mark_window(model: LevyModel, Y: float, g: Callable[[float], float],
                 cfg: QuadratureConfig, points=None) -> np.ndarray:
    """K_i[g](Y) = jump_rate w_i mu_i ∫_0^Y e^{mu_i (s - Y)} g(s) ds per claim component.

    For y >= 0, ∫_{(-y-Y, -y)} g(y + u + Y) Pi(du) = sum_i e^{-mu_i y} K_i[g](Y).
    """
    if Y <= 0 or model.jump_rate == 0:
        return np.zeros(len(model.claim_law))
    out = []
    for comp in model.claim_law:
        mu = comp.rate
        inner = integrate(lambda s: math.exp(mu * (s - Y)) * g(s), 0.0, Y, cfg, points=points)
        out.append(model.jump_rate * comp.weight * mu * inner)
    return np.array(out)


def _window_weights(model: LevyModel, kernel: Callable[[float], float], b: float,
                    cfg: QuadratureConfig, points=None) -> np.ndarray:
    """∫_0^b kernel(y) e^{-mu_i y} dy per claim component."""
    return np.array([
        integrate(lambda y: kernel(y) * math.exp(-comp.rate * y), 0.0, b, cfg, points=points)
        for comp in model.claim_law
    ])


def _window_solution(scale: ScaleFunction, f: PenaltySpec, s: float, Y: float,
                     cfg: QuadratureConfig) -> float:
    """∫_0^Y Wcal(Y, s, z) ∫_{(-inf,-z)} f(z - Y, z - Y + u) Pi(du) dz.

    Discounted penalty of a negative excursion restarted at depth s - Y that
    reaches below -Y before returning to 0.
    """
    model = scale.model

    def integrand(z):
        return kernel_Wcal(scale, Y, s, z) * penalties.jump_integral(model, f, z - Y, -z)

    return integrate(integrand, 0.0, Y, cfg, points=[s])


def _check_barrier(b: float) -> None:
    if not (b > 0 and math.isfinite(b)):
        raise DomainError(f"barrier b must be positive and finite, got {b}")


def _check_q(q: float) -> None:
    if not q >= 0:
        raise DomainError(f"discount rate q must be >= 0, got {q}")


def _barrier_kernel(scale: ScaleFunction, b: float) -> Callable[[float], float]:
    return lambda y: kernel_H_at(scale, b, y)


# Classical two-sided Gerber-Shiu function

def classical_gs(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E_x[e^{-q tau_0-} f(X_{tau_0- -}, X_{tau_0-}); tau_0- < tau_b+].

    Creeping into 0 contributes f(0, 0) sigma^2/2 O(b, x); jumps below 0 from
    level y contribute f(y, y + u) against the killed potential Wcal(b, x, y).
    """
    _check_barrier(b)
    _check_q(q)
    if not 0 <= x <= b:
        raise DomainError(f"classical_gs needs 0 <= x <= b, got x={x}, b={b}")
    scale = build_scale(model, q)

    creep = 0.0
    if model.sigma > 0:
        creep = 0.5 * model.sigma ** 2 * penalties.evaluate(f, 0.0, 0.0) * kernel_O(scale, b, x)

    jump = 0.0
    if model.jump_rate > 0:
        jump = integrate(lambda y: kernel_Wcal(scale, b, x, y) * penalties.jump_integral(model, f, y, -y),
                         0.0, b, cfg, points=[x])
    return creep + jump


# Bounded variation

def term_A(model: LevyModel, q: float, b: float, f: PenaltySpec, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b H(b, y) ∫_{(-inf, -y-Y)} f(y, y + u) Pi(du) dy: a claim from y overshoots -Y."""
    _check_barrier(b)
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)

    def given_Y(Y):
        return integrate(lambda y: kernel_H_at(scale, b, y) * penalties.jump_integral(model, f, y, -y - Y),
                         0.0, b, cfg)

    return expect_over_Y(given_Y, Y_law, cfg)


def term_B(model: LevyModel, q: float, b: float, f: PenaltySpec, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """A claim lands in (-Y, 0) and a later claim inside the same excursion passes -Y."""
    _check_barrier(b)
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    weights = _window_weights(model, _barrier_kernel(scale, b), b, cfg)

    def given_Y(Y):
        window = _mark_window(model, Y, lambda s: _window_solution(scale, f, s, Y, cfg), cfg)
        return float(weights @ window)

    return expect_over_Y(given_Y, Y_law, cfg)


def _recovery_window(scale: ScaleFunction, Y: float, cfg: QuadratureConfig) -> np.ndarray:
    """K_i[W(s)/W(Y)](Y): claim into (-Y, 0) followed by a return to 0 above -Y."""
    w_Y = W(scale, Y)
    return _mark_window(scale.model, Y, lambda s: W(scale, s) / w_Y, cfg)


def denominator_integral(model: LevyModel, q: float, b: float, Y_law: SeverityDistribution,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b H(b, y) ∫_{(-y-Y, -y)} W(y + u + Y)/W(Y) Pi(du) dy."""
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    weights = _window_weights(model, _barrier_kernel(scale, b), b, cfg)
    return expect_over_Y(lambda Y: float(weights @ _recovery_window(scale, Y, cfg)), Y_law, cfg)


def denominator_bv(model: LevyModel, q: float, b: float, Y_law: SeverityDistribution,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """1/W(0+) minus the recovery integral; lies in (0, 1/W(0+)]."""
    _check_barrier(b)
    _require_variation(model, VariationClass.BOUNDED)
    scale = build_scale(model, q)
    value = 1.0 / scale.w_zero - denominator_integral(model, q, b, Y_law, cfg)
    if not value > 0:
        raise DenominatorNonPositive(f"bounded variation denominator is {value} at q={q}, b={b}")
    return value


def phi0_bounded_variation(model: LevyModel, q: float, b: float, f: PenaltySpec,
                           Y_law: SeverityDistribution,
                           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> GerberShiuResult:
    _require_variation(model, VariationClass.BOUNDED)
    levy_model.require_admissible(model)
    _check_q(q)
    _check_barrier(b)

    with error_budget() as budget:
        a_term = term_A(model, q, b, f, Y_law, cfg)
        b_term = term_B(model, q, b, f, Y_law, cfg)
        recovery = denominator_integral(model, q, b, Y_law, cfg)

    scale = build_scale(model, q)
    denominator = 1.0 / scale.w_zero - recovery
    if not denominator > 0:
        raise DenominatorNonPositive(f"bounded variation denominator is {denominator} at q={q}, b={b}")

    numerator = a_term + b_term
    terms = dict.fromkeys(TERM_KEYS, 0.0)
    terms.update(A=a_term, B=b_term, R=recovery)
    result = GerberShiuResult(value=numerator / denominator, numerator=numerator,
                              denominator=denominator, terms=terms, error_estimate=budget.total,
                              variation=VariationClass.BOUNDED, x=0.0, q=q, b=b)
    logger.debug(f"phi0 (bounded variation) q={q} b={b}: {result.value:.10g}")
    return result


# Unbounded variation

def term_D(model: LevyModel, q: float, b: float, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b H(b, x) ∫_{(-inf, -x-Y)} e^{Phi(q)(x + y)} Pi(dy) dx."""
    _check_barrier(b)
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    phi_q = scale.phi_q

    def given_Y(Y):
        return integrate(lambda x: kernel_H_at(scale, b, x) * math.exp(phi_q * x)
                         * levy_model.exp_moment_below(model, phi_q, -x - Y), 0.0, b, cfg)

    return expect_over_Y(given_Y, Y_law, cfg)


def term_E(model: LevyModel, q: float, b: float, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b H(b, x) ∫_{(-x-Y, -x)} (e^{Phi(q)(x+y)} - W(x+y+Y)/W(Y)) Pi(dy) dx."""
    _check_barrier(b)
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    phi_q = scale.phi_q
    weights = _window_weights(model, _barrier_kernel(scale, b), b, cfg)

    def given_Y(Y):
        w_Y = W(scale, Y)
        window = _mark_window(model, Y, lambda s: math.exp(phi_q * (s - Y)) - W(scale, s) / w_Y, cfg)
        return float(weights @ window)

    return expect_over_Y(given_Y, Y_law, cfg)


def term_F(model: LevyModel, q: float, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """-sigma^2/2 E[e^{-Phi Y} dO(Y, Y)] + E ∫_0^Y ∫_{(-inf,-y)} e^{Phi(y+z-Y)} O(Y, Y-y) Pi(dz) dy."""
    if model.sigma == 0:
        logger.debug("term F skipped: no Brownian component")
        return 0.0
    scale = build_scale(model, q)
    phi_q = scale.phi_q

    def given_Y(Y):
        creep = -0.5 * model.sigma ** 2 * math.exp(-phi_q * Y) * kernel_O_dx_at_diag(scale, Y)
        jumps = 0.0
        if model.jump_rate > 0:
            jumps = integrate(lambda y: math.exp(phi_q * (y - Y)) * levy_model.exp_moment_below(model, phi_q, -y)
                              * kernel_O(scale, Y, Y - y), 0.0, Y, cfg)
        return creep + jumps

    return expect_over_Y(given_Y, Y_law, cfg)


def term_J(model: LevyModel, lam: float, q: float, b: float,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE, creeping_kernel: str = "as_printed") -> float:
    """∫_0^b ((lam+q) H^(lam+q)(b,y) - q H^(q)(b,y)) O(b, y) dy.

    O is taken at level 0 ("as_printed") or at level q ("q").
    """
    _check_barrier(b)
    if creeping_kernel not in CREEPING_KERNELS:
        raise ModelValidationError(f"unknown creeping kernel {creeping_kernel!r}")
    if not lam > 0:
        raise DomainError(f"clock rate must be positive, got {lam}")
    scale_q = build_scale(model, q)
    scale_shift = build_scale(model, lam + q)
    scale_o = build_scale(model, 0.0) if creeping_kernel == "as_printed" else scale_q

    def integrand(y):
        o_value = kernel_O(scale_o, b, y)
        if o_value == 0.0:
            return 0.0
        return ((lam + q) * kernel_H_at(scale_shift, b, y) - q * kernel_H_at(scale_q, b, y)) * o_value

    # O(b, y) vanishes for y < 0
    return integrate(integrand, 0.0, b, cfg)


def term_C(model: LevyModel, q: float, f: PenaltySpec, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """-sigma^2/2 E[f(-Y,-Y) dO(Y,Y)] + E ∫_0^Y ∫_{(-inf,-y)} f(y-Y, y+z-Y) O(Y, Y-y) Pi(dz) dy."""
    if model.sigma == 0:
        logger.debug("term C skipped: no Brownian component")
        return 0.0
    scale = build_scale(model, q)

    def given_Y(Y):
        creep = (-0.5 * model.sigma ** 2 * penalties.evaluate(f, -Y, -Y)
                 * kernel_O_dx_at_diag(scale, Y))
        jumps = 0.0
        if model.jump_rate > 0:
            jumps = integrate(lambda y: penalties.jump_integral(model, f, y - Y, -y) * kernel_O(scale, Y, Y - y),
                              0.0, Y, cfg)
        return creep + jumps

    return expect_over_Y(given_Y, Y_law, cfg)


def term_U(model: LevyModel, q: float, b: float, f: PenaltySpec, Y_law: SeverityDistribution,
           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b H(b,x) ∫_{(-x-Y,-x)} O(Y, Y+x+y) f(-Y,-Y) Pi(dy) dx."""
    _check_barrier(b)
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    weights = _window_weights(model, _barrier_kernel(scale, b), b, cfg)

    def given_Y(Y):
        window = _mark_window(model, Y, lambda s: kernel_O(scale, Y, s), cfg)
        return penalties.evaluate(f, -Y, -Y) * float(weights @ window)

    return expect_over_Y(given_Y, Y_law, cfg)


def phi0_unbounded_variation(model: LevyModel, q: float, b: float, f: PenaltySpec,
                             Y_law: SeverityDistribution, clock: CreepClock,
                             cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                             creeping_kernel: str = "as_printed") -> GerberShiuResult:
    _require_variation(model, VariationClass.UNBOUNDED)
    levy_model.require_admissible(model)
    severity.require_bounded_away_from_zero(Y_law)
    if clock is None:
        raise ModelValidationError("unbounded variation models need a creeping clock")
    _check_q(q)
    _check_barrier(b)
    half_var = 0.5 * model.sigma ** 2

    with error_budget() as budget:
        terms: Dict[str, float] = {
            "A": term_A(model, q, b, f, Y_law, cfg),
            "B": term_B(model, q, b, f, Y_law, cfg),
            "C": term_C(model, q, f, Y_law, cfg),
            "D": term_D(model, q, b, Y_law, cfg),
            "E": term_E(model, q, b, Y_law, cfg),
            "F": term_F(model, q, Y_law, cfg),
            "J": term_J(model, clock.rate, q, b, cfg, creeping_kernel),
            "U": term_U(model, q, b, f, Y_law, cfg),
        }

    scale = build_scale(model, q)
    creep_penalty = penalties.evaluate(f, 0.0, 0.0)
    terms["sigma_block"] = half_var * (terms["U"] + terms["C"] + creep_penalty * terms["J"])
    numerator = terms["A"] + terms["B"] + terms["sigma_block"]
    denominator = (math.exp(scale.phi_q * b) / W(scale, b) + terms["D"] + terms["E"]
                   + half_var * (terms["F"] + terms["J"]))
    if not denominator > 0:
        raise DenominatorNonPositive(f"unbounded variation denominator is {denominator} at q={q}, b={b}")

    result = GerberShiuResult(value=numerator / denominator, numerator=numerator,
                              denominator=denominator, terms=terms, error_estimate=budget.total,
                              variation=VariationClass.UNBOUNDED, x=0.0, q=q, b=b)
    logger.debug(f"phi0 (unbounded variation) q={q} b={b}: {result.value:.10g}")
    return result


def phi0(model: LevyModel, q: float, b: float, f: PenaltySpec, Y_law: SeverityDistribution,
         clock: Optional[CreepClock] = None, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
         creeping_kernel: str = "as_printed") -> GerberShiuResult:
    """phi_f(0, q, b) for either variation class."""
    if levy_model.variation_class(model) is VariationClass.BOUNDED:
        return phi0_bounded_variation(model, q, b, f, Y_law, cfg)
    return phi0_unbounded_variation(model, q, b, f, Y_law, clock, cfg, creeping_kernel)


# Positive initial surplus

def _potential_kernel(scale: ScaleFunction, b: float, x: float) -> Callable[[float], float]:
    return lambda y: kernel_Wcal(scale, b, x, y)


def term_I(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
           Y_law: SeverityDistribution, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """First passage below 0 lands in (-Y, 0); the same excursion then passes -Y by a jump or by creeping."""
    _check_barrier(b)
    if model.jump_rate == 0 or x == 0 and model.sigma > 0:
        return 0.0
    scale = build_scale(model, q)
    weights = _window_weights(model, _potential_kernel(scale, b, x), b, cfg, points=[x])

    def given_Y(Y):
        window = _mark_window(model, Y, lambda s: _window_solution(scale, f, s, Y, cfg), cfg)
        value = float(weights @ window)
        if model.sigma > 0:
            # creeping down to -Y from the landing point, shifted by Y
            creep = _mark_window(model, Y, lambda s: kernel_O(scale, Y, s), cfg)
            value += 0.5 * model.sigma ** 2 * penalties.evaluate(f, -Y, -Y) * float(weights @ creep)
        return value

    return expect_over_Y(given_Y, Y_law, cfg)


def recovery_term(model: LevyModel, x: float, q: float, b: float, Y_law: SeverityDistribution,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E_x[e^{-q tau_0-} W(X_{tau_0-} + Y)/W(Y); tau_0- < tau_b+, X_{tau_0-} > -Y].

    Discounted weight of reaching 0 again after a claim left a survivable deficit.
    """
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)
    weights = _window_weights(model, _potential_kernel(scale, b, x), b, cfg, points=[x])
    return expect_over_Y(lambda Y: float(weights @ _recovery_window(scale, Y, cfg)), Y_law, cfg)


def creeping_block(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                   clock: CreepClock) -> float:
    """f(0,0) sigma^2/2 (O^(q)(b,x) - O^(q+lam)(b,x)): creeping after the clock rang."""
    if model.sigma == 0:
        return 0.0
    scale_q = build_scale(model, q)
    scale_shift = build_scale(model, q + clock.rate)
    return (penalties.evaluate(f, 0.0, 0.0) * 0.5 * model.sigma ** 2
            * (kernel_O(scale_q, b, x) - kernel_O(scale_shift, b, x)))


def jump_below_mark(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                    Y_law: SeverityDistribution, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E ∫_0^b ∫_{(-inf, -(y+Y))} f(y, y+u) Wcal(b, x, y) Pi(du) dy: first claim below 0 already passes -Y."""
    if model.jump_rate == 0:
        return 0.0
    scale = build_scale(model, q)

    def given_Y(Y):
        return integrate(lambda y: kernel_Wcal(scale, b, x, y) * penalties.jump_integral(model, f, y, -y - Y),
                         0.0, b, cfg, points=[x])

    return expect_over_Y(given_Y, Y_law, cfg)


def phi_x(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
          Y_law: SeverityDistribution, clock: Optional[CreepClock] = None,
          cfg: QuadratureConfig = DEFAULT_QUADRATURE,
          creeping_kernel: str = "as_printed") -> GerberShiuResult:
    """phi_f(x, q, b) for 0 <= x <= b; x = 0 is phi0 itself.

    Splits on how the path first goes below 0 before reaching b: a claim that
    passes -Y at once, creeping after the clock rang, a claim into (-Y, 0)
    followed by a deeper claim in the same excursion, or a restart from 0
    (by creeping before the clock, or by recovering from a shallow claim)
    after which the process is back at phi0.
    """
    _check_barrier(b)
    if not 0 <= x <= b:
        raise DomainError(f"phi_x needs 0 <= x <= b, got x={x}, b={b}")
    base = phi0(model, q, b, f, Y_law, clock, cfg, creeping_kernel)
    if x == 0:
        return base

    with error_budget() as budget:
        breakdown = {
            "jump_below_mark": jump_below_mark(model, x, q, b, f, Y_law, cfg),
            "creep_after_clock": creeping_block(model, x, q, b, f, clock) if model.sigma > 0 else 0.0,
            "I": term_I(model, x, q, b, f, Y_law, cfg),
        }
        restart_creep = 0.0
        if model.sigma > 0:
            restart_creep = (0.5 * model.sigma ** 2
                             * kernel_O(build_scale(model, q + clock.rate), b, x) * base.value)
        breakdown["restart_creep"] = restart_creep
        breakdown["restart_jump"] = recovery_term(model, x, q, b, Y_law, cfg) * base.value

    value = math.fsum(breakdown.values())
    terms = dict(base.terms)
    terms.update(breakdown)
    terms["phi0"] = base.value
    return GerberShiuResult(value=value, numerator=value, denominator=1.0, terms=terms,
                            error_estimate=budget.total + base.error_estimate,
                            variation=base.variation, x=x, q=q, b=b)


def _require_variation(model: LevyModel, expected: VariationClass) -> None:
    actual = levy_model.variation_class(model)
    if actual is not expected:
        raise ModelValidationError(
            f"{model.kind.value} has {actual.value} variation; this formula needs {expected.value}"
        )
