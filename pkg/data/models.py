# depth_ruin/data/models.py
"""
Core data models for the depth-ruin toolkit

Lévy models, excursion-depth laws, penalties and result records. Constructors
run the structural checks; economic checks (net profit, variation class)
live in processes.levy_model.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
from enum import Enum

from data.exceptions import ModelValidationError

WEIGHT_SUM_TOL = 1e-9


class ModelKind(Enum):
    """Supported families of spectrally negative Lévy processes"""
    CRAMER_LUNDBERG = "cramer_lundberg"
    BROWNIAN_DRIFT = "brownian_drift"
    JUMP_DIFFUSION = "jump_diffusion"


class VariationClass(Enum):
    """Path variation of the model"""
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"


class SeverityKind(Enum):
    """Laws for the tolerated excursion depth Y"""
    POINT_MASS = "point_mass"
    EXPONENTIAL = "exponential"
    POINT_MIXTURE = "point_mixture"


class PenaltyKind(Enum):
    """Closed-form penalty families f(pre, post)"""
    ONE = "one"
    EXP_DEFICIT = "exp_deficit"
    EXP_BOTH = "exp_both"
    DEFICIT_INDICATOR = "deficit_indicator"


class Outcome(Enum):
    """How a simulated path left the game"""
    CENSORED = 0
    BANKRUPT = 1
    UPCROSSED = 2


@dataclass(frozen=True)
class ClaimComponent:
    """One exponential component of the claim-size mixture"""
    weight: float
    rate: float


@dataclass(frozen=True)
class LevyModel:
    """Spectrally negative Lévy process X_t = x + drift*t + sigma*B_t - S_t

    S_t is compound Poisson with intensity jump_rate and claim sizes drawn from
    the hyperexponential mixture in claim_law. Components with equal rates
    are merged so the rational structure of psi is in lowest terms.
    """
    kind: ModelKind
    drift: float
    sigma: float = 0.0
    jump_rate: float = 0.0
    claim_law: Tuple[ClaimComponent, ...] = ()

    def __post_init__(self):
        for name in ("drift", "sigma", "jump_rate"):
            if not math.isfinite(getattr(self, name)):
                raise ModelValidationError(f"{name} must be finite, got {getattr(self, name)}")
        if self.sigma < 0:
            raise ModelValidationError(f"sigma must be non-negative, got {self.sigma}")
        if self.jump_rate < 0:
            raise ModelValidationError(f"jump_rate must be non-negative, got {self.jump_rate}")

        if self.kind is ModelKind.CRAMER_LUNDBERG:
            if self.sigma != 0:
                raise ModelValidationError("Cramér-Lundberg model cannot carry a Brownian part")
            if self.drift <= 0:
                raise ModelValidationError("Cramér-Lundberg premium rate must be positive")
            if self.jump_rate <= 0 or not self.claim_law:
                raise ModelValidationError("Cramér-Lundberg model needs a positive claim intensity and a claim law")
        elif self.kind is ModelKind.BROWNIAN_DRIFT:
            if self.sigma <= 0:
                raise ModelValidationError("Brownian model needs sigma > 0")
            if self.jump_rate != 0 or self.claim_law:
                raise ModelValidationError("Brownian model cannot carry jumps")
        elif self.kind is ModelKind.JUMP_DIFFUSION:
            if self.sigma <= 0:
                raise ModelValidationError("jump-diffusion model needs sigma > 0")
            if self.jump_rate <= 0 or not self.claim_law:
                raise ModelValidationError("jump-diffusion model needs a positive claim intensity and a claim law")

        if self.claim_law:
            object.__setattr__(self, "claim_law", _normalise_claim_law(self.claim_law))

    @property
    def claim_weights(self) -> Tuple[float, ...]:
        return tuple(c.weight for c in self.claim_law)

    @property
    def claim_rates(self) -> Tuple[float, ...]:
        return tuple(c.rate for c in self.claim_law)


def _normalise_claim_law(components) -> Tuple[ClaimComponent, ...]:
    merged: Dict[float, float] = {}
    for comp in components:
        if not isinstance(comp, ClaimComponent):
            comp = ClaimComponent(*comp)
        if not (comp.rate > 0 and math.isfinite(comp.rate)):
            raise ModelValidationError(f"claim rate must be positive and finite, got {comp.rate}")
        if comp.weight < 0:
            raise ModelValidationError(f"claim weight must be non-negative, got {comp.weight}")
        if comp.weight == 0:
            continue
        merged[comp.rate] = merged.get(comp.rate, 0.0) + comp.weight

    total = sum(merged.values())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ModelValidationError(f"claim weights must sum to 1, got {total}")
    return tuple(ClaimComponent(w, r) for r, w in sorted(merged.items()))


@dataclass(frozen=True)
class SeverityDistribution:
    """Law of the tolerated depth Y of a negative excursion

    point_mass uses `value` (may be +inf for "never bankrupt by depth"),
    exponential uses `rate`, point_mixture uses `atoms` as (weight, depth).
    """
    kind: SeverityKind
    value: float = 0.0
    rate: float = 1.0
    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind is SeverityKind.POINT_MASS:
            if math.isnan(self.value) or self.value < 0:
                raise ModelValidationError(f"point-mass depth must be >= 0, got {self.value}")
        elif self.kind is SeverityKind.EXPONENTIAL:
            if not (self.rate > 0 and math.isfinite(self.rate)):
                raise ModelValidationError(f"exponential depth rate must be positive, got {self.rate}")
        elif self.kind is SeverityKind.POINT_MIXTURE:
            if not self.atoms:
                raise ModelValidationError("point mixture needs at least one atom")
            atoms = tuple((float(w), float(y)) for w, y in self.atoms)
            if any(w < 0 for w, _ in atoms):
                raise ModelValidationError("point mixture weights must be non-negative")
            if any(not (y >= 0 and math.isfinite(y)) for _, y in atoms):
                raise ModelValidationError("point mixture depths must be finite and >= 0")
            total = sum(w for w, _ in atoms)
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                raise ModelValidationError(f"point mixture weights must sum to 1, got {total}")
            object.__setattr__(self, "atoms", tuple(sorted(atoms, key=lambda a: a[1])))

    @classmethod
    def point_mass(cls, y0: float) -> "SeverityDistribution":
        return cls(SeverityKind.POINT_MASS, value=float(y0))

    @classmethod
    def exponential(cls, rate: float) -> "SeverityDistribution":
        return cls(SeverityKind.EXPONENTIAL, rate=float(rate))

    @classmethod
    def mixture(cls, atoms) -> "SeverityDistribution":
        return cls(SeverityKind.POINT_MIXTURE, atoms=tuple(atoms))


@dataclass(frozen=True)
class CreepClock:
    """Exponential grace period granted to each positive excursion"""
    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ModelValidationError(f"clock rate must be positive and finite, got {self.rate}")


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty f(pre, post) of the pre-bankruptcy and bankruptcy positions

    one:                f = 1
    exp_deficit:        f = exp(theta2 * post)
    exp_both:           f = exp(theta1 * pre + theta2 * post)
    deficit_indicator:  f = 1{post < -d}
    """
    kind: PenaltyKind = PenaltyKind.ONE
    theta1: float = 0.0
    theta2: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if self.theta1 < 0:
            raise ModelValidationError(f"theta1 must be >= 0, got {self.theta1}")
        if self.theta2 < 0:
            raise ModelValidationError(f"theta2 must be >= 0 so f stays bounded, got {self.theta2}")
        if self.d < 0:
            raise ModelValidationError(f"indicator depth d must be >= 0, got {self.d}")
        if self.kind is PenaltyKind.DEFICIT_INDICATOR and not self.d > 0:
            raise ModelValidationError(f"deficit_indicator needs a positive depth d, got {self.d}")
        if self.kind is not PenaltyKind.EXP_BOTH and self.theta1 != 0:
            raise ModelValidationError("theta1 only applies to the exp_both penalty")

    @classmethod
    def one(cls) -> "PenaltySpec":
        return cls(PenaltyKind.ONE)

    @classmethod
    def exp_deficit(cls, theta2: float) -> "PenaltySpec":
        return cls(PenaltyKind.EXP_DEFICIT, theta2=theta2)

    @classmethod
    def exp_both(cls, theta1: float, theta2: float) -> "PenaltySpec":
        return cls(PenaltyKind.EXP_BOTH, theta1=theta1, theta2=theta2)

    @classmethod
    def deficit_indicator(cls, d: float) -> "PenaltySpec":
        return cls(PenaltyKind.DEFICIT_INDICATOR, d=d)


@dataclass(frozen=True)
class QuadratureConfig:
    """Accuracy contract for the adaptive quadrature"""
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_cut_mass: float = 1e-12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "tail_cut_mass"):
            value = getattr(self, name)
            if not value > 0:
                raise ModelValidationError(f"{name} must be positive, got {value}")
        if self.max_subdivisions < 1:
            raise ModelValidationError(f"max_subdivisions must be at least 1, got {self.max_subdivisions}")


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run parameters"""
    n_paths: int = 100_000
    seed: int = 20240101
    horizon: float = 500.0
    euler_dt: float = 1e-3
    excursion_floor: float = 1e-4
    antithetic: bool = False
    block_size: int = 8192
    workers: int = 1

    def __post_init__(self):
        if self.n_paths <= 0:
            raise ModelValidationError(f"n_paths must be positive, got {self.n_paths}")
        if self.block_size <= 0:
            raise ModelValidationError(f"block_size must be positive, got {self.block_size}")
        if not (self.horizon > 0):
            raise ModelValidationError(f"horizon must be positive, got {self.horizon}")
        if not (self.euler_dt > 0):
            raise ModelValidationError(f"euler_dt must be positive, got {self.euler_dt}")
        if not (self.excursion_floor > 0):
            raise ModelValidationError(f"excursion_floor must be positive, got {self.excursion_floor}")
        if self.antithetic and (self.block_size % 2 or self.n_paths % 2):
            raise ModelValidationError("antithetic sampling needs even n_paths and block_size")
        if self.seed < 0:
            raise ModelValidationError(f"seed must be non-negative, got {self.seed}")


@dataclass
class GerberShiuResult:
    """Formula-side value of a Gerber-Shiu function with its building blocks"""
    value: float
    numerator: float
    denominator: float
    terms: Dict[str, float] = field(default_factory=dict)
    error_estimate: float = 0.0
    variation: VariationClass = VariationClass.BOUNDED
    x: float = 0.0
    q: float = 0.0
    b: float = 0.0


@dataclass
class DiscretizationReport:
    """Euler estimates at the base step and at half the base step"""
    dt: float
    mean_dt: float
    se_dt: float
    mean_half: float
    se_half: float


@dataclass
class SimEstimate:
    """Monte Carlo estimate with its outcome census"""
    mean: float
    std_error: float
    n_paths: int
    n_bankrupt: int = 0
    n_upcrossed: int = 0
    n_censored: int = 0
    censored_bias_bound: float = 0.0
    discretization: Optional[DiscretizationReport] = None
    processing_time: float = 0.0


@dataclass
class RunConfig:
    """Fully parsed run: model, laws, numerics and the query grid"""
    model: LevyModel
    severity: SeverityDistribution
    penalty: PenaltySpec
    clock: Optional[CreepClock]
    quadrature: QuadratureConfig
    sim: SimConfig
    xs: List[float]
    qs: List[float]
    bs: List[float]
    y_scales: List[float] = field(default_factory=lambda: [1.0])
    z_max: float = 4.0
    creeping_kernel: str = "as_printed"
    fail_fast: bool = True
    simulation_b_offset: float = 0.0
