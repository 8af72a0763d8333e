# depth_ruin/simulation/simulator.py
"""
Monte Carlo oracle for Gerber-Shiu functions at the excursion-marked
bankruptcy time, and for the classical exit identities used as controls.

Paths are simulated in fixed-size blocks. Each block has its own Philox
stream, so the estimate is the same whether the blocks run in one process or
across a pool. Block moments are merged in block order with the
parallel-variance update.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime
from typing import List, Optional, Tuple

import numpy as np
import psutil

from data.exceptions import (DiscretizationUnstable, DomainError, HorizonTooShort,
                             ModelValidationError)
from data.models import (CreepClock, DiscretizationReport, LevyModel, PenaltySpec,
                         SeverityDistribution, SeverityKind, SimConfig, SimEstimate,
                         VariationClass)
from penalty import penalties
from processes import levy_model, severity
from simulation.paths import (BANKRUPT, CENSORED, UPCROSSED, PathRequest, simulate_block_bv,
                              simulate_block_ubv)
from simulation.streams import BlockDraws, block_generator

logger = logging.getLogger(__name__)

EXACT_STREAM = 0
EULER_STREAM = 1
EXTRA_CLAIMS_STREAM = 2

HORIZON_SE_FRACTION = 0.1
HORIZON_SUP_FRACTION = 1e-8
DISCRETIZATION_BAND = 5.0


@dataclass
class BlockSummary:
    """Sample moments and outcome census of one or more blocks"""
    count: int
    mean: float
    m2: float
    n_paths: int
    n_bankrupt: int
    n_upcrossed: int
    n_censored: int

    def merge(self, other: "BlockSummary") -> "BlockSummary":
        count = self.count + other.count
        if count == 0:
            return replace(self)
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return BlockSummary(count=count, mean=mean, m2=m2,
                            n_paths=self.n_paths + other.n_paths,
                            n_bankrupt=self.n_bankrupt + other.n_bankrupt,
                            n_upcrossed=self.n_upcrossed + other.n_upcrossed,
                            n_censored=self.n_censored + other.n_censored)

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


def summarize_block(payoff: np.ndarray, outcome: np.ndarray, antithetic: bool) -> BlockSummary:
    """Moments of one block; antithetic blocks contribute pair averages."""
    samples = payoff
    if antithetic:
        half = len(payoff) // 2
        samples = 0.5 * (payoff[:half] + payoff[half:])
    mean = float(samples.mean()) if len(samples) else 0.0
    m2 = float(np.sum((samples - mean) ** 2))
    return BlockSummary(count=len(samples), mean=mean, m2=m2, n_paths=len(payoff),
                        n_bankrupt=int(np.count_nonzero(outcome == BANKRUPT)),
                        n_upcrossed=int(np.count_nonzero(outcome == UPCROSSED)),
                        n_censored=int(np.count_nonzero(outcome == CENSORED)))


def run_block(job: Tuple[PathRequest, int, int, int, int]) -> BlockSummary:
    """Simulate block `index` of `stream`; top level so the pool can pickle it."""
    req, seed, stream, index, size = job
    rng = block_generator(seed, index, stream)
    draws = BlockDraws(rng, size, req.antithetic)
    if levy_model.variation_class(req.model) is VariationClass.BOUNDED:
        paths = simulate_block_bv(req, draws, size)
    else:
        paths = simulate_block_ubv(req, draws, size, block_generator(seed, index, EXTRA_CLAIMS_STREAM))
    return summarize_block(paths.payoff, paths.outcome, req.antithetic)


def block_sizes(n_paths: int, block_size: int) -> List[int]:
    full, rest = divmod(n_paths, block_size)
    return [block_size] * full + ([rest] if rest else [])


def resolve_workers(workers: int) -> int:
    """Non-positive worker counts mean one worker per physical core."""
    if workers > 0:
        return workers
    return psutil.cpu_count(logical=False) or 1


def run_paths(req: PathRequest, cfg: SimConfig, stream: int) -> BlockSummary:
    jobs = [(req, cfg.seed, stream, index, size)
            for index, size in enumerate(block_sizes(cfg.n_paths, cfg.block_size))]
    workers = min(resolve_workers(cfg.workers), len(jobs))

    if workers > 1:
        try:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                summaries = list(executor.map(run_block, jobs))
        except (OSError, RuntimeError) as e:
            logger.warning(f"Parallel simulation failed: {e}. Falling back to sequential execution.")
            summaries = [run_block(job) for job in jobs]
    else:
        summaries = [run_block(job) for job in jobs]

    total = summaries[0]
    for summary in summaries[1:]:
        total = total.merge(summary)
    return total


def censored_bias_bound(sup_f: float, q: float, horizon: float, n_censored: int, n_paths: int) -> float:
    """Largest discounted payoff the censored paths could have carried, per path."""
    if n_censored == 0:
        return 0.0
    return sup_f * math.exp(-q * horizon) * n_censored / n_paths


def require_horizon(bound: float, se: float, sup_f: float, horizon: float) -> None:
    """Raise unless the censoring bias is below 0.1 SE or negligible against sup f.

    A zero-variance estimate passes as long as the censored paths could only
    carry a vanishing share of sup f.
    """
    tolerance = max(HORIZON_SE_FRACTION * se, HORIZON_SUP_FRACTION * sup_f)
    if bound > tolerance:
        raise HorizonTooShort(
            f"censored paths may carry {bound:.3g} per path, above the tolerance {tolerance:.3g} "
            f"(SE {se:.3g}); increase the horizon beyond {horizon}"
        )


def _estimate(req: PathRequest, cfg: SimConfig, stream: int, sup_f: float) -> SimEstimate:
    start_time = datetime.now()
    total = run_paths(req, cfg, stream)
    bound = censored_bias_bound(sup_f, req.q, req.horizon, total.n_censored, total.n_paths)
    se = total.std_error

    if total.n_censored:
        logger.warning(f"{total.n_censored} of {total.n_paths} paths censored at t={req.horizon} "
                       f"(bias bound {bound:.3g}, SE {se:.3g})")
    require_horizon(bound, se, sup_f, req.horizon)

    processing_time = (datetime.now() - start_time).total_seconds()
    logger.info(f"Simulated {total.n_paths} {req.mode} paths at x={req.x}, q={req.q}, b={req.b}: "
                f"mean={total.mean:.6g} SE={se:.3g} ({processing_time:.2f}s)")
    return SimEstimate(mean=total.mean, std_error=se, n_paths=total.n_paths,
                       n_bankrupt=total.n_bankrupt, n_upcrossed=total.n_upcrossed,
                       n_censored=total.n_censored, censored_bias_bound=bound,
                       processing_time=processing_time)


def _estimate_discretized(req: PathRequest, cfg: SimConfig, sup_f: float) -> SimEstimate:
    """Run the Euler kernel at dt and dt/2 on matched random numbers and keep dt/2.

    Both runs read the same stream; each dt step sums the Brownian increments
    and claims of two dt/2 steps.
    """
    coarse = _estimate(replace(req, dt=cfg.euler_dt, substeps=2), cfg, EULER_STREAM, sup_f)
    fine = _estimate(replace(req, dt=cfg.euler_dt / 2.0, substeps=1), cfg, EULER_STREAM, sup_f)

    gap = abs(coarse.mean - fine.mean)
    band = DISCRETIZATION_BAND * math.hypot(coarse.std_error, fine.std_error)
    if gap > band:
        raise DiscretizationUnstable(
            f"Euler estimates at dt={cfg.euler_dt} ({coarse.mean:.6g}) and dt/2 ({fine.mean:.6g}) "
            f"differ by {gap:.3g} > {DISCRETIZATION_BAND} SE ({band:.3g})"
        )

    fine.discretization = DiscretizationReport(dt=cfg.euler_dt, mean_dt=coarse.mean, se_dt=coarse.std_error,
                                               mean_half=fine.mean, se_half=fine.std_error)
    fine.processing_time += coarse.processing_time
    return fine


def _check_query(x: float, q: float, b: float) -> None:
    if not b > 0:
        raise DomainError(f"barrier b must be positive, got {b}")
    if not q >= 0:
        raise DomainError(f"q must be non-negative, got {q}")
    if not x >= 0:
        raise DomainError(f"initial reserve must be non-negative, got {x}")


def _request(model: LevyModel, x: float, q: float, b: float, penalty: PenaltySpec,
             law: SeverityDistribution, cfg: SimConfig, mode: str,
             clock: Optional[CreepClock] = None) -> PathRequest:
    return PathRequest(model=model, x=float(x), q=float(q), b=float(b), penalty=penalty, severity=law,
                       clock=clock, mode=mode, horizon=cfg.horizon, dt=cfg.euler_dt,
                       excursion_floor=cfg.excursion_floor * levy_model.model_scale(model),
                       antithetic=cfg.antithetic)


def _run(req: PathRequest, cfg: SimConfig, sup_f: float) -> SimEstimate:
    if levy_model.variation_class(req.model) is VariationClass.BOUNDED:
        return _estimate(req, cfg, EXACT_STREAM, sup_f)
    return _estimate_discretized(req, cfg, sup_f)


def simulate_bv(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                Y_law: SeverityDistribution, cfg: SimConfig) -> SimEstimate:
    """Exact event-driven estimate of the bankruptcy Gerber-Shiu function."""
    if levy_model.variation_class(model) is not VariationClass.BOUNDED:
        raise ModelValidationError("simulate_bv needs a bounded variation model")
    _check_query(x, q, b)
    req = _request(model, x, q, b, f, Y_law, cfg, "bankruptcy")
    return _estimate(req, cfg, EXACT_STREAM, penalties.sup_bound(f, b))


def simulate_ubv(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                 Y_law: SeverityDistribution, clock: CreepClock, cfg: SimConfig) -> SimEstimate:
    """Euler estimate with Brownian-bridge extrema, reported at dt and dt/2.

    A point mass at +inf is accepted as the "never bankrupt by depth" law;
    any other law must stay away from 0.
    """
    if levy_model.variation_class(model) is not VariationClass.UNBOUNDED:
        raise ModelValidationError("simulate_ubv needs a Brownian component")
    if clock is None:
        raise ModelValidationError("unbounded variation bankruptcy needs a creeping clock")
    if not (Y_law.kind is SeverityKind.POINT_MASS and math.isinf(Y_law.value)):
        severity.require_bounded_away_from_zero(Y_law)
    _check_query(x, q, b)
    req = _request(model, x, q, b, f, Y_law, cfg, "bankruptcy", clock)
    return _estimate_discretized(req, cfg, penalties.sup_bound(f, b))


def estimate_two_sided_exit(model: LevyModel, x: float, a: float, q: float, cfg: SimConfig) -> SimEstimate:
    """E_x[e^{-q tau_a+}; tau_a+ < tau_0-]."""
    if not 0 <= x <= a:
        raise DomainError(f"two-sided exit needs 0 <= x <= a, got x={x}, a={a}")
    if not q >= 0:
        raise DomainError(f"q must be non-negative, got {q}")
    req = _request(model, x, q, a, PenaltySpec.one(), SeverityDistribution.point_mass(0.0), cfg, "exit")
    return _run(req, cfg, 1.0)


def estimate_classical(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
                       cfg: SimConfig) -> SimEstimate:
    """E_x[e^{-q tau_0-} f(X_{tau_0- -}, X_{tau_0-}); tau_0- < tau_b+]."""
    _check_query(x, q, b)
    req = _request(model, x, q, b, f, SeverityDistribution.point_mass(0.0), cfg, "classical")
    return _run(req, cfg, penalties.sup_bound(f, b))


def simulate(model: LevyModel, x: float, q: float, b: float, f: PenaltySpec,
             Y_law: SeverityDistribution, clock: Optional[CreepClock], cfg: SimConfig) -> SimEstimate:
    """Dispatch on the variation class of the model."""
    if levy_model.variation_class(model) is VariationClass.BOUNDED:
        return simulate_bv(model, x, q, b, f, Y_law, cfg)
    return simulate_ubv(model, x, q, b, f, Y_law, clock, cfg)
