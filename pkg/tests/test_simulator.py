# depth_ruin/tests/test_simulator.py
"""
Tests for the Monte Carlo oracle

Estimates are compared with exact targets inside a 4 standard error band.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from data.exceptions import DomainError, HorizonTooShort, ModelValidationError
from data.models import CreepClock, PenaltySpec, SeverityDistribution, SimConfig
from penalty import gerber_shiu
from processes import levy_model, scale_engine
from simulation import simulator
from simulation.paths import (BANKRUPT, CENSORED, UPCROSSED, PathRequest, simulate_block_bv,
                              simulate_block_ubv, step_draws)
from simulation.simulator import BlockSummary, summarize_block
from simulation.streams import BlockDraws, block_generator

BAND = 4.0


def within_band(estimate, target):
    return abs(estimate.mean - target) <= BAND * estimate.std_error + 1e-12


class TestBlockSummary:
    """Moment merging and the censoring bound"""

    def test_merge_matches_pooled_moments(self):
        """Merging two blocks equals summarising their concatenation"""
        rng = np.random.default_rng(3)
        a, b = rng.random(100), rng.random(37)
        outcome_a = np.full(100, BANKRUPT, dtype=np.int8)
        outcome_b = np.full(37, UPCROSSED, dtype=np.int8)

        merged = summarize_block(a, outcome_a, False).merge(summarize_block(b, outcome_b, False))
        pooled = summarize_block(np.concatenate([a, b]), np.concatenate([outcome_a, outcome_b]), False)

        assert merged.mean == pytest.approx(pooled.mean, rel=1e-12)
        assert merged.m2 == pytest.approx(pooled.m2, rel=1e-10)
        assert merged.n_bankrupt == 100
        assert merged.n_upcrossed == 37

    def test_antithetic_summary_uses_pair_averages(self):
        """Pairs collapse to one sample each"""
        payoff = np.array([1.0, 0.0, 0.0, 1.0])
        summary = summarize_block(payoff, np.full(4, BANKRUPT, dtype=np.int8), True)

        assert summary.count == 2
        assert summary.mean == 0.5
        assert summary.std_error == 0.0

    def test_single_sample_has_no_error_estimate(self):
        """SE needs at least two samples"""
        assert BlockSummary(1, 0.5, 0.0, 1, 1, 0, 0).std_error == 0.0

    def test_censored_bias_bound(self):
        """sup f e^{-q horizon} times the censored fraction"""
        assert simulator.censored_bias_bound(1.0, 0.0, 10.0, 0, 100) == 0.0
        assert simulator.censored_bias_bound(2.0, 0.1, 10.0, 5, 100) == pytest.approx(2.0 * math.exp(-1.0) * 0.05)

    def test_horizon_tolerance(self):
        """The bias bound is held to 0.1 SE, or to a vanishing share of sup f when SE is 0"""
        simulator.require_horizon(0.0, 0.0, 1.0, 10.0)
        simulator.require_horizon(1e-12, 0.0, 1.0, 10.0)
        simulator.require_horizon(5e-4, 0.01, 1.0, 10.0)
        with pytest.raises(HorizonTooShort):
            simulator.require_horizon(0.05, 0.0, 1.0, 10.0)
        with pytest.raises(HorizonTooShort):
            simulator.require_horizon(0.002, 0.01, 1.0, 10.0)

    def test_block_sizes(self):
        """Full blocks followed by the remainder"""
        assert simulator.block_sizes(2500, 1000) == [1000, 1000, 500]
        assert simulator.block_sizes(2000, 1000) == [1000, 1000]

    def test_resolve_workers(self):
        """Non-positive counts fall back to the physical core count"""
        assert simulator.resolve_workers(3) == 3
        assert simulator.resolve_workers(0) >= 1


class TestBoundedVariationPaths:
    """Exact event-driven Cramér-Lundberg paths"""

    def setup_method(self):
        """Premium 1.5, unit intensity, Exp(1) claims"""
        self.model = levy_model.cramer_lundberg(1.5, 1.0, [(1.0, 1.0)])
        self.cfg = SimConfig(n_paths=20_000, seed=20240101, block_size=5000)

    def test_two_sided_exit(self):
        """P_1(tau_2+ < tau_0-) = 0.794125"""
        estimate = simulator.estimate_two_sided_exit(self.model, 1.0, 2.0, 0.0, self.cfg)

        assert within_band(estimate, 0.794125)
        assert estimate.n_censored == 0

    def test_exit_from_the_barrier(self):
        """x = a exits immediately with probability one"""
        estimate = simulator.estimate_two_sided_exit(self.model, 2.0, 2.0, 0.0, self.cfg)

        assert estimate.mean == 1.0
        assert estimate.std_error == 0.0

    def test_classical_control(self):
        """The classical estimator agrees with the two-sided formula"""
        target = gerber_shiu.classical_gs(self.model, 1.0, 0.05, 3.0, PenaltySpec.exp_deficit(0.5))
        estimate = simulator.estimate_classical(self.model, 1.0, 0.05, 3.0, PenaltySpec.exp_deficit(0.5), self.cfg)

        assert within_band(estimate, target)

    def test_unreachable_mark_never_bankrupts(self):
        """A huge point-mass mark leaves only upcrossings"""
        estimate = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(),
                                         SeverityDistribution.point_mass(1e6), SimConfig(n_paths=2000, block_size=1000))

        assert estimate.mean == 0.0
        assert estimate.n_bankrupt == 0
        assert estimate.n_upcrossed == 2000

    def test_bankruptcy_follows_classical_ruin(self):
        """T_B >= tau_0- on every bankrupt path and upcrossed paths pay nothing"""
        req = PathRequest(model=self.model, x=0.5, q=0.05, b=3.0, penalty=PenaltySpec.one(),
                          severity=SeverityDistribution.exponential(1.0))
        paths = simulate_block_bv(req, BlockDraws(block_generator(7, 0), 2000), 2000)

        bankrupt = paths.outcome == BANKRUPT
        assert bankrupt.any()
        assert np.all(paths.event_time[bankrupt] >= paths.first_ruin[bankrupt])
        assert np.all(paths.payoff[paths.outcome == UPCROSSED] == 0.0)
        assert not np.any(paths.outcome == CENSORED)

    def test_independent_of_worker_count(self):
        """Fixed blocks and per-block streams make the pool invisible"""
        law = SeverityDistribution.point_mass(1.0)
        serial = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                       SimConfig(n_paths=4000, block_size=1000, workers=1))
        pooled = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                       SimConfig(n_paths=4000, block_size=1000, workers=2))

        assert serial.mean == pooled.mean
        assert serial.std_error == pooled.std_error

    def test_seed_changes_the_estimate(self):
        """Different seeds give different samples"""
        law = SeverityDistribution.point_mass(1.0)
        first = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                      SimConfig(n_paths=2000, block_size=1000, seed=1))
        second = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                       SimConfig(n_paths=2000, block_size=1000, seed=2))

        assert first.mean != second.mean

    def test_antithetic_sampling(self):
        """Antithetic pairs still estimate the exit probability"""
        cfg = SimConfig(n_paths=20_000, block_size=5000, antithetic=True)
        estimate = simulator.estimate_two_sided_exit(self.model, 1.0, 2.0, 0.0, cfg)

        assert within_band(estimate, 0.794125)

    def test_short_horizon_is_reported(self):
        """Censoring that could move the estimate raises"""
        with pytest.raises(HorizonTooShort):
            simulator.simulate_bv(self.model, 0.0, 0.0, 3.0, PenaltySpec.one(),
                                  SeverityDistribution.point_mass(1.0),
                                  SimConfig(n_paths=1000, block_size=1000, horizon=0.5))

    def test_query_validation(self):
        """b <= 0, q < 0 and x < 0 are rejected; a Brownian model is not bounded variation"""
        law = SeverityDistribution.point_mass(1.0)
        with pytest.raises(DomainError):
            simulator.simulate_bv(self.model, 0.0, 0.05, 0.0, PenaltySpec.one(), law, self.cfg)
        with pytest.raises(DomainError):
            simulator.simulate_bv(self.model, 0.0, -0.05, 3.0, PenaltySpec.one(), law, self.cfg)
        with pytest.raises(DomainError):
            simulator.estimate_two_sided_exit(self.model, 3.0, 2.0, 0.0, self.cfg)
        with pytest.raises(ModelValidationError):
            simulator.simulate_bv(levy_model.brownian_drift(1.0, 1.0), 0.0, 0.05, 3.0,
                                  PenaltySpec.one(), law, self.cfg)

    def test_antithetic_needs_even_blocks(self):
        """Pairs cannot straddle blocks"""
        with pytest.raises(ModelValidationError):
            SimConfig(n_paths=1001, block_size=1001, antithetic=True)

    def test_excursion_floor_must_be_positive(self):
        """A zero floor would let microscopic excursions ruin"""
        with pytest.raises(ModelValidationError):
            SimConfig(excursion_floor=0.0)

    def test_censoring_without_payoff_passes(self):
        """Unreachable marks give SE 0; censored paths discounted by e^{-40} do not fail the run"""
        estimate = simulator.simulate_bv(self.model, 0.0, 20.0, 3.0, PenaltySpec.one(),
                                         SeverityDistribution.point_mass(1e6),
                                         SimConfig(n_paths=2000, block_size=1000, horizon=2.0))

        assert estimate.mean == 0.0
        assert estimate.std_error == 0.0
        assert estimate.n_censored > 0

    def test_standard_error_scales_with_paths(self):
        """Quadrupling the paths halves the SE, within 20%"""
        law = SeverityDistribution.point_mass(1.0)
        errors = [simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                        SimConfig(n_paths=n, block_size=2000)).std_error
                  for n in (2000, 8000, 32000)]

        for fewer, more in zip(errors, errors[1:]):
            assert fewer / more == pytest.approx(2.0, rel=0.2)

    @pytest.mark.slow
    def test_bankruptcy_matches_formula(self):
        """phi at 0 with Exp(1) marks against 40000 exact paths"""
        law = SeverityDistribution.exponential(1.0)
        target = gerber_shiu.phi0(self.model, 0.05, 3.0, PenaltySpec.one(), law).value
        estimate = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(), law,
                                         SimConfig(n_paths=40_000, block_size=8000))

        assert within_band(estimate, target)

    @pytest.mark.slow
    def test_positive_reserve_matches_formula(self):
        """phi at x = 1 with a point-mass mark and an exponential deficit penalty"""
        law = SeverityDistribution.point_mass(1.0)
        f = PenaltySpec.exp_deficit(0.5)
        target = gerber_shiu.phi_x(self.model, 1.0, 0.05, 3.0, f, law).value
        estimate = simulator.simulate_bv(self.model, 1.0, 0.05, 3.0, f, law,
                                         SimConfig(n_paths=40_000, block_size=8000))

        assert within_band(estimate, target)

    @pytest.mark.slow
    def test_zero_mark_matches_classical(self):
        """Y = 0 bankruptcy is classical ruin"""
        target = gerber_shiu.classical_gs(self.model, 0.0, 0.05, 3.0, PenaltySpec.one())
        estimate = simulator.simulate_bv(self.model, 0.0, 0.05, 3.0, PenaltySpec.one(),
                                         SeverityDistribution.point_mass(0.0), self.cfg)

        assert within_band(estimate, target)


class TestUnboundedVariationPaths:
    """Euler paths with Brownian-bridge extrema"""

    def setup_method(self):
        """Brownian motion with unit drift and volatility"""
        self.model = levy_model.brownian_drift(1.0, 1.0)
        self.clock = CreepClock(1.0)
        self.cfg = SimConfig(n_paths=2000, block_size=1000, euler_dt=1e-2)

    def test_exit_probability(self):
        """Bridge extrema make Brownian exit exact: P_1(tau_2+ < tau_0-) = W(1)/W(2)"""
        scale = scale_engine.build_scale(self.model, 0.0)
        target = scale_engine.two_sided_exit(scale, 1.0, 2.0)
        estimate = simulator.estimate_two_sided_exit(self.model, 1.0, 2.0, 0.0,
                                                     SimConfig(n_paths=20_000, block_size=5000, euler_dt=1e-2))

        assert within_band(estimate, target)
        assert estimate.discretization is not None
        assert estimate.discretization.dt == 1e-2

    def test_immediate_creeping_from_zero(self):
        """Started at 0 the exit game is lost at once"""
        estimate = simulator.estimate_two_sided_exit(self.model, 0.0, 2.0, 0.0, self.cfg)

        assert estimate.mean == 0.0

    def test_infinite_mark_and_idle_clock_never_bankrupt(self):
        """No depth ruin and a clock that never rings"""
        estimate = simulator.simulate_ubv(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(),
                                          SeverityDistribution.point_mass(math.inf), CreepClock(1e-12), self.cfg)

        assert estimate.mean == 0.0
        assert estimate.n_bankrupt == 0
        assert estimate.discretization.mean_dt == 0.0

    def test_estimate_is_reproducible(self):
        """Same seed, same estimate"""
        law = SeverityDistribution.point_mass(1.0)
        first = simulator.simulate_ubv(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(), law, self.clock, self.cfg)
        second = simulator.simulate_ubv(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(), law, self.clock, self.cfg)

        assert first.mean == second.mean
        assert 0.0 < first.mean < 1.0

    def test_validation(self):
        """Clock, mark law and variation class are checked up front"""
        with pytest.raises(ModelValidationError):
            simulator.simulate_ubv(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(),
                                   SeverityDistribution.point_mass(1.0), None, self.cfg)
        with pytest.raises(ModelValidationError):
            simulator.simulate_ubv(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(),
                                   SeverityDistribution.exponential(1.0), self.clock, self.cfg)
        with pytest.raises(ModelValidationError):
            simulator.simulate_ubv(levy_model.cramer_lundberg(1.5, 1.0), 1.0, 0.05, 2.0, PenaltySpec.one(),
                                   SeverityDistribution.point_mass(1.0), self.clock, self.cfg)

    def test_dispatch(self):
        """simulate routes by variation class"""
        estimate = simulator.simulate(self.model, 1.0, 0.05, 2.0, PenaltySpec.one(),
                                      SeverityDistribution.point_mass(1.0), self.clock, self.cfg)

        assert estimate.discretization is not None

    def test_coarse_step_sums_two_fine_steps(self):
        """A dt step reads the Brownian increments and claims of two dt/2 steps"""
        model = levy_model.jump_diffusion(1.0, 1.0, 5.0, [(1.0, 1.0)])
        coarse_req = PathRequest(model=model, x=1.0, q=0.0, b=2.0, penalty=PenaltySpec.one(),
                                 severity=SeverityDistribution.point_mass(1.0), clock=self.clock,
                                 dt=0.02, substeps=2)
        fine_req = replace(coarse_req, dt=0.01, substeps=1)

        coarse = step_draws(coarse_req, BlockDraws(np.random.default_rng(4), 500), np.random.default_rng(5))
        draws, extra = BlockDraws(np.random.default_rng(4), 500), np.random.default_rng(5)
        first, second = step_draws(fine_req, draws, extra), step_draws(fine_req, draws, extra)

        np.testing.assert_allclose(coarse.z * math.sqrt(0.02), (first.z + second.z) * math.sqrt(0.01))
        np.testing.assert_array_equal(coarse.counts, first.counts + second.counts)
        np.testing.assert_allclose(coarse.claims, first.claims + second.claims)
        np.testing.assert_array_equal(coarse.u_min, first.u_min)

    def test_step_sizes_run_on_matched_numbers(self):
        """dt and dt/2 exit indicators agree path by path up to bridge noise"""
        req = PathRequest(model=self.model, x=1.0, q=0.0, b=2.0, penalty=PenaltySpec.one(),
                          severity=SeverityDistribution.point_mass(0.0), mode="exit", horizon=200.0)

        def payoffs(dt, substeps):
            draws = BlockDraws(block_generator(11, 0, simulator.EULER_STREAM), 4000)
            extra = block_generator(11, 0, simulator.EXTRA_CLAIMS_STREAM)
            return simulate_block_ubv(replace(req, dt=dt, substeps=substeps), draws, 4000, extra).payoff

        coarse, fine = payoffs(0.02, 2), payoffs(0.01, 1)
        gap = coarse - fine

        assert np.corrcoef(coarse, fine)[0, 1] > 0.5
        assert abs(gap.mean()) <= 4.0 * gap.std(ddof=1) / math.sqrt(len(gap)) + 1e-12

    @pytest.mark.slow
    def test_bankruptcy_at_zero_matches_formula(self):
        """Brownian phi at 0, b = 4, with a unit mark and a unit clock"""
        law = SeverityDistribution.point_mass(1.0)
        target = gerber_shiu.phi0(self.model, 0.05, 4.0, PenaltySpec.one(), law, self.clock).value
        estimate = simulator.simulate_ubv(self.model, 0.0, 0.05, 4.0, PenaltySpec.one(), law, self.clock,
                                          SimConfig(n_paths=20_000, block_size=5000, euler_dt=2e-3))

        assert within_band(estimate, target)
        assert estimate.discretization.dt == 2e-3

    @pytest.mark.slow
    def test_jump_diffusion_positive_reserve_matches_formula(self):
        """phi at x = 1 with claims, where restarted excursions may creep or jump below -Y"""
        model = levy_model.jump_diffusion(1.0, 1.0, 0.5, [(1.0, 1.0)])
        law = SeverityDistribution.point_mass(1.0)
        target = gerber_shiu.phi_x(model, 1.0, 0.05, 4.0, PenaltySpec.one(), law, self.clock).value
        estimate = simulator.simulate_ubv(model, 1.0, 0.05, 4.0, PenaltySpec.one(), law, self.clock,
                                          SimConfig(n_paths=40_000, block_size=8000, euler_dt=2e-3))

        assert within_band(estimate, target)
