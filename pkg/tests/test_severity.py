# depth_ruin/tests/test_severity.py
"""
Tests for depth-mark laws and the creeping clock
"""

import math

import numpy as np
import pytest
from scipy import stats

from data.exceptions import ModelValidationError
from data.models import CreepClock, SeverityDistribution
from processes import severity


class TestSeverityLaws:
    """Construction, moments and support of the depth laws"""

    def test_point_mass_rejects_negative_depth(self):
        """Y must be non-negative"""
        with pytest.raises(ModelValidationError):
            SeverityDistribution.point_mass(-1.0)

    def test_mixture_weights_must_sum_to_one(self):
        """Atoms form a probability vector"""
        with pytest.raises(ModelValidationError):
            SeverityDistribution.mixture([(0.5, 1.0), (0.2, 2.0)])

    def test_mixture_atoms_sorted_by_depth(self):
        """Atoms are stored in increasing depth"""
        law = SeverityDistribution.mixture([(0.3, 2.0), (0.7, 0.5)])

        assert law.atoms == ((0.7, 0.5), (0.3, 2.0))

    def test_means(self):
        """E[Y] for each family"""
        assert severity.mean(SeverityDistribution.point_mass(1.5)) == 1.5
        assert severity.mean(SeverityDistribution.exponential(4.0)) == 0.25
        assert severity.mean(SeverityDistribution.mixture([(0.5, 1.0), (0.5, 3.0)])) == 2.0

    def test_cdf(self):
        """Right-continuous distribution functions"""
        assert severity.cdf(SeverityDistribution.point_mass(1.0), 1.0) == 1.0
        assert severity.cdf(SeverityDistribution.point_mass(1.0), 0.999) == 0.0
        assert severity.cdf(SeverityDistribution.exponential(1.0), 1.0) == pytest.approx(1 - math.exp(-1.0))
        assert severity.cdf(SeverityDistribution.mixture([(0.25, 1.0), (0.75, 2.0)]), 1.5) == 0.25

    def test_scaling(self):
        """factor * Y stays in the same family"""
        assert severity.scaled(SeverityDistribution.point_mass(1.0), 2.0).value == 2.0
        assert severity.scaled(SeverityDistribution.exponential(1.0), 2.0).rate == 0.5
        assert severity.scaled(SeverityDistribution.mixture([(1.0, 1.5)]), 2.0).atoms == ((1.0, 3.0),)

    def test_scaling_needs_positive_factor(self):
        """A zero factor is rejected"""
        with pytest.raises(ModelValidationError):
            severity.scaled(SeverityDistribution.point_mass(1.0), 0.0)

    def test_bounded_away_from_zero(self):
        """Exponential laws and zero atoms fail; positive atoms pass"""
        severity.require_bounded_away_from_zero(SeverityDistribution.point_mass(0.5))
        severity.require_bounded_away_from_zero(SeverityDistribution.mixture([(0.5, 0.5), (0.5, 2.0)]))

        with pytest.raises(ModelValidationError):
            severity.require_bounded_away_from_zero(SeverityDistribution.exponential(1.0))
        with pytest.raises(ModelValidationError):
            severity.require_bounded_away_from_zero(SeverityDistribution.mixture([(0.5, 0.0), (0.5, 2.0)]))

    def test_infinite_point_mass_is_not_a_formula_input(self):
        """Y = inf is a simulation-only sentinel"""
        with pytest.raises(ModelValidationError):
            severity.require_bounded_away_from_zero(SeverityDistribution.point_mass(math.inf))


class TestSampling:
    """Inverse-transform sampling of depths and clocks"""

    def test_mixture_inverse_transform(self):
        """Uniforms below the first cumulative weight pick the first atom"""
        law = SeverityDistribution.mixture([(0.25, 1.0), (0.75, 2.0)])
        draws = severity.sample_Y_from_uniform(law, np.array([0.0, 0.2, 0.25, 0.9]))

        np.testing.assert_array_equal(draws, [1.0, 1.0, 2.0, 2.0])

    def test_exponential_inverse_transform(self):
        """u maps to -log(1 - u) / rate"""
        law = SeverityDistribution.exponential(2.0)

        assert severity.sample_Y_from_uniform(law, 0.5) == pytest.approx(math.log(2.0) / 2.0)

    def test_sampling_is_reproducible(self):
        """Same generator state, same draws"""
        law = SeverityDistribution.exponential(1.0)
        first = severity.sample_Y(law, np.random.default_rng(7), 100)
        second = severity.sample_Y(law, np.random.default_rng(7), 100)

        np.testing.assert_array_equal(first, second)

    def test_sample_mean(self):
        """The empirical mean of many Exp(2) draws is near 1/2"""
        draws = severity.sample_Y(SeverityDistribution.exponential(2.0), np.random.default_rng(11), 200_000)

        assert draws.mean() == pytest.approx(0.5, abs=0.01)

    def test_exponential_draws_pass_ks(self):
        """Kolmogorov-Smirnov against Exp(2)"""
        draws = severity.sample_Y(SeverityDistribution.exponential(2.0), np.random.default_rng(5), 5000)

        assert stats.kstest(draws, "expon", args=(0.0, 0.5)).pvalue > 1e-3

    def test_clock(self):
        """Clock draws are exponential with the configured rate"""
        clock = CreepClock(4.0)

        assert severity.clock_from_uniform(clock, 0.5) == pytest.approx(math.log(2.0) / 4.0)
        assert severity.sample_clock(clock, np.random.default_rng(3), 200_000).mean() == pytest.approx(0.25, abs=0.005)

    def test_clock_rate_must_be_positive(self):
        """A zero-rate clock is rejected"""
        with pytest.raises(ModelValidationError):
            CreepClock(0.0)
