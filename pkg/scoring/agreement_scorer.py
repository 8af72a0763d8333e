# depth_ruin/scoring/agreement_scorer.py
"""
Formula-versus-Monte-Carlo agreement scoring
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List

from data.exceptions import ComparisonFailure, ModelValidationError


@dataclass
class Agreement:
    """One formula value checked against its Monte Carlo estimate"""
    formula: float
    estimate: float
    std_error: float
    z: float
    passed: bool


class AgreementScorer:
    """z-scores of formula values against Monte Carlo estimates"""

    def __init__(self, z_max: float = 4.0):
        self.logger = logging.getLogger(__name__)
        if not z_max > 0:
            raise ModelValidationError(f"z_max must be positive, got {z_max}")
        self.z_max = z_max

    def z_score(self, formula: float, estimate: float, std_error: float) -> float:
        """(formula - estimate) / std_error; a zero SE gives 0 on exact match and inf otherwise."""
        gap = formula - estimate
        if std_error > 0:
            return gap / std_error
        if gap == 0:
            return 0.0
        return math.copysign(math.inf, gap)

    def score(self, formula: float, estimate: float, std_error: float) -> Agreement:
        z = self.z_score(formula, estimate, std_error)
        passed = abs(z) <= self.z_max
        if not passed:
            self.logger.warning(f"Formula {formula:.8g} vs Monte Carlo {estimate:.8g} +/- {std_error:.3g}: z={z:.2f}")
        return Agreement(formula=formula, estimate=estimate, std_error=std_error, z=z, passed=passed)

    def summarize(self, agreements: List[Agreement]) -> Dict[str, Any]:
        finite = [abs(a.z) for a in agreements if not math.isnan(a.z)]
        return {
            'n_compared': len(agreements),
            'n_failed': sum(1 for a in agreements if not a.passed),
            'max_abs_z': max(finite) if finite else 0.0,
            'z_max': self.z_max
        }

    def require_agreement(self, agreements: List[Agreement]) -> None:
        """Raise ComparisonFailure when any |z| exceeds z_max"""
        summary = self.summarize(agreements)
        if summary['n_failed']:
            raise ComparisonFailure(
                f"{summary['n_failed']} of {summary['n_compared']} comparisons exceed |z| > {self.z_max} "
                f"(max |z| = {summary['max_abs_z']:.2f})"
            )
        self.logger.info(f"All {summary['n_compared']} comparisons within |z| <= {self.z_max} "
                         f"(max |z| = {summary['max_abs_z']:.2f})")
