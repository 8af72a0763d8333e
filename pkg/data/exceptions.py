# depth_ruin/data/exceptions.py
"""
Exception hierarchy for the depth-ruin toolkit.

Every error carries the process exit code the CLI reports for it.
"""


class DepthRuinError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 1


class ValidationError(DepthRuinError):
    """Invalid model, law, penalty or run configuration"""
    exit_code = 2


class ModelValidationError(ValidationError):
    """A Lévy model, severity law or penalty failed its constructor checks"""


class ConfigError(ValidationError):
    """A configuration block is missing, malformed or inconsistent"""


class ComparisonFailure(DepthRuinError):
    """Formula and Monte Carlo disagree beyond the tolerated z-score"""
    exit_code = 3


class NumericalError(DepthRuinError):
    """A numerical kernel could not deliver its accuracy contract"""
    exit_code = 4


class BracketInvalid(NumericalError):
    """Root bracket does not satisfy f(lo) <= 0 <= f(hi)"""


class NoConvergence(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget"""


class RootIsolationFailure(NumericalError):
    """Roots of the characteristic polynomial could not be isolated"""


class DomainError(NumericalError):
    """A quantity was requested outside the domain where it is defined"""


class DenominatorNonPositive(NumericalError):
    """A Gerber-Shiu denominator evaluated to a non-positive number"""


class InversionUnstable(NumericalError):
    """Numerical Laplace inversion missed its precision target"""


class HorizonTooShort(NumericalError):
    """Censored Monte Carlo paths carry a non-negligible share of the estimate"""


class DiscretizationUnstable(NumericalError):
    """Euler estimates at dt and dt/2 disagree beyond the allowed band"""
