# depth_ruin/penalty/penalties.py
"""
Closed-form penalty families f(pre, post) and their jump integrals
"""

import math

import numpy as np

from data.models import LevyModel, PenaltyKind, PenaltySpec
from processes.levy_model import exp_moment_below


def evaluate(penalty: PenaltySpec, pre, post):
    """f(pre, post), vectorised; pre is the surplus just before bankruptcy."""
    pre = np.asarray(pre, dtype=float)
    post = np.asarray(post, dtype=float)
    if penalty.kind is PenaltyKind.ONE:
        out = np.ones(np.broadcast(pre, post).shape)
    elif penalty.kind is PenaltyKind.EXP_DEFICIT:
        out = np.exp(penalty.theta2 * post) * np.ones_like(pre)
    elif penalty.kind is PenaltyKind.EXP_BOTH:
        out = np.exp(penalty.theta1 * pre + penalty.theta2 * post)
    else:
        out = (post < -penalty.d).astype(float) * np.ones_like(pre)
    return out if out.ndim else float(out)


def sup_bound(penalty: PenaltySpec, b: float) -> float:
    """Upper bound of f over pre in (-inf, b], post <= 0."""
    if penalty.kind is PenaltyKind.EXP_BOTH:
        return math.exp(penalty.theta1 * b)
    return 1.0


def jump_integral(model: LevyModel, penalty: PenaltySpec, pre: float, upper: float) -> float:
    """∫_{(-inf, upper)} f(pre, pre + u) Pi(du) for upper <= 0."""
    if model.jump_rate == 0:
        return 0.0
    if penalty.kind is PenaltyKind.ONE:
        return exp_moment_below(model, 0.0, upper)
    if penalty.kind is PenaltyKind.EXP_DEFICIT:
        return math.exp(penalty.theta2 * pre) * exp_moment_below(model, penalty.theta2, upper)
    if penalty.kind is PenaltyKind.EXP_BOTH:
        return (math.exp((penalty.theta1 + penalty.theta2) * pre)
                * exp_moment_below(model, penalty.theta2, upper))
    # pre + u < -d  <=>  u < -d - pre
    return exp_moment_below(model, 0.0, min(upper, -penalty.d - pre))
