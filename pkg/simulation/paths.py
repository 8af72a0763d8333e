# depth_ruin/simulation/paths.py
"""
Vectorised path kernels for one block of Monte Carlo paths.

Both kernels advance every live path of the block in lockstep and return the
per-path payoff together with the outcome census. Three payoff rules share
the same path construction:

    bankruptcy  e^{-q T_B} f(X_{T_B-}, X_{T_B}) on {T_B < tau_b+}
    classical   e^{-q tau_0-} f(X_{tau_0- -}, X_{tau_0-}) on {tau_0- < tau_b+}
    exit        e^{-q tau_b+} on {tau_b+ < tau_0-}
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from data.models import (CreepClock, LevyModel, Outcome, PenaltySpec,
                         SeverityDistribution)
from penalty import penalties
from processes.severity import clock_from_uniform, sample_Y_from_uniform
from simulation.streams import BlockDraws, claims_from_uniform, poisson_from_uniform

logger = logging.getLogger(__name__)

MODES = ("bankruptcy", "classical", "exit")

CENSORED = Outcome.CENSORED.value
BANKRUPT = Outcome.BANKRUPT.value
UPCROSSED = Outcome.UPCROSSED.value


@dataclass(frozen=True)
class PathRequest:
    """Everything a worker needs to simulate a block (picklable)"""
    model: LevyModel
    x: float
    q: float
    b: float
    penalty: PenaltySpec
    severity: SeverityDistribution
    clock: Optional[CreepClock] = None
    mode: str = "bankruptcy"
    horizon: float = 500.0
    dt: float = 1e-3
    substeps: int = 1
    excursion_floor: float = 1e-4
    antithetic: bool = False


@dataclass
class BlockPaths:
    """Per-path results for one block"""
    payoff: np.ndarray
    outcome: np.ndarray
    event_time: np.ndarray
    first_ruin: np.ndarray
    mark: np.ndarray
    level: np.ndarray


class _State:
    def __init__(self, n: int, x: float):
        self.X = np.full(n, float(x))
        self.t = np.zeros(n)
        self.alive = np.ones(n, dtype=bool)
        self.negative = np.zeros(n, dtype=bool)
        self.mark = np.zeros(n)
        self.payoff = np.zeros(n)
        self.outcome = np.full(n, CENSORED, dtype=np.int8)
        self.event_time = np.full(n, np.inf)
        self.first_ruin = np.full(n, np.inf)

    def finish(self, idx, times, outcome, payoff, horizon):
        """Close paths idx at the given times; events after the horizon are censored."""
        in_time = times <= horizon
        done = idx[in_time]
        self.outcome[done] = outcome
        self.payoff[done] = payoff[in_time] if np.ndim(payoff) else payoff
        self.event_time[done] = times[in_time]
        self.alive[idx] = False

    def paths(self) -> BlockPaths:
        return BlockPaths(payoff=self.payoff, outcome=self.outcome, event_time=self.event_time,
                          first_ruin=self.first_ruin, mark=self.mark, level=self.X)


def _upcross_payoff(req: PathRequest, times):
    if req.mode == "exit":
        return np.exp(-req.q * times)
    return np.zeros_like(times)


def _bankrupt_payoff(req: PathRequest, times, pre, post):
    if req.mode == "exit":
        return np.zeros_like(times)
    return np.exp(-req.q * times) * penalties.evaluate(req.penalty, pre, post)


def simulate_block_bv(req: PathRequest, draws: BlockDraws, n: int) -> BlockPaths:
    """Exact event-driven paths of X_t = x + c t - S_t.

    Between claims the path is linear, so the return to 0 of a negative
    excursion and the passage above b are solved in closed form.
    """
    model = req.model
    c, lam = model.drift, model.jump_rate
    weights = np.array(model.claim_weights)
    rates = np.array(model.claim_rates)
    state = _State(n, req.x)
    mark_law = req.severity if req.mode == "bankruptcy" else SeverityDistribution.point_mass(0.0)

    if req.x >= req.b:
        idx = np.arange(n)
        state.finish(idx, np.zeros(n), UPCROSSED, _upcross_payoff(req, np.zeros(n)), req.horizon)
        return state.paths()

    while state.alive.any():
        idx = np.flatnonzero(state.alive)
        draws.select(idx)
        u_gap, u_comp, u_size, u_mark = draws.uniform(), draws.uniform(), draws.uniform(), draws.uniform()

        x0, t0, neg = state.X[idx], state.t[idx], state.negative[idx]
        gap = -np.log1p(-u_gap) / lam
        to_level = np.where(neg, -x0 / c, (req.b - x0) / c)
        reached = to_level < gap

        # drift carries the path above b before the next claim
        up = reached & ~neg
        if up.any():
            times = t0[up] + to_level[up]
            state.finish(idx[up], times, UPCROSSED, _upcross_payoff(req, times), req.horizon)

        # a negative excursion ends at 0 before the next claim
        back = reached & neg
        if back.any():
            j = idx[back]
            state.t[j] = t0[back] + to_level[back]
            state.X[j] = 0.0
            state.negative[j] = False

        claim = ~reached
        if claim.any():
            j = idx[claim]
            times = t0[claim] + gap[claim]
            pre = x0[claim] + c * gap[claim]
            post = pre - claims_from_uniform(u_comp[claim], u_size[claim], weights, rates)
            was_neg = neg[claim]

            opening = ~was_neg & (post < 0)
            if opening.any():
                state.first_ruin[j[opening]] = np.minimum(state.first_ruin[j[opening]], times[opening])
                state.mark[j[opening]] = sample_Y_from_uniform(mark_law, u_mark[claim][opening])

            in_excursion = was_neg | opening
            bankrupt = in_excursion & (post < -state.mark[j])
            if req.mode == "exit":
                bankrupt = opening
            if bankrupt.any():
                state.finish(j[bankrupt], times[bankrupt], BANKRUPT,
                             _bankrupt_payoff(req, times[bankrupt], pre[bankrupt], post[bankrupt]),
                             req.horizon)

            going = ~bankrupt
            k = j[going]
            state.X[k] = post[going]
            state.t[k] = times[going]
            state.negative[k] = in_excursion[going]

        late = state.alive & (state.t > req.horizon)
        state.alive[late] = False

    return state.paths()


@dataclass
class StepDraws:
    """Random inputs of one Euler step for the live paths"""
    z: np.ndarray
    counts: np.ndarray
    claims: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    u_mark: np.ndarray
    u_jump_mark: np.ndarray
    u_clock: np.ndarray


def step_draws(req: PathRequest, draws: BlockDraws, extra: np.random.Generator) -> StepDraws:
    """Assemble one step of length dt from `substeps` sub-step bundles.

    Each sub-step consumes one normal and eight uniforms per path in a fixed
    order, so a run at dt with two sub-steps sees the same Brownian increments
    and the same claims as a run at dt/2 on the same stream. Bridge and mark
    uniforms come from the first sub-step. Claims beyond the first in a
    sub-step are drawn from `extra`.
    """
    model = req.model
    lam = model.jump_rate
    weights = np.array(model.claim_weights) if lam > 0 else None
    rates = np.array(model.claim_rates) if lam > 0 else None
    n = len(draws.idx)
    z, counts, claims = np.zeros(n), np.zeros(n, dtype=np.int64), np.zeros(n)
    first = None

    for _ in range(req.substeps):
        z_k = draws.normal()
        u_min, u_max, u_pois, u_comp, u_size, u_mark, u_jump_mark, u_clock = (draws.uniform() for _ in range(8))
        if first is None:
            first = (u_min, u_max, u_mark, u_jump_mark, u_clock)
        z += z_k
        if lam > 0:
            n_k = poisson_from_uniform(u_pois, lam * req.dt / req.substeps)
            size_k = np.where(n_k > 0, claims_from_uniform(u_comp, u_size, weights, rates), 0.0)
            for m in range(1, int(n_k.max(initial=0))):
                more = n_k > m
                size_k[more] += claims_from_uniform(extra.random(int(more.sum())), extra.random(int(more.sum())),
                                                    weights, rates)
            counts += n_k
            claims += size_k

    return StepDraws(z / np.sqrt(req.substeps), counts, claims, *first)


def simulate_block_ubv(req: PathRequest, draws: BlockDraws, n: int, extra: np.random.Generator) -> BlockPaths:
    """Euler paths with Brownian-bridge extrema and compound Poisson claims.

    Each step samples the bridge minimum (for passages below 0 and below -Y)
    and the bridge maximum (for passage above b) of the Gaussian part; claims
    arriving in the step are applied at its end. Positive excursions carry
    their start time, running maximum and creeping clock.
    """
    model = req.model
    mu, sigma, lam = model.drift, model.sigma, model.jump_rate
    dt = req.dt
    var = sigma ** 2 * dt
    bankruptcy = req.mode == "bankruptcy"
    state = _State(n, req.x)
    start = np.zeros(n)
    height = np.full(n, float(req.x))
    clock = np.full(n, np.inf)

    if req.x >= req.b:
        idx = np.arange(n)
        state.finish(idx, np.zeros(n), UPCROSSED, _upcross_payoff(req, np.zeros(n)), req.horizon)
        return state.paths()
    if bankruptcy:
        clock[:] = clock_from_uniform(req.clock, draws.uniform())

    while state.alive.any():
        idx = np.flatnonzero(state.alive)
        draws.select(idx)
        step = step_draws(req, draws, extra)

        a, t0 = state.X[idx], state.t[idx]
        pos = ~state.negative[idx]
        end = a + mu * dt + sigma * np.sqrt(dt) * step.z
        spread = (end - a) ** 2
        low = 0.5 * (a + end - np.sqrt(spread - 2.0 * var * np.log1p(-step.u_min)))
        high = 0.5 * (a + end + np.sqrt(spread - 2.0 * var * np.log1p(-step.u_max)))
        t1 = t0 + dt
        live = np.ones(len(idx), dtype=bool)

        # passage above b from a positive excursion
        up = pos & (high > req.b) & ~((low < 0) & (end < req.b))
        if up.any():
            state.finish(idx[up], t1[up], UPCROSSED, _upcross_payoff(req, t1[up]), req.horizon)
            live &= ~up

        # creeping down to 0 from a positive excursion
        creep = live & pos & (low < 0)
        if creep.any():
            frac = np.clip(a[creep] / (a[creep] - low[creep]), 0.0, 1.0)
            t_hit = t0[creep] + frac * dt
            j = idx[creep]
            state.first_ruin[j] = np.minimum(state.first_ruin[j], t_hit)
            if bankruptcy:
                ruined = (height[j] > req.excursion_floor) & (t_hit - start[j] > clock[j])
            else:
                ruined = np.ones(len(j), dtype=bool)
            if ruined.any():
                zero = np.zeros(int(ruined.sum()))
                state.finish(j[ruined], t_hit[ruined], BANKRUPT,
                             _bankrupt_payoff(req, t_hit[ruined], zero, zero), req.horizon)
            survived = np.flatnonzero(creep)[~ruined]
            live[np.flatnonzero(creep)[ruined]] = False
            if survived.size:
                k = idx[survived]
                state.negative[k] = True
                state.mark[k] = sample_Y_from_uniform(req.severity, step.u_mark[survived])
                pos[survived] = False

        # diffusive passage below the mark inside a negative excursion
        deep = live & ~pos & (low < -state.mark[idx])
        if deep.any():
            j = idx[deep]
            y = state.mark[j]
            frac = np.clip((a[deep] + y) / (a[deep] - low[deep]), 0.0, 1.0)
            t_hit = t0[deep] + frac * dt
            state.finish(j, t_hit, BANKRUPT, _bankrupt_payoff(req, t_hit, -y, -y), req.horizon)
            live &= ~deep

        # a negative excursion that ends back above 0 starts a positive one
        back = live & ~pos & (end >= 0)
        if back.any():
            k = idx[back]
            state.negative[k] = False
            start[k] = t1[back]
            height[k] = end[back]
            if bankruptcy:
                clock[k] = clock_from_uniform(req.clock, step.u_clock[back])
            pos[back] = True

        still_pos = live & pos & ~back
        height[idx[still_pos]] = np.maximum(height[idx[still_pos]], high[still_pos])

        # claims arriving during the step
        if lam > 0:
            hit = live & (step.counts > 0)
            if hit.any():
                pre = end[hit]
                post = pre - step.claims[hit]
                j = idx[hit]
                was_pos = pos[hit]
                opening = was_pos & (post < 0)
                if opening.any():
                    state.first_ruin[j[opening]] = np.minimum(state.first_ruin[j[opening]], t1[hit][opening])
                    if bankruptcy:
                        state.mark[j[opening]] = sample_Y_from_uniform(req.severity, step.u_jump_mark[hit][opening])
                if bankruptcy:
                    ruined = (~was_pos | opening) & (post < -state.mark[j])
                else:
                    ruined = opening
                if ruined.any():
                    state.finish(j[ruined], t1[hit][ruined], BANKRUPT,
                                 _bankrupt_payoff(req, t1[hit][ruined], pre[ruined], post[ruined]),
                                 req.horizon)
                    live[np.flatnonzero(hit)[ruined]] = False
                end[hit] = post
                state.negative[j[opening & ~ruined]] = True

        k = idx[live]
        state.X[k] = end[live]
        state.t[k] = t1[live]
        late = state.alive & (state.t > req.horizon)
        state.alive[late] = False

    return state.paths()
