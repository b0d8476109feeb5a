"""Joint pricing and allocation.

Each slot the operator posts a price ``p`` (or refuses new requests), the
requests that arrive depend on that price through a demand function, and the
purchase decision is the same threshold rule as the pure allocator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .allocator import actual_purchase, decide_purchase
from .model import (
    Params,
    SchedulerState,
    SlotObservation,
    SlotOutcome,
    update_queue,
    update_virtual_queue,
    validate_params,
)


class Realization(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM_NOISE = "uniform"


class DemandModel:
    """Expected requests ``F(p, y, gamma)``.

    ``p`` may be an array; implementations must broadcast over it.
    ``y_invariant`` marks demand functions where ``y`` only scales the curve,
    so the optimal price does not depend on it.
    """

    a_max: float
    y_invariant: bool = False

    def __call__(self, p, y: Optional[float], gamma: float):
        raise NotImplementedError


@dataclass
class LinearDemand(DemandModel):
    """``F = y * a_max * max(0, 1 - p / p_max)``; ``y`` defaults to 1."""

    a_max: float
    p_max: float
    y_invariant: bool = True

    def base(self, p, gamma: float):
        return self.a_max * np.maximum(0.0, 1.0 - np.asarray(p) / self.p_max)

    def __call__(self, p, y, gamma):
        return (1.0 if y is None else y) * self.base(p, gamma)

    def best_price(self, Q: float, V: float) -> float:
        """Closed-form maximiser of ``F (V p - Q)`` over ``[0, p_max]``.

        The objective is a concave parabola in ``p`` on the support of F, with
        vertex at ``(p_max + Q / V) / 2``.
        """
        return min(self.p_max, 0.5 * (self.p_max + Q / V))


@dataclass
class ScaledDemand(DemandModel):
    """``F = y * base(p, gamma)`` for a caller-supplied base curve."""

    base: Callable
    a_max: float
    y_invariant: bool = True

    def __call__(self, p, y, gamma):
        return (1.0 if y is None else y) * np.asarray(self.base(p, gamma), dtype=float)


@dataclass(frozen=True)
class PricingDecision:
    b: int
    p: float
    objective: float


def price_grid(p_max: float, grid_step: float) -> np.ndarray:
    """``{0, step, 2 step, ...}`` up to ``p_max``, with ``p_max`` always included."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    n = int(np.floor(p_max / grid_step + 1e-9))
    grid = grid_step * np.arange(n + 1, dtype=float)
    if grid[-1] < p_max:
        grid = np.append(grid, p_max)
    else:
        grid[-1] = p_max
    return grid


class PriceOptimizer:
    """Grid search for the price, with the demand curve cached per ``(y, gamma)``.

    Only the ``Q``-dependent part of the objective is recomputed each slot.
    """

    def __init__(self, demand: DemandModel, V: float, p_max: float,
                 grid_step: Optional[float] = None, cache_size: int = 4096):
        self.demand = demand
        self.V = V
        self.grid = price_grid(p_max, grid_step or p_max / 1e4)
        self._rgrid = self.grid[::-1]
        self._vp = V * self._rgrid
        self._cache: Dict[Tuple, np.ndarray] = {}
        self._cache_size = cache_size

    def _demand_on_grid(self, y, gamma) -> np.ndarray:
        # y only scales the objective for y-invariant models, so drop it from the key
        key = (None if self.demand.y_invariant else y, gamma)
        f = self._cache.get(key)
        if f is None:
            yy = None if self.demand.y_invariant else y
            f = np.broadcast_to(
                np.asarray(self.demand(self._rgrid, yy, gamma), dtype=float),
                self._rgrid.shape,
            )
            if len(self._cache) >= self._cache_size:
                self._cache.clear()
            self._cache[key] = f
        return f

    def __call__(self, Q: float, obs: SlotObservation) -> PricingDecision:
        f = self._demand_on_grid(obs.y, obs.gamma)
        obj = f * (self._vp - Q)
        # reversed grid, so argmax's first hit is the largest maximising price
        i = int(np.argmax(obj))
        value = float(obj[i])
        if self.demand.y_invariant and obs.y is not None:
            value *= obs.y
        return PricingDecision(b=int(value >= 0.0), p=float(self._rgrid[i]),
                               objective=value)


def optimize_price(
    Q: float,
    obs: SlotObservation,
    p: Params,
    demand: DemandModel,
    grid_step: Optional[float] = None,
) -> PricingDecision:
    """Maximise ``F(price, y, gamma) * (V * price - Q)`` over the price grid.

    Ties go to the largest price. ``b`` is 1 iff the maximum is non-negative.
    """
    if p.p_max is None:
        raise ValueError("pricing requires p_max")
    return PriceOptimizer(demand, p.V, p.p_max, grid_step)(Q, obs)


def realize_demand(
    decision: PricingDecision,
    obs: SlotObservation,
    demand: DemandModel,
    rng: np.random.Generator,
    mode: Realization = Realization.UNIFORM_NOISE,
) -> float:
    """Draw the slot's requests given the posted price.

    ``UNIFORM_NOISE`` draws uniformly on ``[max(0, 2F - a_max), min(a_max, 2F)]``,
    which has mean ``F`` and never exceeds ``a_max``.
    """
    if not decision.b:
        return 0.0
    mean = float(demand(decision.p, obs.y, obs.gamma))
    a_max = demand.a_max
    if mean < 0 or mean > a_max * (1 + 1e-12):
        raise ValueError(f"demand mean {mean} outside [0, a_max={a_max}]")
    mean = min(mean, a_max)
    if Realization(mode) is Realization.DETERMINISTIC:
        return mean
    lo = max(0.0, 2.0 * mean - a_max)
    hi = min(a_max, 2.0 * mean)
    return float(rng.uniform(lo, hi))


def profit(b: int, p: float, a: float, gamma: float, x_used: float) -> float:
    return b * p * a - gamma * x_used


@dataclass
class PricingPolicy:
    params: Params
    demand: DemandModel
    rng: np.random.Generator
    mode: Realization = Realization.UNIFORM_NOISE
    grid_step: Optional[float] = None
    state: SchedulerState = field(default_factory=SchedulerState)

    def __post_init__(self) -> None:
        validate_params(self.params)
        if self.params.p_max is None:
            raise ValueError("pricing requires p_max")
        if self.demand.a_max > self.params.a_max:
            raise ValueError("demand model a_max exceeds params.a_max")
        self._optimizer = PriceOptimizer(
            self.demand, self.params.V, self.params.p_max, self.grid_step
        )

    def step(self, obs: SlotObservation) -> SlotOutcome:
        """One slot: price, draw requests, allocate, update queues.

        ``obs.a`` is ignored; arrivals come from the demand model.
        """
        pr = self.params
        Q, Z = self.state.Q, self.state.Z
        decision = self._optimizer(Q, obs)
        a = realize_demand(decision, obs, self.demand, self.rng, self.mode)
        x = decide_purchase(self.state, obs.gamma, pr)
        x_act = actual_purchase(Q, obs.s, x)
        self.state = SchedulerState(
            Q=update_queue(Q, obs.s, x, a),
            Z=update_virtual_queue(Z, obs.s, x, pr.epsilon, Q > 0),
        )
        return SlotOutcome(
            x=x,
            x_actual=x_act,
            cost=obs.gamma * x_act,
            cost_x=obs.gamma * x,
            served=min(Q, obs.s + x),
            a=a,
            b=decision.b,
            p=decision.p,
            profit=profit(decision.b, decision.p, a, obs.gamma, x),
            profit_actual=profit(decision.b, decision.p, a, obs.gamma, x_act),
        )
