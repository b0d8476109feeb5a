"""Threshold purchase policy driving the real and virtual queues."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Params,
    SchedulerState,
    SlotObservation,
    SlotOutcome,
    update_queue,
    update_virtual_queue,
    validate_params,
)


def decide_purchase(state: SchedulerState, gamma: float, p: Params) -> float:
    """Bang-bang purchase: nothing while ``Q + Z <= V * gamma``, else ``x_max``."""
    if state.Q + state.Z <= p.V * gamma:
        return 0.0
    return p.x_max


def actual_purchase(Q: float, s: float, x: float) -> float:
    """Energy actually bought: the backlog left after renewable supply,
    clamped to ``[0, x]``."""
    return min(max(Q - s, 0.0), x)


@dataclass
class AllocatorPolicy:
    params: Params
    state: SchedulerState = field(default_factory=SchedulerState)

    def __post_init__(self) -> None:
        validate_params(self.params)

    def step(self, obs: SlotObservation) -> SlotOutcome:
        """Advance one slot in place and return what happened on it."""
        p = self.params
        Q, Z = self.state.Q, self.state.Z
        x = decide_purchase(self.state, obs.gamma, p)
        x_act = actual_purchase(Q, obs.s, x)
        served = min(Q, obs.s + x)
        self.state = SchedulerState(
            Q=update_queue(Q, obs.s, x, obs.a),
            Z=update_virtual_queue(Z, obs.s, x, p.epsilon, Q > 0),
        )
        return SlotOutcome(
            x=x,
            x_actual=x_act,
            cost=obs.gamma * x_act,
            cost_x=obs.gamma * x,
            served=served,
            a=obs.a,
        )
