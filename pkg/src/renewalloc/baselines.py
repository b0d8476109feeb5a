"""Greedy "purchase at deadline" comparison policy."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Params, SlotObservation, SlotOutcome
from .tracker import FifoTracker


@dataclass
class GreedyPolicy:
    """Serve FIFO from renewable supply only; buy from the market exactly the
    energy of batches whose age has reached ``deadline``.

    ``over_cap_slots`` counts slots where the forced purchase exceeded
    ``x_max``. It stays zero whenever ``a_max <= x_max``, because at most one
    batch (of at most ``a_max``) expires per slot.
    """

    deadline: int
    tracker: FifoTracker = field(default_factory=FifoTracker)
    slot: int = 0
    supply_used: float = 0.0
    purchased: float = 0.0
    over_cap_slots: int = 0

    def __post_init__(self) -> None:
        if self.deadline < 1:
            raise ValueError("deadline must be >= 1")

    @property
    def pending(self):
        return self.tracker.batches

    def step(self, obs: SlotObservation, p: Params) -> SlotOutcome:
        t = self.slot
        tr = self.tracker
        before = tr.remaining
        tr.apply_service(t, obs.s)
        used = before - tr.remaining
        expiring = 0.0
        for b in tr.batches:
            if t - b.arrival_slot < self.deadline:
                break
            expiring += b.remaining
        if expiring > 0:
            tr.apply_service(t, expiring)
            if expiring > p.x_max:
                self.over_cap_slots += 1
        tr.enqueue(t, obs.a)
        self.supply_used += used
        self.purchased += expiring
        self.slot += 1
        return SlotOutcome(
            x=expiring,
            x_actual=expiring,
            cost=obs.gamma * expiring,
            cost_x=obs.gamma * expiring,
            served=used + expiring,
            a=obs.a,
        )


def greedy_step(policy: GreedyPolicy, obs: SlotObservation, p: Params):
    outcome = policy.step(obs, p)
    return policy, outcome
