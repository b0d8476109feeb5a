"""FIFO bookkeeping of arrival batches, used to measure per-request delay."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional

import numpy as np

from .model import DerivedBounds

# Residuals below this (relative to the pending total) count as fully served.
# Without it, float round-off leaves 1e-13 slivers that never complete.
COMPLETION_TOL = 1e-9


@dataclass
class ArrivalBatch:
    arrival_slot: int
    amount: float
    remaining: float


@dataclass
class DelayStats:
    """Completed batches and their delays, in whole slots.

    A batch arriving on slot ``t`` joins the queue after that slot's service,
    so the smallest possible delay is 1.
    """

    arrival_slots: np.ndarray
    completion_slots: np.ndarray
    amounts: np.ndarray

    @property
    def delays(self) -> np.ndarray:
        return self.completion_slots - self.arrival_slots

    @property
    def completed(self) -> int:
        return int(self.arrival_slots.size)

    @property
    def max_delay(self) -> int:
        return int(self.delays.max()) if self.completed else 0

    def histogram(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(delay_slots, count)`` for every delay observed at least once."""
        if not self.completed:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        counts = np.bincount(self.delays)
        delays = np.nonzero(counts)[0]
        return delays, counts[delays]

    @classmethod
    def empty(cls) -> "DelayStats":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), np.zeros(0))


@dataclass
class FifoTracker:
    batches: Deque[ArrivalBatch] = field(default_factory=deque)
    total_enqueued: float = 0.0
    _pending: float = 0.0
    _arrivals: List[int] = field(default_factory=list)
    _completions: List[int] = field(default_factory=list)
    _amounts: List[float] = field(default_factory=list)

    @property
    def remaining(self) -> float:
        return self._pending if self.batches else 0.0

    @property
    def completed_amount(self) -> float:
        return sum(self._amounts)

    def enqueue(self, slot: int, amount: float) -> Optional[ArrivalBatch]:
        if amount <= 0:
            return None
        batch = ArrivalBatch(slot, amount, amount)
        self.batches.append(batch)
        self.total_enqueued += amount
        self._pending += amount
        return batch

    def apply_service(self, slot: int, amount: float) -> List[ArrivalBatch]:
        """Drain ``amount`` of energy front-first; return the batches that
        completed on ``slot``.

        Must be called before the slot's own arrivals are enqueued.
        """
        done: List[ArrivalBatch] = []
        if amount <= 0 or not self.batches:
            return done
        pending = self.remaining
        if amount >= pending * (1.0 - COMPLETION_TOL):
            # service covers the whole backlog
            while self.batches:
                b = self.batches.popleft()
                b.remaining = 0.0
                self._complete(b, slot, done)
            self._pending = 0.0
            return done
        self._pending -= amount
        while amount > 0 and self.batches:
            head = self.batches[0]
            take = min(head.remaining, amount)
            head.remaining -= take
            amount -= take
            if head.remaining <= COMPLETION_TOL * max(1.0, head.amount):
                head.remaining = 0.0
                self.batches.popleft()
                self._complete(head, slot, done)
        if not self.batches:
            self._pending = 0.0
        return done

    def _complete(self, b: ArrivalBatch, slot: int, done: List[ArrivalBatch]) -> None:
        self._arrivals.append(b.arrival_slot)
        self._completions.append(slot)
        self._amounts.append(b.amount)
        done.append(b)

    def oldest_age(self, slot: int) -> Optional[int]:
        if not self.batches:
            return None
        return slot - self.batches[0].arrival_slot

    def stats(self) -> DelayStats:
        return DelayStats(
            np.asarray(self._arrivals, dtype=np.int64),
            np.asarray(self._completions, dtype=np.int64),
            np.asarray(self._amounts, dtype=float),
        )


def verify_delay_bound(stats: DelayStats, bounds: DerivedBounds) -> bool:
    """True iff every completed batch met the worst-case delay ``D_max``.

    Raises ``ValueError`` when the bounds carry no finite ``D_max``.
    """
    if bounds.D_max is None:
        raise ValueError("no finite delay bound when epsilon == 0")
    return stats.max_delay <= bounds.D_max
