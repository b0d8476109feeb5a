"""Domain types, queue dynamics and the derived constants of the drift analysis.

Everything here is a plain value or a pure function. Energy quantities are
floats in energy-units per slot; prices are cost per energy-unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

# Absolute slack for the sample-path inequality checks. It is scaled up by the
# magnitude of the compared quantities so float rounding on ~1e8 sized
# Lyapunov values is not mistaken for a violation.
NUMERIC_SLACK = 1e-9


class InvalidParams(ValueError):
    """Raised when a configuration falls outside the guarantees' hypotheses."""


@dataclass(frozen=True)
class SlotObservation:
    """Exogenous inputs of one slot."""

    s: float
    a: float
    gamma: float
    y: Optional[float] = None

    def check(self, params: "Params") -> None:
        if not (0.0 <= self.s <= params.s_max):
            raise ValueError(f"s={self.s} outside [0, s_max={params.s_max}]")
        if not (0.0 <= self.a <= params.a_max):
            raise ValueError(f"a={self.a} outside [0, a_max={params.a_max}]")
        if not (0.0 <= self.gamma <= params.gamma_max):
            raise ValueError(
                f"gamma={self.gamma} outside [0, gamma_max={params.gamma_max}]"
            )
        if self.y is not None and not (math.isfinite(self.y) and self.y >= 0):
            raise ValueError(f"y={self.y} must be finite and non-negative")


@dataclass(frozen=True)
class Params:
    """Algorithm configuration.

    ``V`` trades cost against backlog, ``epsilon`` is the virtual-queue fill
    rate, the ``*_max`` fields are the worst-case bounds on purchases,
    arrivals, supply and market price. ``p_max`` is only used when pricing.
    """

    V: float
    epsilon: float
    x_max: float
    a_max: float
    s_max: float
    gamma_max: float
    p_max: Optional[float] = None


def validate_params(p: Params) -> Params:
    """Return ``p`` unchanged, or raise :class:`InvalidParams` naming the
    violated inequality."""
    fields = {
        "V": p.V,
        "epsilon": p.epsilon,
        "x_max": p.x_max,
        "a_max": p.a_max,
        "s_max": p.s_max,
        "gamma_max": p.gamma_max,
    }
    if p.p_max is not None:
        fields["p_max"] = p.p_max
    for name, value in fields.items():
        if not math.isfinite(value):
            raise InvalidParams(f"{name} must be finite, got {value}")
    if not p.V > 0:
        raise InvalidParams(f"V must be positive, got V={p.V}")
    for name, value in fields.items():
        if value < 0:
            raise InvalidParams(f"{name} must be non-negative, got {value}")
    if p.x_max < p.a_max:
        raise InvalidParams(f"x_max < a_max ({p.x_max} < {p.a_max})")
    if p.x_max < p.epsilon:
        raise InvalidParams(f"x_max < epsilon ({p.x_max} < {p.epsilon})")
    return p


@dataclass
class SchedulerState:
    """Real backlog ``Q`` and virtual backlog ``Z``."""

    Q: float = 0.0
    Z: float = 0.0


@dataclass(frozen=True)
class DerivedBounds:
    """Constants derived from :class:`Params`.

    ``D_max`` is ``None`` when ``epsilon == 0``: the delay guarantee does not
    exist in that case (see :attr:`delay_bounded`).
    """

    B: float
    Q_max: float
    Z_max: float
    D_max: Optional[int]
    C_Q: float
    C_Z: float

    @property
    def delay_bounded(self) -> bool:
        return self.D_max is not None


@dataclass
class SlotOutcome:
    """Decisions and accounting for one slot.

    ``cost`` is what the operator pays (``gamma * x_actual``); ``cost_x`` is
    ``gamma * x``, the quantity the performance bounds are stated on.
    The pricing fields stay at their defaults for the pure allocation policy.
    """

    x: float
    x_actual: float
    cost: float
    cost_x: float
    served: float
    a: float
    b: int = 1
    p: float = 0.0
    profit: float = 0.0
    profit_actual: float = 0.0


def update_queue(Q: float, s: float, x: float, a: float) -> float:
    """One slot of the request backlog: ``max(Q - s - x, 0) + a``."""
    return max(Q - s - x, 0.0) + a


def update_virtual_queue(
    Z: float, s: float, x: float, epsilon: float, q_positive: bool
) -> float:
    """One slot of the virtual queue.

    ``q_positive`` is whether the real backlog was non-empty at the start of
    the slot, before service and arrivals.
    """
    return max(Z - s - x + (epsilon if q_positive else 0.0), 0.0)


def lyapunov_value(state: SchedulerState) -> float:
    return 0.5 * (state.Q * state.Q + state.Z * state.Z)


def derived_bounds(p: Params) -> DerivedBounds:
    service_max = float(p.s_max + p.x_max)
    B = (service_max**2 + p.a_max**2) / 2 + max(p.epsilon**2, service_max**2) / 2
    Q_max = float(p.V * p.gamma_max + p.a_max)
    Z_max = float(p.V * p.gamma_max + p.epsilon)
    if p.epsilon > 0:
        # exact rational ceil: floats are dyadic rationals, Fraction keeps them exact
        num = 2 * Fraction(p.V) * Fraction(p.gamma_max) + Fraction(p.a_max)
        num += Fraction(p.epsilon)
        D_max: Optional[int] = math.ceil(num / Fraction(p.epsilon))
    else:
        D_max = None
    return DerivedBounds(
        B=B,
        Q_max=Q_max,
        Z_max=Z_max,
        D_max=D_max,
        C_Q=max(service_max, float(p.a_max)),
        C_Z=max(service_max, float(p.epsilon)),
    )


def drift_rhs(Q: float, Z: float, obs: SlotObservation, x: float, p: Params,
              B: Optional[float] = None) -> float:
    """Right-hand side ``B + Q(a - s - x) + Z(eps - s - x)`` of the one-slot
    sample-path drift bound."""
    if B is None:
        B = derived_bounds(p).B
    return B + Q * (obs.a - obs.s - x) + Z * (p.epsilon - obs.s - x)


def check_drift_inequality(
    before: SchedulerState,
    after: SchedulerState,
    obs: SlotObservation,
    x: float,
    p: Params,
) -> bool:
    """True iff ``L(after) - L(before)`` respects the one-slot drift bound.

    Every legal step of any policy with ``0 <= x <= x_max`` satisfies it, so
    a False return means the transition was not produced by the queue
    updates (or the inputs broke their bounds).
    """
    lb, la = lyapunov_value(before), lyapunov_value(after)
    rhs = drift_rhs(before.Q, before.Z, obs, x, p)
    slack = NUMERIC_SLACK * max(1.0, lb, la, abs(rhs))
    return la - lb <= rhs + slack
