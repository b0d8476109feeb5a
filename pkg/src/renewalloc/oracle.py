"""Frame-lookahead oracle and the universal-scheduling bound check.

Within a frame of ``T`` slots the ideal problem is a linear program: minimise
``sum(gamma * x) / T`` subject to ``sum(s + x - a) >= 0``,
``sum(s + x - eps) >= 0`` and ``0 <= x <= x_max``. Both sum constraints only
see the total purchase, so they collapse to ``sum(x) >= M`` and the optimum
fills the cheapest slots first.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import NUMERIC_SLACK, Params, SlotObservation, derived_bounds


class InfeasibleFrame(ValueError):
    """Even buying ``x_max`` on every slot cannot meet the frame's requirement."""


@dataclass(frozen=True)
class FrameOracleResult:
    c_star: float
    x_star: np.ndarray
    binding: str  # "demand", "epsilon", "both" or "neither"


def _required(s_sum: float, a_sum: float, eps: float, T: int) -> tuple[float, str]:
    dem = a_sum - s_sum
    eps_need = eps * T - s_sum
    M = max(dem, eps_need, 0.0)
    if M <= 0:
        return 0.0, "neither"
    if dem == eps_need:
        return M, "both"
    return M, "demand" if dem > eps_need else "epsilon"


def solve_frame(frame: Sequence[SlotObservation], epsilon: float,
                x_max: float) -> FrameOracleResult:
    """Exact optimum of one frame's lookahead problem.

    Slots are filled in ascending price order (ties by slot index), each up to
    ``x_max``, until the required total purchase is met.
    """
    T = len(frame)
    if T == 0:
        raise ValueError("frame must be non-empty")
    gamma = np.array([o.gamma for o in frame], dtype=float)
    M, binding = _required(sum(o.s for o in frame), sum(o.a for o in frame),
                           epsilon, T)
    if M > T * x_max:
        raise InfeasibleFrame(f"need {M} > T*x_max = {T * x_max}")
    x = np.zeros(T)
    left = M
    for i in np.argsort(gamma, kind="stable"):
        if left <= 0:
            break
        x[i] = min(x_max, left)
        left -= x[i]
    return FrameOracleResult(float(gamma @ x) / T, x, binding)


def brute_force_frame(frame: Sequence[SlotObservation], epsilon: float,
                      x_max: float, grid: float = 1.0) -> float:
    """Minimum frame-average cost by exhaustive search over grid allocations.

    Independent check on :func:`solve_frame`; only usable for tiny frames.
    """
    T = len(frame)
    n_levels = int(np.floor(x_max / grid + 1e-9))
    levels = grid * np.arange(n_levels + 1, dtype=float)
    X = np.array(list(itertools.product(levels, repeat=T)), dtype=float).reshape(-1, T)
    s = np.array([o.s for o in frame], dtype=float)
    a = np.array([o.a for o in frame], dtype=float)
    g = np.array([o.gamma for o in frame], dtype=float)
    supplied = s.sum() + X.sum(axis=1)
    ok = (supplied - a.sum() >= 0) & (supplied - epsilon * T >= 0)
    if not ok.any():
        raise InfeasibleFrame("no grid allocation satisfies the frame constraints")
    return float((X[ok] @ g).min()) / T


def solve_frames(s: np.ndarray, a: np.ndarray, gamma: np.ndarray, T: int,
                 epsilon: float, x_max: float):
    """Vectorised :func:`solve_frame` over the first ``R*T`` slots.

    Returns ``(c_star, feasible)`` arrays of length ``R``; ``c_star`` is NaN
    on infeasible frames.
    """
    R = len(s) // T
    n = R * T
    S = np.asarray(s[:n], dtype=float).reshape(R, T)
    A = np.asarray(a[:n], dtype=float).reshape(R, T)
    G = np.asarray(gamma[:n], dtype=float).reshape(R, T)
    s_sum = S.sum(axis=1)
    M = np.maximum.reduce([A.sum(axis=1) - s_sum, epsilon * T - s_sum, np.zeros(R)])
    feasible = M <= T * x_max
    order = np.argsort(G, axis=1, kind="stable")
    g_sorted = np.take_along_axis(G, order, axis=1)
    filled_before = x_max * np.arange(T)
    x_sorted = np.clip(M[:, None] - filled_before[None, :], 0.0, x_max)
    c = (g_sorted * x_sorted).sum(axis=1) / T
    c[~feasible] = np.nan
    return c, feasible


@dataclass(frozen=True)
class UniversalBoundReport:
    T: int
    frames: int
    excluded_frames: int
    lhs: float  # average gamma * x
    lhs_actual: float  # average gamma * x_actual
    mean_c_star: float
    fudge: float  # B T / V
    rhs: float
    passed: bool


def check_universal_bound(run, T: int, p: Params) -> UniversalBoundReport:
    """Compare the run's average ``gamma * x`` with the frame-oracle average
    plus ``B T / V`` over ``R = len // T`` whole frames.

    ``run`` needs array attributes ``s``, ``a``, ``gamma``, ``x`` and
    ``x_actual``. Infeasible frames are excluded from both sides with a
    warning; they cannot occur when ``x_max >= max(a_max, epsilon)``.
    """
    if T < 1:
        raise ValueError("T must be a positive integer")
    n = len(run.s)
    R = n // T
    if R == 0:
        raise ValueError(f"run of {n} slots is shorter than one frame of {T}")
    c, feasible = solve_frames(run.s, run.a, run.gamma, T, p.epsilon, p.x_max)
    excluded = int((~feasible).sum())
    if excluded:
        warnings.warn(f"{excluded} of {R} frames infeasible for T={T}; excluded",
                      RuntimeWarning, stacklevel=2)
    keep = np.repeat(feasible, T)
    g = np.asarray(run.gamma[: R * T], dtype=float)[keep]
    kept = int(feasible.sum())
    if kept == 0:
        raise InfeasibleFrame(f"every frame is infeasible for T={T}")
    lhs = float(g @ np.asarray(run.x[: R * T], dtype=float)[keep]) / (kept * T)
    lhs_act = float(g @ np.asarray(run.x_actual[: R * T], dtype=float)[keep]) / (kept * T)
    mean_c = float(c[feasible].mean())
    fudge = derived_bounds(p).B * T / p.V
    rhs = mean_c + fudge
    slack = NUMERIC_SLACK * max(1.0, abs(lhs), abs(rhs))
    return UniversalBoundReport(T, R, excluded, lhs, lhs_act, mean_c, fudge, rhs,
                                lhs <= rhs + slack)
