"""Run policies over traces, check every sample-path guarantee, sweep
parameters and export plot-ready CSVs."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .allocator import AllocatorPolicy
from .baselines import GreedyPolicy
from .model import (
    NUMERIC_SLACK,
    Params,
    derived_bounds,
    validate_params,
)
from .oracle import check_universal_bound
from .pricing import DemandModel, LinearDemand, PricingPolicy, Realization
from .tracker import DelayStats, FifoTracker
from .traces import Trace


class Policy(str, enum.Enum):
    LYAPUNOV = "lyapunov"
    GREEDY = "greedy"
    PRICING = "pricing"


@dataclass
class RunRecord:
    """Full per-slot trajectory of one policy over one trace.

    ``Q[t]`` and ``Z[t]`` are the backlogs at the start of slot ``t``;
    ``Q_final``/``Z_final`` hold the state after the last slot. ``a`` is the
    realised demand (equal to the trace's in non-pricing modes). Costs come
    in two flavours: ``cost`` = gamma * x_actual (what is paid) and
    ``cost_x`` = gamma * x (what the bounds are stated on).
    """

    policy: Policy
    params: Params
    meta: dict
    s: np.ndarray
    a: np.ndarray
    gamma: np.ndarray
    Q: np.ndarray
    Z: np.ndarray
    Q_final: float
    Z_final: float
    x: np.ndarray
    x_actual: np.ndarray
    served: np.ndarray
    delay: DelayStats
    pending_final: float
    b: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    profit: Optional[np.ndarray] = None
    profit_actual: Optional[np.ndarray] = None
    realization: Optional[str] = None
    deadline: Optional[int] = None
    over_cap_slots: int = 0
    drift_violations: Optional[int] = None

    def __len__(self) -> int:
        return len(self.s)

    @property
    def cost(self) -> np.ndarray:
        return self.gamma * self.x_actual

    @property
    def cost_x(self) -> np.ndarray:
        return self.gamma * self.x

    @property
    def Q_path(self) -> np.ndarray:
        return np.append(self.Q, self.Q_final)

    @property
    def Z_path(self) -> np.ndarray:
        return np.append(self.Z, self.Z_final)

    def summary(self) -> dict:
        n = len(self)
        out = {
            "policy": self.policy.value,
            "slots": n,
            "cum_cost": float(self.cost.sum()),
            "cum_cost_x": float(self.cost_x.sum()),
            "avg_cost": float(self.cost.sum()) / n if n else 0.0,
            "avg_cost_x": float(self.cost_x.sum()) / n if n else 0.0,
            "max_Q": float(self.Q_path.max()),
            "max_Z": float(self.Z_path.max()),
            "max_delay": self.delay.max_delay,
            "completed": self.delay.completed,
        }
        if self.profit is not None:
            out["avg_profit"] = float(self.profit.mean())
            out["avg_profit_actual"] = float(self.profit_actual.mean())
        return out


def drift_violations(run: RunRecord, p: Params) -> np.ndarray:
    """Per-slot mask of steps breaking ``L(t+1) - L(t) <= B + Q(a-s-x) + Z(eps-s-x)``."""
    B = derived_bounds(p).B
    Qp, Zp = run.Q_path, run.Z_path
    L = 0.5 * (Qp * Qp + Zp * Zp)
    q, z = Qp[:-1], Zp[:-1]
    rhs = B + q * (run.a - run.s - run.x) + z * (p.epsilon - run.s - run.x)
    lhs = L[1:] - L[:-1]
    slack = NUMERIC_SLACK * np.maximum.reduce(
        [np.ones_like(lhs), L[1:], L[:-1], np.abs(rhs)])
    return lhs > rhs + slack


def _run_lyapunov_fast(trace: Trace, p: Params):
    from ._kernel import lyapunov_kernel

    Q, Z, x, x_act, served, arr, amt, comp, pend = lyapunov_kernel(
        trace.s, trace.a, trace.gamma, float(p.V), float(p.epsilon), float(p.x_max))
    done = comp >= 0
    delay = DelayStats(arr[done], comp[done], amt[done])
    return Q, Z, x, x_act, served, delay, float(pend)


def _run_python(trace: Trace, policy, n: int):
    tracker = FifoTracker()
    Q = np.empty(n + 1)
    Z = np.empty(n + 1)
    cols = {k: np.empty(n) for k in
            ("x", "x_actual", "served", "a", "b", "p", "profit", "profit_actual")}
    for t, obs in enumerate(trace):
        Q[t], Z[t] = policy.state.Q, policy.state.Z
        out = policy.step(obs)
        tracker.apply_service(t, out.served)
        tracker.enqueue(t, out.a)
        for k, col in cols.items():
            col[t] = getattr(out, k)
    Q[n], Z[n] = policy.state.Q, policy.state.Z
    return Q, Z, cols, tracker


def run_policy(
    trace: Trace,
    policy: Union[Policy, str],
    p: Params,
    *,
    demand: Optional[DemandModel] = None,
    realization: Union[Realization, str] = Realization.UNIFORM_NOISE,
    seed: int = 0,
    deadline: Optional[int] = None,
    grid_step: Optional[float] = None,
    check_drift: bool = True,
    engine: str = "fast",
) -> RunRecord:
    """Simulate ``policy`` over ``trace`` with a FIFO delay tracker attached.

    ``engine="fast"`` uses the compiled loop for the threshold policy;
    ``"python"`` steps :class:`AllocatorPolicy` slot by slot (same numbers,
    much slower). Greedy defaults its deadline to ``D_max``. Deterministic
    given ``(trace, p, seed)``.
    """
    policy = Policy(policy)
    validate_params(p)
    n = len(trace)
    if n == 0:
        raise ValueError("empty trace")
    trace.check_bounds(p.s_max, p.a_max if policy is not Policy.PRICING else np.inf,
                       p.gamma_max)
    meta = dict(trace.meta)
    extra: dict = {}

    if policy is Policy.LYAPUNOV:
        if engine == "fast":
            Q, Z, x, x_act, served, delay, pend = _run_lyapunov_fast(trace, p)
        elif engine == "python":
            alloc = AllocatorPolicy(p)
            Q, Z, cols, tracker = _run_python(trace, alloc, n)
            x, x_act, served = cols["x"], cols["x_actual"], cols["served"]
            delay, pend = tracker.stats(), tracker.remaining
        else:
            raise ValueError(f"unknown engine {engine!r}")
        a = trace.a.copy()
    elif policy is Policy.PRICING:
        if p.p_max is None:
            raise ValueError("pricing requires p_max")
        demand = demand or LinearDemand(p.a_max, p.p_max)
        realization = Realization(realization)
        pol = PricingPolicy(p, demand, np.random.default_rng(seed), realization,
                            grid_step)
        Q, Z, cols, tracker = _run_python(trace, pol, n)
        x, x_act, served, a = cols["x"], cols["x_actual"], cols["served"], cols["a"]
        delay, pend = tracker.stats(), tracker.remaining
        extra = dict(b=cols["b"].astype(np.int8), p=cols["p"],
                     profit=cols["profit"], profit_actual=cols["profit_actual"],
                     realization=realization.value)
        meta["seed_pricing"] = seed
    else:
        if deadline is None:
            deadline = derived_bounds(p).D_max
            if deadline is None:
                raise ValueError("greedy needs an explicit deadline when epsilon == 0")
        g = GreedyPolicy(deadline)
        Qs = np.empty(n + 1)
        x = np.empty(n)
        served = np.empty(n)
        for t, obs in enumerate(trace):
            Qs[t] = g.tracker.remaining
            out = g.step(obs, p)
            x[t], served[t] = out.x, out.served
        Qs[n] = g.tracker.remaining
        Q, Z = Qs, np.zeros(n + 1)
        x_act = x.copy()
        a = trace.a.copy()
        delay, pend = g.tracker.stats(), g.tracker.remaining
        extra = dict(deadline=deadline, over_cap_slots=g.over_cap_slots)

    run = RunRecord(
        policy=policy, params=p, meta=meta, s=trace.s.copy(), a=a,
        gamma=trace.gamma.copy(), Q=Q[:n], Z=Z[:n], Q_final=float(Q[n]),
        Z_final=float(Z[n]), x=x, x_actual=x_act, served=served, delay=delay,
        pending_final=pend, **extra)
    if check_drift and policy is not Policy.GREEDY:
        run.drift_violations = int(drift_violations(run, p).sum())
    return run


# ---------------------------------------------------------------- verification


@dataclass
class Check:
    name: str
    status: str  # "pass", "fail" or "skip"
    measured: Optional[float] = None
    bound: Optional[float] = None
    detail: str = ""

    def line(self) -> str:
        parts = [f"[{self.status.upper():4}] {self.name}"]
        if self.measured is not None:
            parts.append(f"measured={self.measured:.6g}")
        if self.bound is not None:
            parts.append(f"bound={self.bound:.6g}")
        if self.detail:
            parts.append(self.detail)
        return "  ".join(parts)


@dataclass
class VerificationReport:
    policy: Policy
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> List[str]:
        return [c.line() for c in self.checks]


def _bool_check(name, ok, measured=None, bound=None, detail="") -> Check:
    return Check(name, "pass" if ok else "fail", measured, bound, detail)


def verify(run: RunRecord, p: Params,
           T_values: Sequence[int] = (1, 10, 100)) -> VerificationReport:
    """Evaluate every applicable guarantee on a finished run.

    Failures are report entries, never exceptions.
    """
    rep = VerificationReport(run.policy)
    bounds = derived_bounds(p)
    n = len(run)

    if run.policy is Policy.GREEDY:
        rep.checks.append(Check("q_bound", "skip", detail="not applicable to greedy"))
        rep.checks.append(Check("z_bound", "skip", detail="not applicable to greedy"))
        arrivals = float(run.a.sum())
        accounted = float(run.served.sum()) + run.pending_final
        rep.checks.append(_bool_check(
            "conservation", math.isclose(arrivals, accounted, rel_tol=1e-9, abs_tol=1e-6),
            accounted, arrivals, "served + pending vs arrivals"))
        rep.checks.append(_bool_check(
            "deadline", run.delay.max_delay <= run.deadline,
            run.delay.max_delay, run.deadline))
        rep.checks.append(_bool_check(
            "purchase_cap", run.over_cap_slots == 0, run.over_cap_slots, 0,
            "slots with forced purchase above x_max"))
        return rep

    Qp, Zp = run.Q_path, run.Z_path
    rep.checks.append(_bool_check("q_bound", bool(Qp.max() <= bounds.Q_max),
                                  float(Qp.max()), bounds.Q_max))
    rep.checks.append(_bool_check("z_bound", bool(Zp.max() <= bounds.Z_max),
                                  float(Zp.max()), bounds.Z_max))
    nonneg = bool(Qp.min() >= 0 and Zp.min() >= 0)
    rep.checks.append(_bool_check("non_negative", nonneg, float(min(Qp.min(), Zp.min())), 0.0))
    if bounds.D_max is None:
        rep.checks.append(Check("delay_bound", "skip", float(run.delay.max_delay), None,
                                "D_max unbounded (epsilon = 0)"))
    else:
        rep.checks.append(_bool_check("delay_bound", run.delay.max_delay <= bounds.D_max,
                                      run.delay.max_delay, bounds.D_max))
    bang = np.all((run.x == 0.0) | (run.x == p.x_max))
    rep.checks.append(_bool_check("bang_bang", bool(bang)))
    dom = np.all((run.x_actual >= 0) & (run.x_actual <= run.x))
    rep.checks.append(_bool_check("purchase_dominance", bool(dom)))
    want = np.minimum(run.Q, run.s + run.x)
    want_act = np.minimum(run.Q, run.s + run.x_actual)
    tol = 1e-9 * np.maximum(1.0, run.Q)
    ident = np.all(np.abs(run.served - want) <= tol) and np.all(np.abs(run.served - want_act) <= tol)
    rep.checks.append(_bool_check("served_identity", bool(ident)))
    viol = int(drift_violations(run, p).sum())
    rep.checks.append(_bool_check("drift_inequality", viol == 0, viol, 0,
                                  "violating slots"))
    rep.checks.append(_bool_check(
        "tracker_consistency",
        math.isclose(run.pending_final, run.Q_final, rel_tol=1e-6, abs_tol=1e-6),
        run.pending_final, run.Q_final, "tracked pending vs final Q"))

    if run.policy is Policy.LYAPUNOV:
        for T in T_values:
            if n // T == 0:
                rep.checks.append(Check(f"universal_bound_T{T}", "skip",
                                        detail="run shorter than one frame"))
                continue
            ub = check_universal_bound(run, T, p)
            rep.checks.append(_bool_check(
                f"universal_bound_T{T}", ub.passed, ub.lhs, ub.rhs,
                f"frames={ub.frames} excluded={ub.excluded_frames}"))
    if run.profit is not None:
        dominance = bool(np.all(run.profit_actual >= run.profit - 1e-9 * np.maximum(1, np.abs(run.profit))))
        rep.checks.append(_bool_check("profit_dominance", dominance))
    return rep


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    value: float
    cum_cost: float
    cum_cost_x: float
    max_delay: int
    max_Q: float
    max_Z: float
    D_max: Optional[int]


def sweep(trace: Trace, p: Params, axis: str, values: Sequence[float],
          **run_kwargs) -> List[SweepRow]:
    """One summary row per parameter value, in the order given."""
    axis = axis.upper()
    if axis not in ("V", "EPSILON"):
        raise ValueError("axis must be 'V' or 'EPSILON'")
    rows = []
    for v in values:
        q = replace(p, V=v) if axis == "V" else replace(p, epsilon=v)
        run = run_policy(trace, Policy.LYAPUNOV, q, **run_kwargs)
        s = run.summary()
        rows.append(SweepRow(float(v), s["cum_cost"], s["cum_cost_x"], s["max_delay"],
                             s["max_Q"], s["max_Z"], derived_bounds(q).D_max))
    return rows


def compare(trace: Trace, p: Params, deadline: Optional[int] = None, **run_kwargs):
    """Threshold policy vs greedy-at-deadline on the same trace.

    Greedy's deadline defaults to the threshold policy's ``D_max``.
    """
    lyap = run_policy(trace, Policy.LYAPUNOV, p, **run_kwargs)
    greedy = run_policy(trace, Policy.GREEDY, p, deadline=deadline)
    return lyap, greedy


# ---------------------------------------------------------------- CSV export


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "unbounded"
    return repr(float(v))


def write_rows(path: Union[str, Path], header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_trajectory(run: RunRecord, path: Union[str, Path]) -> None:
    header = ["slot", "Q", "Z", "x", "x_actual", "cost_x", "cost_x_actual", "served"]
    cols = [run.Q, run.Z, run.x, run.x_actual, run.cost_x, run.cost, run.served]
    if run.profit is not None:
        header += ["b", "p", "a", "profit", "profit_actual"]
        cols += [run.b, run.p, run.a, run.profit, run.profit_actual]
    rows = ([t] + [c[t] for c in cols] for t in range(len(run)))
    write_rows(path, header, rows)


def write_histogram(stats: DelayStats, path: Union[str, Path]) -> None:
    """``delay_slots,count,log10_count``; the last column is a log-axis hint."""
    d, c = stats.histogram()
    write_rows(path, ["delay_slots", "count", "log10_count"],
                ((int(di), int(ci), math.log10(ci)) for di, ci in zip(d, c)))


def write_sweep(rows: Sequence[SweepRow], path: Union[str, Path]) -> None:
    write_rows(path, ["value", "cum_cost", "max_delay", "max_Q", "max_Z", "D_max"],
                ((r.value, r.cum_cost, r.max_delay, r.max_Q, r.max_Z, r.D_max)
                 for r in rows))


def write_compare(lyap: RunRecord, greedy: RunRecord, path: Union[str, Path]) -> None:
    ly_x = np.cumsum(lyap.cost_x)
    ly_a = np.cumsum(lyap.cost)
    gr = np.cumsum(greedy.cost)
    write_rows(path, ["slot", "lyapunov_cum_cost_x", "lyapunov_cum_cost_x_actual",
                       "greedy_cum_cost"],
                ((t, ly_x[t], ly_a[t], gr[t]) for t in range(len(lyap))))
