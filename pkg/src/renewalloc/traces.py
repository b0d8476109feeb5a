"""Exogenous input traces: synthetic generators and CSV interchange.

CSV schema: header ``slot,s,a,gamma`` with an optional trailing ``y``
column, one row per slot, 0-based contiguous slot indices. Values are written
with ``repr`` so a write/load round trip is bit-exact.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .model import SlotObservation

# params-scale defaults: energy units per 10-minute slot and $ per unit
A_MAX = 175.0
S_MAX = 90.0
GAMMA_MAX = 180.0


class TraceFormatError(ValueError):
    """Malformed or out-of-bounds trace data."""


class GeneratorKind(str, enum.Enum):
    IID_UNIFORM = "iid"
    MARKOV = "markov"
    PRICE_SPIKE = "spike"
    CONSTANT = "constant"


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for a synthetic trace family.

    Demand is uniform on the integers ``{0, ..., a_max}`` (in MARKOV mode, on
    the lower or upper half depending on the state); supply and price are
    uniform on ``[s_low, s_max]`` and ``[gamma_low, gamma_max]``. The MARKOV
    family modulates each process with its own HIGH/LOW chain that switches
    with probability ``switch_prob`` per slot. PRICE_SPIKE replaces the
    price process by ``spike_base``, jumping to ``spike_height`` with
    probability ``spike_prob``. CONSTANT repeats ``(const_s, const_a,
    const_gamma, const_y)``.
    """

    kind: GeneratorKind = GeneratorKind.IID_UNIFORM
    seed: int = 0
    a_max: float = A_MAX
    s_max: float = S_MAX
    gamma_max: float = GAMMA_MAX
    s_low: float = 0.0
    gamma_low: float = 0.0
    switch_prob: float = 0.02
    spike_base: float = 10.0
    spike_height: Optional[float] = None  # defaults to gamma_max
    spike_prob: float = 0.05
    const_s: float = 0.0
    const_a: float = 0.0
    const_gamma: float = 0.0
    const_y: Optional[float] = None

    def validate(self) -> "GeneratorSpec":
        kind = GeneratorKind(self.kind)
        for name in ("a_max", "s_max", "gamma_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")
        if not 0 <= self.s_low <= self.s_max:
            raise ValueError("need 0 <= s_low <= s_max")
        if not 0 <= self.gamma_low <= self.gamma_max:
            raise ValueError("need 0 <= gamma_low <= gamma_max")
        if not 0 <= self.switch_prob <= 1 or not 0 <= self.spike_prob <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
        h = self.gamma_max if self.spike_height is None else self.spike_height
        if kind is GeneratorKind.PRICE_SPIKE and not (
            0 <= self.spike_base <= self.gamma_max and 0 <= h <= self.gamma_max
        ):
            raise ValueError("spike base and height must lie in [0, gamma_max]")
        if kind is GeneratorKind.CONSTANT and not (
            0 <= self.const_s <= self.s_max
            and 0 <= self.const_a <= self.a_max
            and 0 <= self.const_gamma <= self.gamma_max
        ):
            raise ValueError("constant values outside declared bounds")
        return self


@dataclass
class Trace:
    s: np.ndarray
    a: np.ndarray
    gamma: np.ndarray
    y: Optional[np.ndarray] = None
    slot_minutes: float = 10.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.s = np.asarray(self.s, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float)
        n = len(self.s)
        if len(self.a) != n or len(self.gamma) != n or (
            self.y is not None and len(self.y) != n
        ):
            raise ValueError("trace columns have different lengths")

    def __len__(self) -> int:
        return len(self.s)

    def __getitem__(self, t: int) -> SlotObservation:
        y = None if self.y is None else float(self.y[t])
        return SlotObservation(float(self.s[t]), float(self.a[t]),
                               float(self.gamma[t]), y)

    def __iter__(self) -> Iterator[SlotObservation]:
        for t in range(len(self)):
            yield self[t]

    @property
    def slots(self) -> list[SlotObservation]:
        return list(self)

    def slice(self, start: int, stop: int) -> "Trace":
        y = None if self.y is None else self.y[start:stop]
        return Trace(self.s[start:stop], self.a[start:stop],
                     self.gamma[start:stop], y, self.slot_minutes,
                     dict(self.meta, slice=(start, stop)))

    def check_bounds(self, s_max: float, a_max: float, gamma_max: float) -> None:
        for name, col, hi in (("s", self.s, s_max), ("a", self.a, a_max),
                              ("gamma", self.gamma, gamma_max)):
            bad = np.nonzero(~((col >= 0) & (col <= hi)))[0]
            if bad.size:
                t = int(bad[0])
                raise TraceFormatError(
                    f"slot {t}: {name}={col[t]} outside [0, {hi}]")


def _uniform_ints(rng: np.random.Generator, hi: float, n: int) -> np.ndarray:
    return rng.integers(0, int(math.floor(hi)) + 1, size=n).astype(float)


def _markov_states(rng: np.random.Generator, p: float, n: int) -> np.ndarray:
    """0/1 two-state chain started in LOW, switching with probability ``p``."""
    flips = rng.random(n) < p
    flips[0] = False
    return (np.cumsum(flips) % 2).astype(bool)


def _meta(spec: GeneratorSpec, length: int) -> dict:
    return {"generator": GeneratorKind(spec.kind).value, "seed": spec.seed,
            "length": length, "a_max": spec.a_max, "s_max": spec.s_max,
            "gamma_max": spec.gamma_max}


def gen_iid(spec: GeneratorSpec, length: int) -> Trace:
    spec = replace(spec, kind=GeneratorKind.IID_UNIFORM).validate()
    rng = np.random.default_rng(spec.seed)
    a = _uniform_ints(rng, spec.a_max, length)
    s = rng.uniform(spec.s_low, spec.s_max, length)
    g = rng.uniform(spec.gamma_low, spec.gamma_max, length)
    return Trace(s, a, g, meta=_meta(spec, length))


def gen_markov(spec: GeneratorSpec, length: int) -> Trace:
    spec = replace(spec, kind=GeneratorKind.MARKOV).validate()
    rng = np.random.default_rng(spec.seed)
    hi_a = _markov_states(rng, spec.switch_prob, length)
    hi_s = _markov_states(rng, spec.switch_prob, length)
    hi_g = _markov_states(rng, spec.switch_prob, length)
    half_a = int(math.floor(spec.a_max)) // 2
    a = _uniform_ints(rng, half_a, length) + np.where(hi_a, half_a, 0)
    a = np.minimum(a, math.floor(spec.a_max))
    s_mid = 0.5 * (spec.s_low + spec.s_max)
    u = rng.random(length)
    s = np.where(hi_s, s_mid + u * (spec.s_max - s_mid),
                 spec.s_low + u * (s_mid - spec.s_low))
    g_mid = 0.5 * (spec.gamma_low + spec.gamma_max)
    u = rng.random(length)
    g = np.where(hi_g, g_mid + u * (spec.gamma_max - g_mid),
                 spec.gamma_low + u * (g_mid - spec.gamma_low))
    y = np.where(hi_a, 1.0, 0.5)
    return Trace(s, a, g, y, meta=_meta(spec, length))


def gen_price_spike(spec: GeneratorSpec, length: int) -> Trace:
    spec = replace(spec, kind=GeneratorKind.PRICE_SPIKE).validate()
    rng = np.random.default_rng(spec.seed)
    a = _uniform_ints(rng, spec.a_max, length)
    s = rng.uniform(spec.s_low, spec.s_max, length)
    height = spec.gamma_max if spec.spike_height is None else spec.spike_height
    spikes = rng.random(length) < spec.spike_prob
    g = np.where(spikes, height, spec.spike_base).astype(float)
    meta = _meta(spec, length)
    meta.update(spike_prob=spec.spike_prob, spike_base=spec.spike_base)
    return Trace(s, a, g, meta=meta)


def gen_constant(spec: GeneratorSpec, length: int) -> Trace:
    spec = replace(spec, kind=GeneratorKind.CONSTANT).validate()
    y = None if spec.const_y is None else np.full(length, float(spec.const_y))
    return Trace(np.full(length, float(spec.const_s)),
                 np.full(length, float(spec.const_a)),
                 np.full(length, float(spec.const_gamma)), y,
                 meta=_meta(spec, length))


_GENERATORS = {
    GeneratorKind.IID_UNIFORM: gen_iid,
    GeneratorKind.MARKOV: gen_markov,
    GeneratorKind.PRICE_SPIKE: gen_price_spike,
    GeneratorKind.CONSTANT: gen_constant,
}


def generate(spec: GeneratorSpec, length: int) -> Trace:
    return _GENERATORS[GeneratorKind(spec.kind)](spec, length)


def write_csv(trace: Trace, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["slot", "s", "a", "gamma"]
        if trace.y is not None:
            header.append("y")
        w.writerow(header)
        for t in range(len(trace)):
            row = [str(t), repr(float(trace.s[t])), repr(float(trace.a[t])),
                   repr(float(trace.gamma[t]))]
            if trace.y is not None:
                row.append(repr(float(trace.y[t])))
            w.writerow(row)


def load_csv(path: Union[str, Path], s_max: Optional[float] = None,
             a_max: Optional[float] = None,
             gamma_max: Optional[float] = None) -> Trace:
    """Parse a trace file, rejecting NaN, infinite and negative values.

    Upper bounds are enforced for whichever of ``s_max``, ``a_max`` and
    ``gamma_max`` are given.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        if header not in (["slot", "s", "a", "gamma"], ["slot", "s", "a", "gamma", "y"]):
            raise TraceFormatError(
                f"{path}: header must be slot,s,a,gamma[,y], got {','.join(header)}")
        has_y = len(header) == 5
        cols: list[list[float]] = [[] for _ in range(len(header) - 1)]
        limits = {"s": s_max, "a": a_max, "gamma": gamma_max, "y": None}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                slot = int(row[0])
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
            if slot != len(cols[0]):
                raise TraceFormatError(
                    f"{path}:{lineno}: slot {slot} out of sequence")
            for name, v in zip(header[1:], vals):
                if not math.isfinite(v) or v < 0:
                    raise TraceFormatError(
                        f"{path}:{lineno}: {name}={v} must be finite and non-negative")
                hi = limits[name]
                if hi is not None and v > hi:
                    raise TraceFormatError(
                        f"{path}:{lineno}: {name}={v} exceeds bound {hi}")
            for col, v in zip(cols, vals):
                col.append(v)
    y = np.asarray(cols[3]) if has_y else None
    return Trace(np.asarray(cols[0]), np.asarray(cols[1]), np.asarray(cols[2]),
                 y, meta={"source": str(path)})
