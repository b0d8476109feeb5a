"""Command-line entry point: ``renewalloc <subcommand> [options]``.

Options may also come from a plain ``key=value`` file given with
``--config``; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .harness import (
    Policy,
    compare,
    run_policy,
    sweep,
    verify,
    write_compare,
    write_histogram,
    write_sweep,
    write_rows,
    write_trajectory,
)
from .model import InvalidParams, Params, derived_bounds
from .oracle import InfeasibleFrame, solve_frame
from .pricing import LinearDemand, ScaledDemand
from .traces import GeneratorKind, GeneratorSpec, TraceFormatError, generate, load_csv, write_csv

SIX_MONTHS = 26496  # 10-minute slots

DEFAULTS: Dict[str, object] = {
    "trace": None,
    "policy": "lyapunov",
    "V": 100.0,
    "epsilon": None,  # a_max / 2
    "x_max": 400.0,
    "a_max": 175.0,
    "s_max": 90.0,
    "gamma_max": 180.0,
    "p_max": None,
    "seed": 0,
    "slots": SIX_MONTHS,
    "generator": "iid",
    "frame_T": "1,10,100",
    "out_dir": ".",
    "check_drift": True,
    "deadline": None,
    "demand": "linear",
    "realization": "uniform",
    "axis": "V",
    "values": None,
    "start": 0,
    "spike_prob": 0.05,
    "spike_base": 10.0,
}

_TYPES = {
    "V": float, "epsilon": float, "x_max": float, "a_max": float, "s_max": float,
    "gamma_max": float, "p_max": float, "seed": int, "slots": int, "deadline": int,
    "start": int, "spike_prob": float, "spike_base": float,
}


def read_config(path: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key == "check_drift":
                out[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = _TYPES.get(key, str)(value)
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    # every default is None so the config file can fill gaps
    p.add_argument("--config")
    p.add_argument("--trace", help="input trace CSV (slot,s,a,gamma[,y])")
    p.add_argument("--generator", choices=[k.value for k in GeneratorKind])
    p.add_argument("--slots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--V", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--a-max", dest="a_max", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--gamma-max", dest="gamma_max", type=float)
    p.add_argument("--p-max", dest="p_max", type=float)
    p.add_argument("--spike-prob", dest="spike_prob", type=float)
    p.add_argument("--spike-base", dest="spike_base", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--check-drift", dest="check_drift", action="store_true", default=None)
    p.add_argument("--no-check-drift", dest="check_drift", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renewalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic trace to CSV")
    _add_common(gen)

    for name, help_ in (("simulate", "run one policy and write trajectory CSVs"),
                        ("verify", "run one policy and check every guarantee")):
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        sp.add_argument("--policy", choices=[p.value for p in Policy])
        sp.add_argument("--deadline", type=int, help="greedy deadline (default D_max)")
        sp.add_argument("--demand", choices=["linear", "exp"])
        sp.add_argument("--realization", choices=["deterministic", "uniform"])
        sp.add_argument("--frame-T", dest="frame_T",
                        help="comma-separated frame sizes for the universal bound")

    sw = sub.add_parser("sweep", help="sweep V or epsilon")
    _add_common(sw)
    sw.add_argument("--axis", choices=["V", "epsilon"])
    sw.add_argument("--values", help="comma-separated values")

    cmp_ = sub.add_parser("compare", help="threshold policy vs greedy at deadline")
    _add_common(cmp_)
    cmp_.add_argument("--deadline", type=int)

    orc = sub.add_parser("oracle", help="solve the lookahead problem on a trace slice")
    _add_common(orc)
    orc.add_argument("--start", type=int)
    orc.add_argument("--frame-T", dest="frame_T", help="frame length in slots")
    return parser


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None and key != "config":
            cfg[key] = value
    if cfg["epsilon"] is None:
        cfg["epsilon"] = float(cfg["a_max"]) / 2
    return cfg


def params_from(cfg) -> Params:
    return Params(V=cfg["V"], epsilon=cfg["epsilon"], x_max=cfg["x_max"],
                  a_max=cfg["a_max"], s_max=cfg["s_max"], gamma_max=cfg["gamma_max"],
                  p_max=cfg["p_max"])


def trace_from(cfg):
    if cfg["trace"]:
        return load_csv(cfg["trace"], cfg["s_max"], None if cfg.get("policy") == "pricing"
                        else cfg["a_max"], cfg["gamma_max"])
    spec = GeneratorSpec(kind=GeneratorKind(cfg["generator"]), seed=cfg["seed"],
                         a_max=cfg["a_max"], s_max=cfg["s_max"],
                         gamma_max=cfg["gamma_max"], spike_prob=cfg["spike_prob"],
                         spike_base=cfg["spike_base"])
    return generate(spec, cfg["slots"])


def _demand(cfg, p: Params):
    if p.p_max is None:
        raise InvalidParams("pricing requires --p-max")
    if cfg["demand"] == "linear":
        return LinearDemand(p.a_max, p.p_max)
    scale = p.p_max / 3
    return ScaledDemand(lambda price, gamma: p.a_max * np.exp(-np.asarray(price) / scale),
                        p.a_max)


def _out(cfg, name: str) -> Path:
    d = Path(cfg["out_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _ints(text: str) -> List[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text: str) -> List[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _run(cfg, p: Params):
    policy = Policy(cfg["policy"])
    kw = dict(seed=cfg["seed"], deadline=cfg["deadline"], check_drift=cfg["check_drift"])
    if policy is Policy.PRICING:
        kw.update(demand=_demand(cfg, p), realization=cfg["realization"])
    return run_policy(trace_from(cfg), policy, p, **kw)


def _print_summary(summary: dict, out) -> None:
    for k, v in summary.items():
        print(f"{k}: {v}", file=out)


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        p = params_from(cfg)
        cmd = args.command
        if cmd == "gen":
            trace = trace_from(cfg)
            path = _out(cfg, "trace.csv")
            write_csv(trace, path)
            print(f"wrote {len(trace)} slots to {path}", file=out)
            return 0

        if cmd in ("simulate", "verify"):
            run = _run(cfg, p)
            write_trajectory(run, _out(cfg, "trajectory.csv"))
            write_histogram(run.delay, _out(cfg, "delay_histogram.csv"))
            _print_summary(run.summary(), out)
            b = derived_bounds(p)
            print(f"D_max: {'unbounded' if b.D_max is None else b.D_max}", file=out)
            if cmd == "simulate":
                if run.drift_violations:
                    print(f"drift inequality violated on {run.drift_violations} slots",
                          file=out)
                    return 1
                return 0
            rep = verify(run, p, _ints(cfg["frame_T"]))
            lines = rep.lines()
            _out(cfg, "verify.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
            for line in lines:
                print(line, file=out)
            return 0 if rep.passed else 1

        if cmd == "sweep":
            axis = str(cfg["axis"]).upper()
            values = cfg["values"] or ("20,50,100,200" if axis == "V" else "10,35,60,87.5")
            rows = sweep(trace_from(cfg), p, axis, _floats(values),
                         check_drift=cfg["check_drift"])
            write_sweep(rows, _out(cfg, "sweep.csv"))
            for r in rows:
                print(f"{axis}={r.value:g} cum_cost={r.cum_cost:.6g} "
                      f"max_delay={r.max_delay} max_Q={r.max_Q:.6g} max_Z={r.max_Z:.6g}",
                      file=out)
            return 0

        if cmd == "compare":
            lyap, greedy = compare(trace_from(cfg), p, deadline=cfg["deadline"],
                                   check_drift=cfg["check_drift"])
            write_compare(lyap, greedy, _out(cfg, "compare.csv"))
            write_histogram(lyap.delay, _out(cfg, "delay_histogram_lyapunov.csv"))
            write_histogram(greedy.delay, _out(cfg, "delay_histogram_greedy.csv"))
            ls, gs = lyap.summary(), greedy.summary()
            print(f"lyapunov cum_cost (gamma*x_actual): {ls['cum_cost']:.6g}", file=out)
            print(f"lyapunov cum_cost (gamma*x): {ls['cum_cost_x']:.6g}", file=out)
            print(f"greedy cum_cost: {gs['cum_cost']:.6g} (deadline {greedy.deadline})",
                  file=out)
            print(f"lyapunov max_delay: {ls['max_delay']}  greedy max_delay: "
                  f"{gs['max_delay']}", file=out)
            return 0

        if cmd == "oracle":
            trace = trace_from(cfg)
            T = _ints(cfg["frame_T"])[0]
            start = cfg["start"]
            if not 0 <= start < start + T <= len(trace):
                raise ValueError(f"slice [{start}, {start + T}) outside trace of {len(trace)}")
            frame = trace.slice(start, start + T)
            res = solve_frame(list(frame), p.epsilon, p.x_max)
            write_rows(_out(cfg, "oracle.csv"), ["slot", "gamma", "x_star"],
                        ((start + i, frame.gamma[i], res.x_star[i]) for i in range(T)))
            print(f"c_star: {res.c_star!r}", file=out)
            print(f"binding: {res.binding}", file=out)
            return 0
    except (InvalidParams, TraceFormatError, InfeasibleFrame, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
