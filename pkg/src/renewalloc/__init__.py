"""Lyapunov drift-plus-penalty allocation of renewable energy to
delay-tolerant consumers: threshold purchasing with a worst-case delay
guarantee, joint pricing, a greedy baseline and a frame-lookahead oracle."""

from .allocator import AllocatorPolicy, actual_purchase, decide_purchase
from .baselines import GreedyPolicy, greedy_step
from .harness import (
    Policy,
    RunRecord,
    VerificationReport,
    compare,
    run_policy,
    sweep,
    verify,
    write_compare,
    write_histogram,
    write_sweep,
    write_trajectory,
)
from .model import (
    DerivedBounds,
    InvalidParams,
    Params,
    SchedulerState,
    SlotObservation,
    SlotOutcome,
    check_drift_inequality,
    derived_bounds,
    lyapunov_value,
    update_queue,
    update_virtual_queue,
    validate_params,
)
from .oracle import (
    FrameOracleResult,
    InfeasibleFrame,
    brute_force_frame,
    check_universal_bound,
    solve_frame,
    solve_frames,
)
from .pricing import (
    DemandModel,
    LinearDemand,
    PricingDecision,
    PricingPolicy,
    Realization,
    ScaledDemand,
    optimize_price,
    price_grid,
    profit,
    realize_demand,
)
from .tracker import DelayStats, FifoTracker, verify_delay_bound
from .traces import (
    GeneratorKind,
    GeneratorSpec,
    Trace,
    TraceFormatError,
    gen_constant,
    gen_iid,
    gen_markov,
    gen_price_spike,
    generate,
    load_csv,
    write_csv,
)

DEFAULT_PARAMS = Params(V=100.0, epsilon=87.5, x_max=400.0, a_max=175.0,
                      s_max=90.0, gamma_max=180.0)

__version__ = "0.1.0"
