"""
Posting a price as well as buying energy
========================================

With a linear demand curve the operator charges more as the backlog grows.
Past a point the best it can do is post p_max, where nobody asks for service.
"""

from dataclasses import replace

import numpy as np

from renewalloc import (
    DEFAULT_PARAMS,
    GeneratorKind,
    GeneratorSpec,
    LinearDemand,
    Policy,
    SlotObservation,
    generate,
    optimize_price,
    run_policy,
)

params = replace(DEFAULT_PARAMS, p_max=200.0)
demand = LinearDemand(params.a_max, params.p_max)

# the optimal price climbs with the backlog until it hits p_max
for Q in (0, 5000, 10000, 20000, 30000):
    d = optimize_price(Q, SlotObservation(0, 0, 50, y=1), params, demand, grid_step=0.1)
    print(f"Q={Q:6d}  price={d.p:7.2f}  accept={d.b}  closed form={demand.best_price(Q, params.V):7.2f}")

trace = generate(GeneratorSpec(GeneratorKind.MARKOV, seed=2), 26496)
run = run_policy(trace, Policy.PRICING, params, demand=demand, seed=2, grid_step=0.5)
print(run.summary())
print("acceptance rate:", run.b.mean(), " mean posted price:", run.p.mean())
print("profit with actual purchases is never lower:", bool(np.all(run.profit_actual >= run.profit)))
