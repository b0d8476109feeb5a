"""
Threshold allocation over six months of synthetic data
======================================================

Run the purchase policy on 26,496 ten-minute slots and look at how large
the backlog gets compared with its worst-case bound.
"""

import numpy as np

from renewalloc import DEFAULT_PARAMS, GeneratorSpec, Policy, derived_bounds, generate, run_policy, verify

trace = generate(GeneratorSpec(seed=1), 26496)
bounds = derived_bounds(DEFAULT_PARAMS)
print(bounds)

run = run_policy(trace, Policy.LYAPUNOV, DEFAULT_PARAMS)
print(run.summary())

# the policy buys all-or-nothing, and only a fraction of slots buy at all
print("slots with a purchase:", np.mean(run.x > 0))
print("mean price on purchase slots:", run.gamma[run.x > 0].mean(), "vs overall", run.gamma.mean())

for line in verify(run, DEFAULT_PARAMS).lines():
    print(line)
