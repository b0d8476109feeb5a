"""
Buying early vs buying at the deadline
======================================

The greedy baseline only touches the market when a request is about to
expire. On a price process that is usually cheap with rare spikes, that is
exactly when it tends to pay the spike.
"""

import numpy as np

from renewalloc import DEFAULT_PARAMS, GeneratorKind, GeneratorSpec, compare, generate

trace = generate(GeneratorSpec(GeneratorKind.PRICE_SPIKE, seed=0), 26496)
lyap, greedy = compare(trace, DEFAULT_PARAMS)

print("deadline used by greedy:", greedy.deadline)
print("threshold policy cost:", lyap.cost.sum())
print("greedy cost:          ", greedy.cost.sum())
print("ratio:", lyap.cost.sum() / greedy.cost.sum())

# where does greedy pay?
spike = trace.gamma == trace.gamma.max()
print("share of greedy spend during spikes:", greedy.cost[spike].sum() / greedy.cost.sum())
print("share of threshold spend during spikes:", lyap.cost[spike].sum() / max(lyap.cost.sum(), 1e-12))

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    plt.plot(np.cumsum(lyap.cost), label="threshold")
    plt.plot(np.cumsum(greedy.cost), label="greedy at deadline")
    plt.xlabel("slot")
    plt.ylabel("cumulative cost")
    plt.legend()
    plt.savefig("greedy_comparison.png")
