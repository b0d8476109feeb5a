"""
Cost against delay: sweeping V and epsilon
==========================================

Larger V waits longer for cheap prices. Larger epsilon makes the virtual
queue push purchases sooner, which shortens worst-case waits.
"""

from renewalloc import DEFAULT_PARAMS, GeneratorSpec, generate, sweep

trace = generate(GeneratorSpec(seed=3), 26496)

print("V sweep")
for row in sweep(trace, DEFAULT_PARAMS, "V", [20, 50, 100, 200]):
    hours = row.max_delay * 10 / 60
    print(f"  V={row.value:5g}  cost={row.cum_cost:12.0f}  max delay={hours:5.1f} h  bound={row.D_max}")

print("epsilon sweep at V=100")
for row in sweep(trace, DEFAULT_PARAMS, "epsilon", [0, 10, 35, 60, 87.5]):
    bound = "none" if row.D_max is None else row.D_max
    print(f"  eps={row.value:5g}  cost={row.cum_cost:12.0f}  max delay={row.max_delay:4d}  bound={bound}")
