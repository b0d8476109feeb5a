"""
How far is the online policy from a lookahead planner?
======================================================

Split the run into frames of T slots. A planner that sees a whole frame in
advance only has to buy enough to cover the frame and fills the cheapest
slots first. The online policy stays within B*T/V of that average.
"""

from renewalloc import DEFAULT_PARAMS, GeneratorSpec, Policy, check_universal_bound, generate, run_policy, solve_frame

trace = generate(GeneratorSpec(seed=4), 20000)
run = run_policy(trace, Policy.LYAPUNOV, DEFAULT_PARAMS)

res = solve_frame(list(trace.slice(0, 12)), DEFAULT_PARAMS.epsilon, DEFAULT_PARAMS.x_max)
print("first frame of 12 slots:", res.c_star, res.binding)
print("planned purchases:", res.x_star)

for T in (1, 10, 100):
    rep = check_universal_bound(run, T, DEFAULT_PARAMS)
    print(f"T={T:3d}  online={rep.lhs:8.1f}  lookahead={rep.mean_c_star:8.1f}  slack={rep.fudge:9.1f}  ok={rep.passed}")
