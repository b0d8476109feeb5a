"""Compiled simulation loop for the threshold policy.

Mirrors ``AllocatorPolicy.step`` plus ``FifoTracker`` operation for operation,
so its output is bit-identical to the pure-Python path (checked in tests).
"""

import numpy as np
from numba import njit

from .tracker import COMPLETION_TOL


@njit(cache=True)
def lyapunov_kernel(s, a, gamma, V, eps, x_max):
    n = s.shape[0]
    Q = np.empty(n + 1)
    Z = np.empty(n + 1)
    x = np.empty(n)
    x_act = np.empty(n)
    served = np.empty(n)
    arr_slot = np.empty(n, np.int64)
    amount = np.empty(n)
    rem = np.empty(n)
    comp = np.full(n, -1, np.int64)
    head = 0
    tail = 0
    pending = 0.0
    q = 0.0
    z = 0.0
    for t in range(n):
        Q[t] = q
        Z[t] = z
        st = s[t]
        xt = 0.0 if q + z <= V * gamma[t] else x_max
        x[t] = xt
        x_act[t] = min(max(q - st, 0.0), xt)
        sv = min(q, st + xt)
        served[t] = sv

        if sv > 0.0 and head < tail:
            if sv >= pending * (1.0 - COMPLETION_TOL):
                for k in range(head, tail):
                    rem[k] = 0.0
                    comp[k] = t
                head = tail
                pending = 0.0
            else:
                pending -= sv
                left = sv
                while left > 0.0 and head < tail:
                    take = min(rem[head], left)
                    rem[head] -= take
                    left -= take
                    if rem[head] <= COMPLETION_TOL * max(1.0, amount[head]):
                        rem[head] = 0.0
                        comp[head] = t
                        head += 1
                if head == tail:
                    pending = 0.0

        at = a[t]
        if at > 0.0:
            arr_slot[tail] = t
            amount[tail] = at
            rem[tail] = at
            tail += 1
            pending += at

        nq = max(q - st - xt, 0.0) + at
        z = max(z - st - xt + (eps if q > 0.0 else 0.0), 0.0)
        q = nq
    Q[n] = q
    Z[n] = z
    pend = pending if head < tail else 0.0
    return Q, Z, x, x_act, served, arr_slot[:tail], amount[:tail], comp[:tail], pend
