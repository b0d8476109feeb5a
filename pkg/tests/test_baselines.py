import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renewalloc import (
    GreedyPolicy,
    Params,
    Policy,
    SlotObservation,
    Trace,
    greedy_step,
    run_policy,
    verify,
)

P = Params(V=1, epsilon=1, x_max=5, a_max=5, s_max=5, gamma_max=9)


def run_greedy(s, a, g, deadline, p=P):
    pol = GreedyPolicy(deadline)
    outs = []
    for obs in map(SlotObservation, s, a, g):
        pol, out = greedy_step(pol, obs, p)
        outs.append(out)
    return pol, outs


def test_buys_at_deadline_hand_example():
    pol, outs = run_greedy((0, 0, 0), (5, 0, 0), (1, 9, 9), deadline=2)
    assert [o.x for o in outs] == [0, 0, 5]
    assert sum(o.cost for o in outs) == 45
    assert pol.tracker.stats().delays.tolist() == [2]


def test_ample_supply_costs_nothing():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 6, 200).astype(float)
    pol, outs = run_greedy(np.full(200, 5.0), a, np.full(200, 9.0), deadline=1)
    assert sum(o.cost for o in outs) == 0
    assert pol.purchased == 0


def test_threshold_policy_beats_greedy_on_cheap_slot():
    # a cheap slot sits between the arrival and greedy's deadline
    trace = Trace(np.zeros(4), [5, 0, 0, 0], [9, 1, 9, 9])
    greedy = run_policy(trace, Policy.GREEDY, P, deadline=3)
    lyap = run_policy(trace, Policy.LYAPUNOV, P)
    assert greedy.cost.sum() == 45
    assert lyap.cost.sum() == 5
    assert lyap.cost.sum() < greedy.cost.sum()


def test_rejects_nonpositive_deadline():
    with pytest.raises(ValueError):
        GreedyPolicy(0)


def test_supply_served_before_forced_purchase():
    _, outs = run_greedy((0, 0, 3), (5, 0, 0), (1, 1, 9), deadline=2)
    assert outs[2].x == 2 and outs[2].served == 5


def test_over_cap_purchase_flagged():
    loose = Params(V=1, epsilon=1, x_max=1, a_max=5, s_max=5, gamma_max=9)
    pol, outs = run_greedy((0, 0), (5, 0), (1, 1), deadline=1, p=loose)
    assert outs[1].x == 5
    assert pol.over_cap_slots == 1


slots = st.lists(st.tuples(st.floats(0, 5), st.integers(0, 5), st.floats(0, 9)),
                 min_size=1, max_size=150)


@given(slots, st.integers(1, 8))
def test_greedy_invariants(rows, deadline):
    s, a, g = (np.array(c, float) for c in zip(*rows))
    pol = GreedyPolicy(deadline)
    for t, obs in enumerate(map(SlotObservation, s, a, g)):
        oldest = pol.tracker.oldest_age(t)
        out = pol.step(obs, P)
        if out.x > 0:
            assert oldest is not None and oldest >= deadline
        # nothing left in the queue has waited past the deadline
        age = pol.tracker.oldest_age(t)
        assert age is None or age <= deadline - 1 or age == 0
    st_ = pol.tracker.stats()
    assert st_.max_delay <= deadline
    assert pol.over_cap_slots == 0
    assert pol.supply_used + pol.purchased + pol.tracker.remaining == pytest.approx(a.sum(), abs=1e-6)


def test_verify_greedy_run(params):
    from renewalloc import GeneratorSpec, generate

    run = run_policy(generate(GeneratorSpec(seed=2), 5000), Policy.GREEDY, params)
    assert run.deadline == 415
    rep = verify(run, params)
    assert rep.passed
    assert rep["q_bound"].status == rep["z_bound"].status == "skip"
    assert {c.name for c in rep.checks} >= {"conservation", "deadline", "purchase_cap"}
