import numpy as np
import pytest

from renewalloc import (
    GeneratorKind,
    GeneratorSpec,
    LinearDemand,
    Params,
    Policy,
    PricingDecision,
    PricingPolicy,
    Realization,
    ScaledDemand,
    SlotObservation,
    derived_bounds,
    generate,
    optimize_price,
    price_grid,
    profit,
    realize_demand,
    run_policy,
    verify,
)

DESK = Params(V=10, epsilon=0.5, x_max=1, a_max=1, s_max=1, gamma_max=10, p_max=10)


def flat(value=1.0, a_max=1.0):
    return ScaledDemand(lambda p, g: np.full(np.shape(p), value), a_max)


def test_linear_vertex_example():
    # (1 - p/10)(10p - 20) peaks at p = 6 with value 16
    d = optimize_price(20, SlotObservation(0, 0, 1, y=1), DESK, LinearDemand(1, 10),
                       grid_step=1e-3)
    assert d.b == 1
    assert d.p == pytest.approx(6.0, abs=1e-9)
    assert d.objective == pytest.approx(16.0, abs=1e-9)
    assert LinearDemand(1, 10).best_price(20, 10) == 6


def test_unprofitable_everywhere_rejects():
    p = Params(V=1, epsilon=0.5, x_max=1, a_max=1, s_max=1, gamma_max=10, p_max=10)
    d = optimize_price(20, SlotObservation(0, 0, 1), p, flat(), grid_step=1e-3)
    assert d == PricingDecision(0, 10.0, -10.0)


@pytest.mark.parametrize("demand", [LinearDemand(1, 10), flat(), flat(0.0)])
def test_empty_queue_always_accepts(demand):
    assert optimize_price(0, SlotObservation(0, 0, 3), DESK, demand).b == 1


def test_zero_objective_accepts_at_largest_price():
    # zero demand: every price ties at 0, so pick p_max and b = 1
    d = optimize_price(5, SlotObservation(0, 0, 1), DESK, flat(0.0))
    assert d.b == 1 and d.p == 10 and d.objective == 0


def test_grid_always_contains_p_max():
    g = price_grid(10, 3)
    assert g.tolist() == [0, 3, 6, 9, 10]
    assert price_grid(1, 0.1)[-1] == 1
    assert len(price_grid(10, 1e-3)) == 10001
    with pytest.raises(ValueError):
        price_grid(10, 0)


@pytest.mark.parametrize("Q", [0, 1, 7.3, 20, 55, 99, 150])
@pytest.mark.parametrize("step", [0.5, 0.1, 0.013])
def test_grid_search_close_to_closed_form(Q, step):
    lin = LinearDemand(1, 10)
    p_true = lin.best_price(Q, DESK.V)
    best = float(lin(p_true, 1, 0) * (DESK.V * p_true - Q))
    d = optimize_price(Q, SlotObservation(0, 0, 1), DESK, lin, grid_step=step)
    lip = lin.a_max / lin.p_max
    assert best - lip * DESK.V * DESK.p_max * step <= d.objective <= best + 1e-9


@pytest.mark.parametrize("y_invariant", [True, False])
def test_scaled_price_ignores_y(y_invariant):
    demand = ScaledDemand(lambda p, g: 5 * np.exp(-np.asarray(p) / (1 + g)), 5,
                          y_invariant=y_invariant)
    p = Params(V=3, epsilon=1, x_max=40, a_max=40, s_max=1, gamma_max=10, p_max=10)
    for Q in (0, 4, 12, 30):
        for gamma in (0, 2.5):
            ds = [optimize_price(Q, SlotObservation(0, 0, gamma, y), p, demand)
                  for y in (0.5, 1, 7)]
            assert len({d.p for d in ds}) == 1
            assert len({d.b for d in ds}) == 1
            base = ds[1].objective
            assert [d.objective for d in ds] == pytest.approx([0.5 * base, base, 7 * base])


def test_realize_rejected_slot():
    d = PricingDecision(0, 3, -1)
    assert realize_demand(d, SlotObservation(0, 0, 1), flat(), np.random.default_rng(0)) == 0


def test_realize_deterministic_mean():
    d = PricingDecision(1, 1, 1)
    got = realize_demand(d, SlotObservation(0, 0, 1), flat(3.5, a_max=4),
                         np.random.default_rng(0), Realization.DETERMINISTIC)
    assert got == 3.5


def test_realize_uniform_mean_and_range():
    rng = np.random.default_rng(2024)
    demand = flat(87.5, a_max=175)
    d = PricingDecision(1, 1, 1)
    obs = SlotObservation(0, 0, 1)
    draws = np.array([realize_demand(d, obs, demand, rng) for _ in range(1_000_000)])
    assert draws.min() >= 0 and draws.max() <= 175
    assert abs(draws.mean() - 87.5) < 0.5


def test_realize_uniform_narrow_near_a_max():
    rng = np.random.default_rng(1)
    draws = [realize_demand(PricingDecision(1, 1, 1), SlotObservation(0, 0, 1),
                            flat(170, a_max=175), rng) for _ in range(2000)]
    assert min(draws) >= 165 and max(draws) <= 175


def test_realize_mean_above_cap_raises():
    with pytest.raises(ValueError):
        realize_demand(PricingDecision(1, 0, 1), SlotObservation(0, 0, 1, y=2),
                       LinearDemand(1, 10), np.random.default_rng(0))


@pytest.mark.parametrize("args, expected", [
    ((1, 6, 0.4, 2, 0), 2.4),
    ((0, 3, 0, 5, 1), -5),
    ((1, 0, 3, 0, 0), 0),
])
def test_profit_examples(args, expected):
    assert profit(*args) == pytest.approx(expected)


def test_first_pricing_step_from_empty():
    pol = PricingPolicy(DESK, LinearDemand(1, 10), np.random.default_rng(0))
    out = pol.step(SlotObservation(0.3, 99, 2, y=1))
    assert out.b == 1 and out.x == 0
    assert pol.state.Q == out.a
    assert 0 <= out.a <= 1


def test_rejection_never_grows_queue():
    p = Params(V=1, epsilon=0.5, x_max=1, a_max=1, s_max=1, gamma_max=10, p_max=10)
    pol = PricingPolicy(p, flat(), np.random.default_rng(0))
    pol.state.Q = 50.0
    out = pol.step(SlotObservation(0.5, 0, 1))
    assert out.b == 0 and out.a == 0
    assert pol.state.Q <= 50


def test_policy_rejects_oversized_demand():
    with pytest.raises(ValueError):
        PricingPolicy(DESK, LinearDemand(5, 10), np.random.default_rng(0))


@pytest.mark.parametrize("kind", [GeneratorKind.IID_UNIFORM, GeneratorKind.MARKOV])
def test_long_pricing_run_keeps_bounds(params, kind):
    from dataclasses import replace

    p = replace(params, p_max=200.0)
    trace = generate(GeneratorSpec(kind, seed=4), 100_000)
    run = run_policy(trace, Policy.PRICING, p, seed=4, grid_step=0.5)
    b = derived_bounds(p)
    assert run.Q_path.max() <= b.Q_max
    assert run.Z_path.max() <= b.Z_max
    assert run.delay.max_delay <= b.D_max
    assert np.all(run.a[run.b == 0] == 0)
    assert np.all(run.profit_actual >= run.profit - 1e-9)
    rep = verify(run, p)
    assert rep.passed, rep.lines()
    assert rep["profit_dominance"].status == "pass"


def test_pricing_runs_are_seed_deterministic(params):
    from dataclasses import replace

    p = replace(params, p_max=200.0)
    trace = generate(GeneratorSpec(seed=1), 3000)
    r1 = run_policy(trace, Policy.PRICING, p, seed=8)
    r2 = run_policy(trace, Policy.PRICING, p, seed=8)
    r3 = run_policy(trace, Policy.PRICING, p, seed=9)
    assert np.array_equal(r1.a, r2.a) and np.array_equal(r1.p, r2.p)
    assert not np.array_equal(r1.a, r3.a)
    assert r1.realization == "uniform"
