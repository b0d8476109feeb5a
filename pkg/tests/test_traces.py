import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renewalloc import (
    GeneratorKind,
    GeneratorSpec,
    Trace,
    TraceFormatError,
    gen_iid,
    gen_price_spike,
    generate,
    load_csv,
    write_csv,
)


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_three_rows(tmp_path):
    t = load_csv(write(tmp_path, "slot,s,a,gamma\n0,1,2,3\n1,0.5,0,1\n2,0,175,180\n"))
    assert len(t) == 3
    assert t[1].s == 0.5 and t[2].gamma == 180 and t[0].y is None


def test_load_optional_y(tmp_path):
    t = load_csv(write(tmp_path, "slot,s,a,gamma,y\n0,1,2,3,0.5\n"))
    assert t[0].y == 0.5


@pytest.mark.parametrize("body, match", [
    ("slot,s,a,gamma\n0,1,2,-1\n", "gamma=-1.0 must be finite and non-negative"),
    ("slot,s,a,gamma\n0,1,nan,1\n", "a=nan"),
    ("slot,s,a,gamma\n0,1,2\n", ":2: expected 4 fields"),
    ("slot,s,a,gamma\n0,1,2,3\n2,1,2,3\n", ":3: slot 2 out of sequence"),
    ("slot,s,a,gamma\n0,1,x,3\n", ":2:"),
    ("slot,supply,a,gamma\n", "header"),
    ("", "empty"),
])
def test_load_rejects(tmp_path, body, match):
    with pytest.raises(TraceFormatError, match=match):
        load_csv(write(tmp_path, body))


def test_load_enforces_given_bounds(tmp_path):
    path = write(tmp_path, "slot,s,a,gamma\n0,1,200,3\n")
    assert len(load_csv(path)) == 1
    with pytest.raises(TraceFormatError, match="a=200.0 exceeds bound 175"):
        load_csv(path, a_max=175)


finite = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50)
@given(st.lists(st.tuples(finite, finite, finite, finite), min_size=1, max_size=40),
       st.booleans())
def test_csv_round_trip_exact(tmp_path_factory, rows, with_y):
    s, a, g, y = (np.array(c) for c in zip(*rows))
    t = Trace(s, a, g, y if with_y else None)
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_csv(t, path)
    back = load_csv(path)
    for name in ("s", "a", "gamma"):
        assert np.array_equal(getattr(back, name), getattr(t, name))
    assert (back.y is None) == (not with_y)
    if with_y:
        assert np.array_equal(back.y, t.y)


def test_iid_demand_mean():
    t = gen_iid(GeneratorSpec(seed=0), 1_000_000)
    assert abs(t.a.mean() - 87.5) < 0.5
    assert set(np.unique(t.a)) <= set(range(176))


def test_same_seed_same_trace():
    for kind in GeneratorKind:
        spec = GeneratorSpec(kind, seed=99)
        t1, t2 = generate(spec, 2000), generate(spec, 2000)
        assert np.array_equal(t1.s, t2.s) and np.array_equal(t1.a, t2.a)
        assert np.array_equal(t1.gamma, t2.gamma)


def test_different_seeds_differ():
    assert not np.array_equal(gen_iid(GeneratorSpec(seed=1), 100).a,
                              gen_iid(GeneratorSpec(seed=2), 100).a)


def test_zero_demand_cap():
    assert not gen_iid(GeneratorSpec(a_max=0), 1000).a.any()


@pytest.mark.parametrize("prob, expected", [(0.0, 10.0), (1.0, 180.0)])
def test_spike_degenerate(prob, expected):
    t = gen_price_spike(GeneratorSpec(spike_prob=prob), 1000)
    assert np.all(t.gamma == expected)


def test_spike_fraction():
    t = gen_price_spike(GeneratorSpec(seed=3, spike_prob=0.05), 100_000)
    assert abs((t.gamma == 180).mean() - 0.05) < 0.005


def test_markov_has_demand_states():
    t = generate(GeneratorSpec(GeneratorKind.MARKOV, seed=1), 50_000)
    assert set(np.unique(t.y)) == {0.5, 1.0}
    hi = t.y == 1.0
    assert t.a[hi].mean() > t.a[~hi].mean()


@given(st.sampled_from(list(GeneratorKind)), st.integers(0, 2**63 - 1),
       st.integers(0, 300), st.integers(0, 100), st.integers(0, 400))
def test_generators_respect_bounds(kind, seed, a_max, s_max, gamma_max):
    spec = GeneratorSpec(kind, seed=seed, a_max=a_max, s_max=s_max, gamma_max=gamma_max,
                         spike_base=min(10, gamma_max), const_s=s_max, const_a=a_max,
                         const_gamma=gamma_max)
    t = generate(spec, 500)
    t.check_bounds(s_max, a_max, gamma_max)
    assert t.meta["seed"] == seed


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec(GeneratorKind.PRICE_SPIKE, spike_height=500).validate()
    with pytest.raises(ValueError):
        GeneratorSpec(spike_prob=2).validate()
    with pytest.raises(ValueError):
        GeneratorSpec(GeneratorKind.CONSTANT, const_a=1000).validate()


def test_slice_and_iteration():
    t = generate(GeneratorSpec(seed=5), 50)
    part = t.slice(10, 20)
    assert len(part) == 10 and part[0] == t[10]
    assert len(list(t)) == 50 == len(t.slots)
    with pytest.raises(ValueError):
        Trace([1, 2], [1], [1, 2])
