import math
import random

import pytest
from hypothesis import given, strategies as st

from mixdta.choice import ChoiceConfig, logit_probabilities, pswap, select_path
from mixdta.costs import CostHistory
from mixdta.errors import ParameterError
from mixdta.routing import Path, PathSet

from conftest import make_triangle


def test_equal_costs_symmetric():
    assert logit_probabilities([100.0, 100.0], 0.1) == pytest.approx([0.5, 0.5])


def test_theta_zero_uniform():
    probs = logit_probabilities([10.0, 500.0, 42.0], 0.0)
    assert probs == pytest.approx([1 / 3] * 3)


def test_hand_value():
    probs = logit_probabilities([100.0, 110.0], 0.1)
    assert probs[0] == pytest.approx(0.73106, abs=1e-5)
    assert probs[1] == pytest.approx(0.26894, abs=1e-5)


def test_empty_costs():
    with pytest.raises(ParameterError):
        logit_probabilities([], 0.1)


@given(
    costs=st.lists(st.floats(0, 1e4), min_size=1, max_size=8),
    theta=st.floats(0, 1),
    shift=st.floats(-1e3, 1e3),
)
def test_logit_properties(costs, theta, shift):
    probs = logit_probabilities(costs, theta)
    assert abs(sum(probs) - 1.0) < 1e-12
    assert all(0.0 <= p <= 1.0 for p in probs)
    shifted = logit_probabilities([c + shift for c in costs], theta)
    assert probs == pytest.approx(shifted, abs=1e-9)
    # monotonicity: cheaper never less likely
    for i in range(len(costs)):
        for j in range(len(costs)):
            if costs[i] < costs[j]:
                assert probs[i] >= probs[j]


def _path_set(net):
    direct = Path(("AC",), "A", "C")
    detour = Path(("AB", "BC"), "A", "C")
    ps = PathSet("A", "C")
    ps.paths = [detour, direct]
    return ps, direct, detour


def test_select_singleton():
    ps = PathSet("A", "C")
    p = Path(("AC",), "A", "C")
    ps.paths = [p]
    net = make_triangle()
    hist = CostHistory.cold_start(net)
    got = select_path(ps, hist, 0.0, "experienced", ChoiceConfig(), random.Random(0))
    assert got is p


def test_select_equal_cost_split():
    # two routes forced to equal cost via theta=0
    net = make_triangle()
    hist = CostHistory.cold_start(net)
    ps, direct, detour = _path_set(net)
    rng = random.Random(1)
    cfg = ChoiceConfig(theta=0.0)
    n = 10_000
    hits = sum(
        1 for _ in range(n)
        if select_path(ps, hist, 0.0, "experienced", cfg, rng) is direct
    )
    assert abs(hits / n - 0.5) < 0.02


def test_select_logit_frequency():
    # free-flow costs 250 (detour) vs 300 (direct); theta=0.02 -> p(detour)=1/(1+e^-1)
    net = make_triangle()
    hist = CostHistory.cold_start(net)
    ps, direct, detour = _path_set(net)
    rng = random.Random(2)
    cfg = ChoiceConfig(theta=0.02)
    n = 10_000
    hits = sum(
        1 for _ in range(n)
        if select_path(ps, hist, 0.0, "experienced", cfg, rng) is detour
    )
    assert abs(hits / n - 1 / (1 + math.exp(-1))) < 0.02


def test_pswap_keep_at_gamma():
    prev = Path(("AC",), "A", "C")
    prop = Path(("AB", "BC"), "A", "C")
    rng = random.Random(3)
    cfg = ChoiceConfig(gamma=10.0)
    for _ in range(100):
        assert pswap(prev, prop, 10, cfg, rng) is prev
        assert pswap(prev, prop, 25, cfg, rng) is prev  # rho clamped at 1


def test_pswap_no_previous():
    prop = Path(("AB", "BC"), "A", "C")
    assert pswap(None, prop, 1, ChoiceConfig(), random.Random(0)) is prop


def test_pswap_keep_rate():
    prev = Path(("AC",), "A", "C")
    prop = Path(("AB", "BC"), "A", "C")
    rng = random.Random(4)
    cfg = ChoiceConfig(gamma=10.0)
    n = 10_000
    kept = sum(1 for _ in range(n) if pswap(prev, prop, 5, cfg, rng) is prev)
    assert abs(kept / n - 0.5) < 0.02


@pytest.mark.parametrize("i,gamma,expect", [(1, 50, 0.02), (20, 50, 0.4), (60, 50, 1.0)])
def test_pswap_rate_formula(i, gamma, expect):
    prev = Path(("AC",), "A", "C")
    prop = Path(("AB", "BC"), "A", "C")
    rng = random.Random(i)
    cfg = ChoiceConfig(gamma=gamma)
    n = 20_000
    kept = sum(1 for _ in range(n) if pswap(prev, prop, i, cfg, rng) is prev)
    sigma = math.sqrt(max(expect * (1 - expect), 1e-12) / n)
    assert abs(kept / n - expect) <= 4 * sigma + 1e-9


def test_fixed_seed_bit_identical():
    net = make_triangle()
    hist = CostHistory.cold_start(net)
    ps, _, _ = _path_set(net)
    cfg = ChoiceConfig(theta=0.01)
    a = [select_path(ps, hist, 0.0, "experienced", cfg, random.Random(77)).links for _ in range(5)]
    b = [select_path(ps, hist, 0.0, "experienced", cfg, random.Random(77)).links for _ in range(5)]
    assert a == b
