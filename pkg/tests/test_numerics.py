import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson

from satmc import numerics
from satmc.ctmc import Ctmc, RewardStructure
from satmc.errors import NotIrreducibleError, NumericalError

from conftest import two_state
from oracle import cumulative, stationary, transient
from test_ctmc import random_chain

EPS = 1e-10


@pytest.mark.parametrize("rate", [0.5, 1.0, 7.3, 40.0, 250.0, 3000.0])
def test_poisson_weights_match_scipy(rate):
    pw = numerics.poisson_weights(rate, 1e-12)
    k = np.arange(pw.left, pw.right + 1)
    assert np.allclose(pw.weights, poisson.pmf(k, rate), rtol=1e-9, atol=1e-300)
    assert pw.total >= 1 - 1e-12


def test_poisson_small_values():
    pw = numerics.poisson_weights(1.0, 1e-12)
    w = pw.dense()
    assert w[:3] == pytest.approx([0.367879441, 0.367879441, 0.183939721], abs=1e-9)


def test_poisson_zero_rate():
    pw = numerics.poisson_weights(0.0)
    assert (pw.left, pw.right) == (0, 0)
    assert pw.weights.tolist() == [1.0]


def test_poisson_large_rate_window():
    rate = 1e5
    pw = numerics.poisson_weights(rate, 1e-10)
    assert pw.total >= 1 - 1e-10
    assert pw.right - pw.left < 20 * math.sqrt(rate)


def test_poisson_rejects_bad_eps():
    with pytest.raises(ValueError):
        numerics.poisson_weights(1.0, 0.0)


def test_two_state_transient():
    p = numerics.transient_distribution(two_state(), 1.0, EPS)
    assert p[1] == pytest.approx(0.5 * (1 - math.exp(-2)), abs=1e-8)
    assert p[1] == pytest.approx(0.432332, abs=1e-6)


def test_transient_at_zero_is_point_mass(satellite):
    p = numerics.transient_distribution(satellite, 0.0)
    assert p.tolist() == numerics.initial_vector(satellite).tolist()


def test_absorbing_target():
    c = Ctmc.from_rates([(0, 1, 1.0)], num_states=2)
    p = numerics.transient_distribution(c, 2.0, EPS)
    assert p[1] == pytest.approx(1 - math.exp(-2), abs=1e-8)
    assert p[1] == pytest.approx(0.864665, abs=1e-6)


def test_iteration_cap_error():
    with pytest.raises(NumericalError, match="eps"):
        numerics.transient_distribution(two_state(), 1e6, EPS, max_iterations=1000)


@pytest.mark.parametrize("seed", range(100))
def test_chapman_kolmogorov(seed):
    c = random_chain(seed)
    rng = np.random.default_rng(1000 + seed)
    t1, t2 = rng.uniform(0.05, 3.0, size=2)
    direct = numerics.transient_distribution(c, t1 + t2, EPS)
    mid = numerics.transient_distribution(c, t1, EPS)
    chained = numerics.transient_distribution(c, t2, EPS, start=mid)
    assert np.max(np.abs(direct - chained)) <= 1e-9
    assert abs(direct.sum() - 1) <= EPS + 1e-10


@pytest.mark.parametrize("seed", range(25))
def test_transient_matches_matrix_exponential(seed):
    c = random_chain(seed)
    t = 0.3 + seed / 10
    assert np.allclose(numerics.transient_distribution(c, t, EPS), transient(c, t), atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_backward_matches_forward(seed):
    c = random_chain(seed)
    v = np.random.default_rng(seed).random(c.num_states)
    per_state = numerics.transient_backward(c, 1.3, v, EPS)
    for s in range(c.num_states):
        start = np.eye(c.num_states)[s]
        assert per_state[s] == pytest.approx(numerics.transient_distribution(c, 1.3, EPS, start=start) @ v, abs=1e-9)


def test_normalization_long_horizon(satellite):
    p = numerics.transient_distribution(satellite, 129600.0, EPS)
    assert abs(p.sum() - 1) <= EPS + 1e-10
    assert np.allclose(p, transient(satellite, 129600.0), atol=1e-8)


def test_cumulative_up_time():
    c = two_state()
    value = numerics.cumulative_reward(c, c.reward("up"), 1.0, EPS)
    assert value == pytest.approx(0.5 + 0.25 * (1 - math.exp(-2)), abs=1e-8)
    assert value == pytest.approx(0.716166, abs=1e-6)
    assert numerics.cumulative_reward(c, c.reward("up"), 0.0, EPS) == 0.0


@pytest.mark.parametrize("t", [0.0, 0.5, 17.0, 1e3])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_all_ones_reward_is_t(seed, t):
    c = random_chain(seed)
    ones = RewardStructure("one", np.ones(c.num_states))
    assert abs(numerics.cumulative_reward(c, ones, t, EPS) - t) <= EPS * max(t, 1.0)
    back = numerics.cumulative_reward_backward(c, ones, t, EPS)
    assert np.all(np.abs(back - t) <= EPS * max(t, 1.0))


@pytest.mark.parametrize("seed", range(10))
def test_cumulative_matches_augmented_exponential(seed):
    c = random_chain(seed)
    rng = np.random.default_rng(seed)
    transition = {(int(s), int(d), a): float(rng.random()) for s, d, a in zip(c.src, c.dst, c.actions)}
    rs = RewardStructure("r", rng.random(c.num_states), transition)
    expected = cumulative(c, rs.rate_vector(c), 2.5)
    assert numerics.cumulative_reward_backward(c, rs, 2.5, EPS) == pytest.approx(expected, abs=1e-8)
    assert numerics.cumulative_reward(c, rs, 2.5, EPS) == pytest.approx(expected[c.initial], abs=1e-8)


def test_satellite_rewards_match_dense_oracle(satellite):
    for name in ("num_unplanned", "num_repair", "availability"):
        rs = satellite.reward(name)
        expected = cumulative(satellite, rs.rate_vector(satellite), 129600.0)[satellite.initial]
        assert numerics.cumulative_reward(satellite, rs, 129600.0, EPS) == pytest.approx(expected, rel=1e-8)


def test_steady_state_two_state():
    pi = numerics.steady_state(two_state(1.0, 3.0), 1e-12)
    assert pi == pytest.approx([0.75, 0.25], abs=1e-8)


def test_steady_state_single_state():
    c = Ctmc.from_rates([], num_states=1)
    assert numerics.steady_state(c).tolist() == [1.0]


def test_steady_state_reducible():
    c = Ctmc.from_rates([(0, 1, 1.0)], num_states=2)
    with pytest.raises(NotIrreducibleError, match="irreducible"):
        numerics.steady_state(c)


@pytest.mark.parametrize("seed", range(20))
def test_steady_state_matches_null_space(seed):
    c = random_chain(seed)
    pi = numerics.steady_state(c, 1e-12)
    assert numerics.steady_state_residual(c, pi) <= 1e-10
    assert np.allclose(pi, stationary(c), atol=1e-9)


def test_steady_state_agrees_with_long_transient(constellation):
    pi = numerics.steady_state(constellation, 1e-12)
    min_rate = constellation.rate.min()
    p = numerics.transient_distribution(constellation, 1e4 / min_rate, EPS)
    assert np.max(np.abs(pi - p)) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), factor=st.floats(0.01, 100.0), t=st.floats(0.01, 5.0))
def test_time_rescaling_invariance(seed, factor, t):
    c = random_chain(seed)
    a = numerics.transient_distribution(c, t, EPS)
    b = numerics.transient_distribution(c.scaled(factor), t / factor, EPS)
    assert np.max(np.abs(a - b)) <= 1e-9


def test_reachability_mass_monotone(satellite):
    mask = np.zeros(satellite.num_states, dtype=bool)
    mask[satellite.index_of(s=5)] = True
    c = satellite.make_absorbing(mask)
    masses = [numerics.transient_distribution(c, t, EPS)[mask].sum() for t in np.linspace(0, 129600, 9)]
    assert all(b >= a - 1e-12 for a, b in zip(masses, masses[1:]))


def test_steady_state_constellation_matches_null_space(constellation):
    pi = numerics.steady_state(constellation)
    assert np.allclose(pi, stationary(constellation), atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_linear_solvers_agree(seed):
    c = random_chain(seed)
    from satmc.ctmc import embedded_matrix

    P = embedded_matrix(c)
    active = np.ones(c.num_states, dtype=bool)
    active[0] = False
    b = np.where(active, np.asarray(P[:, 0].todense()).ravel(), 0.0)
    direct = numerics.solve_linear_direct(P, b, active)
    iterative = numerics.solve_linear_gs(P, b, active, 1e-14)
    assert np.allclose(direct, iterative, atol=1e-10)
    assert np.allclose(direct[active], 1.0, atol=1e-10)  # irreducible: target reached surely
