import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satmc.checker import (
    ModelChecker,
    check,
    prob_next,
    prob_until,
    results_csv,
    reward_query,
    sat_states,
    steady_query,
)
from satmc.ctmc import Ctmc, build_state_space
from satmc.errors import ModelError, NotIrreducibleError
from satmc.lang import parse_model
from satmc.numerics import transient_distribution

from conftest import two_state
from oracle import transient
from test_ctmc import random_chain

UP_FAIL = Ctmc.from_rates([(0, 1, 1.0)], num_states=2)
FAN = Ctmc.from_rates([(0, 1, 2.0), (0, 2, 1.0)], num_states=3)


def test_sat_states_basic(satellite):
    assert sat_states(satellite, "true").all()
    five = sat_states(satellite, "s=5")
    assert satellite.states[five, 0].tolist() == [5]
    assert np.array_equal(sat_states(satellite, "!(s=5) & true"), ~five)


def test_labels_resolve(satellite):
    assert np.array_equal(sat_states(satellite, '"replacing"'), sat_states(satellite, "s=5"))


def test_exponential_reachability():
    assert check(UP_FAIL, "P=?[F<=2 s=1]").value == pytest.approx(1 - math.exp(-2), abs=1e-8)


def test_target_holds_initially(satellite):
    assert check(satellite, "P=?[F<=10 s=0]").value == 1.0
    assert check(satellite, "P=?[F<=0 s=0]").value == 1.0
    assert check(satellite, "P=?[F<=0 s=5]").value == 0.0


def test_unbounded_until():
    c = Ctmc.from_rates([(0, 1, 1.0), (0, 2, 3.0), (1, 1, 1.0), (2, 2, 1.0)], num_states=3)
    assert check(c, "P=?[F s=1]").value == pytest.approx(0.25, abs=1e-10)
    assert check(c, "P=?[s=0 U s=2]").value == pytest.approx(0.75, abs=1e-10)
    assert check(c, "P=?[!(s=0) U s=2]").value == 0.0


def test_unbounded_until_matches_long_horizon(satellite):
    unbounded = check(satellite, "P=?[s!=4 U s=5]").value
    long = check(satellite, "P=?[s!=4 U<=1e8 s=5]").value
    assert unbounded == pytest.approx(long, abs=1e-8)


def test_prob_next():
    one = Ctmc.from_rates([(0, 1, 3.0)], num_states=2)
    assert prob_next(one, "s=1", 0, 1)[0] == pytest.approx(1 - math.exp(-3), abs=1e-12)
    assert prob_next(one, "s=1", 0.5, 0.5)[0] == 0.0
    assert prob_next(FAN, "s=1")[0] == pytest.approx(2 / 3)
    assert check(FAN, "P=?[X s=1]").value == pytest.approx(2 / 3)


def test_steady_state_queries(constellation):
    c = two_state(1.0, 3.0)
    assert steady_query(c, "true") == pytest.approx(1.0)
    assert steady_query(c, "s=0") == pytest.approx(0.75, abs=1e-8)
    assert steady_query(constellation, "s<=3") == pytest.approx(0.99958, abs=2e-4)


def test_steady_rejects_reducible():
    with pytest.raises(NotIrreducibleError):
        check(UP_FAIL, "S=?[s=0]")


def test_reward_query_and_ratio(birth_death):
    assert reward_query(birth_death, "up", 1.0) == pytest.approx(0.716166, abs=1e-6)
    assert check(birth_death, 'R{"up"}=?[C<=2]/2').value == pytest.approx(reward_query(birth_death, "up", 2.0) / 2)
    with pytest.raises(ModelError, match="unknown reward"):
        reward_query(birth_death, "nope", 1.0)


def test_general_interval_by_hand(birth_death):
    # stay anywhere up to time 1, then reach s=1 within one more unit
    got = check(birth_death, "P=?[true U[1,2] s=1]").value
    p1 = transient(birth_death, 1.0)
    hit = 1 - math.exp(-1.0)
    assert got == pytest.approx(p1[1] + p1[0] * hit, abs=1e-8)


def test_interval_until_respects_left_formula():
    # 0 -> 1 -> 2; phi1 = s<=1 must hold throughout [0, a]
    c = Ctmc.from_rates([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], num_states=3)
    got = prob_until(c, "s<=1", "s=1", 0.5, 1.5)[0]
    # reference: dense computation on the two phases
    absorbing_outside = c.make_absorbing(np.array([False, False, True]))
    mid = transient(absorbing_outside, 0.5)
    mid[2] = 0.0
    second = c.make_absorbing(np.array([False, True, True]))
    ones = np.zeros(3)
    for s in range(2):
        start = np.eye(3)[s]
        ones[s] = 1.0 if s == 1 else transient(second, 1.0, start)[1]
    assert got == pytest.approx(mid @ ones, abs=1e-8)


@pytest.mark.parametrize("seed", range(15))
def test_until_duality(seed):
    c = random_chain(seed)
    target = np.zeros(c.num_states, dtype=bool)
    target[-1] = True
    via_until = prob_until(c, "true", target, 0.0, 1.7)[c.initial]
    via_transient = transient_distribution(c.make_absorbing(target), 1.7)[target].sum()
    assert via_until == pytest.approx(via_transient, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(0, 2), b1=st.floats(0, 3), b2=st.floats(0, 3))
def test_until_monotone_in_upper_bound(seed, a, b1, b2):
    c = random_chain(seed)
    lo, hi = sorted((b1, b2))
    x = prob_until(c, "s!=1", "s=3", a, a + lo)
    y = prob_until(c, "s!=1", "s=3", a, a + hi)
    assert np.all(x <= y + 1e-9)
    assert np.all((x >= -1e-9) & (x <= 1 + 1e-9))


@pytest.mark.parametrize("op", ["<", "<=", ">", ">="])
def test_threshold_consistency(satellite, op):
    value = check(satellite, "P=?[F<=129600 s=5]").value
    for threshold in (0.05, value, 0.1):
        got = check(satellite, f"P{op}{threshold!r} [F<=129600 s=5]").value
        expected = {"<": value < threshold, "<=": value <= threshold, ">": value > threshold, ">=": value >= threshold}[op]
        assert got == expected


def test_nested_operator():
    c = Ctmc.from_rates([(0, 1, 1.0), (1, 2, 5.0), (2, 0, 1.0)], num_states=3)
    res = check(c, "P=?[F<=3 P>0.9 [F<=1 s=2]]")
    inner = prob_until(c, "true", "s=2", 0, 1)
    assert res.value == pytest.approx(prob_until(c, "true", inner > 0.9, 0, 3)[0])


def test_boolean_result_and_csv(birth_death):
    r = check(birth_death, "P>0.5 [F<=1 s=1]")
    assert r.is_boolean and r.value is True
    text = results_csv([r, check(birth_death, "P=?[F<=1 s=1]")])
    lines = text.splitlines()
    assert lines[0] == "query,value,tolerance,seconds"
    assert lines[1].startswith("P>0.5 [F<=1 s=1],true,1e-10,")


def test_time_bound_may_use_constants():
    ast = parse_model("ctmc const double T = 2; module m s:[0..1] init 0; [] s=0 -> 1:(s'=1); [] s=1 -> 1:(s'=0); endmodule")
    c = build_state_space(ast)
    assert check(c, "P=?[F<=T s=1]").value == pytest.approx(1 - math.exp(-2), abs=1e-8)


def test_path_formula_outside_p_rejected(birth_death):
    with pytest.raises(Exception):
        ModelChecker(birth_death).check("F<=1 s=1")
