import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multipeak.instances import CPP, MAXMIN, WELFARE, AuctionInstance, yes_value_formula
from multipeak.setsystems import YES
from multipeak.solvers import (
    GuardExceeded,
    brute_force_cpp,
    brute_force_demand,
    brute_force_maxmin,
    brute_force_welfare,
    demand_query,
    greedy_cpp,
    greedy_welfare,
)
from multipeak.valuation import MultiPeakValuation, make_valuation, mask, members

from conftest import two_player_pipeline

Q = Fraction(1, 4)


def _inst(vals, objective=WELFARE, card=None):
    return AuctionInstance(vals[0].m, tuple(vals), objective, card)


def test_single_player_takes_everything():
    v = make_valuation(5, [[0, 1]], Fraction(1, 10), 0)
    res = brute_force_welfare(_inst([v]))
    assert res.value == v.value(v.full) and res.witness == (v.full,)


def test_two_peaks_split():
    v1 = make_valuation(4, [[0, 1]], Q, 0)
    v2 = make_valuation(4, [[2, 3]], Q, 0)
    res = brute_force_welfare(_inst([v1, v2]))
    assert res.value == 2
    assert res.nodes == 16


def test_welfare_witness_is_lexicographically_least():
    v = MultiPeakValuation(3, (), Fraction(1, 3), Fraction(0))
    res = brute_force_welfare(_inst([v, v]))
    best = max(v.value(S) + v.value(7 ^ S) for S in range(8))
    assert res.value == best

    def owners(S0):
        return tuple(0 if S0 >> i & 1 else 1 for i in range(3))

    optimal = [owners(S) for S in range(8) if v.value(S) + v.value(7 ^ S) == best]
    assert owners(res.witness[0]) == min(optimal)


def test_maxmin_single_item():
    v = MultiPeakValuation(1, (), Fraction(1, 2), Fraction(0))
    assert brute_force_maxmin(_inst([v, v], MAXMIN)).value == 0


def test_maxmin_against_reenumeration():
    rng = np.random.default_rng(1)
    vals = [make_valuation(6, [sorted(rng.choice(6, 3, replace=False).tolist())], Fraction(1, 6), 2)
            for _ in range(2)]
    inst = _inst(vals, MAXMIN)
    best = max(min(vals[0].value(S), vals[1].value(63 ^ S)) for S in range(64))
    assert brute_force_maxmin(inst).value == best
    assert brute_force_maxmin(inst).value <= brute_force_welfare(inst).value / 2


def test_cpp_trivial_cardinalities():
    v = make_valuation(4, [[0, 1]], Q, 0)
    assert brute_force_cpp(_inst([v], CPP, 4)).witness == v.full
    assert brute_force_cpp(_inst([v], CPP, 0)).value == 0


def test_cpp_shared_peak_toy():
    v = make_valuation(4, [[0, 1]], Q, 0)
    res = brute_force_cpp(_inst([v, v], CPP, 2))
    assert res.witness == mask([0, 1]) and res.value == 2 and res.nodes == 6
    g = greedy_cpp(_inst([v, v], CPP, 2))
    assert g.value == 2


def test_greedy_examples():
    v = make_valuation(6, [[0, 1, 2]], Fraction(1, 6), 1)
    one = _inst([v])
    assert greedy_welfare(one).value == brute_force_welfare(one).value
    v1, v2 = make_valuation(4, [[0, 1]], Q, 0), make_valuation(4, [[2, 3]], Q, 0)
    assert greedy_welfare(_inst([v1, v2])).value == 2
    single = greedy_cpp(_inst([v, v], CPP, 1))
    assert single.value == max(2 * v.value(1 << i) for i in range(6))


def test_greedy_cpp_modular_is_exact():
    # with no peaks and tiny a, values are far from saturation; still every item is equivalent
    v = MultiPeakValuation(6, (), Fraction(1, 100), Fraction(0))
    inst = _inst([v], CPP, 3)
    assert greedy_cpp(inst).value == brute_force_cpp(inst).value


def test_guards():
    v = make_valuation(12, [[0, 1]], Fraction(1, 12), 0)
    with pytest.raises(GuardExceeded):
        brute_force_welfare(_inst([v, v]), guard=1000)
    with pytest.raises(GuardExceeded):
        brute_force_cpp(_inst([v], CPP, 6), guard=100)


def test_pipeline_yes_matches_formula():
    inst, eps = two_player_pipeline(4, 26, YES)
    p = inst.provenance
    assert brute_force_welfare(inst).value == yes_value_formula(2, p["s"], p["a"], p["b"])


def test_demand_examples():
    v = make_valuation(4, [[0, 1]], Q, 0)
    assert demand_query(v, [0, 0, 0, 0]) == (mask([0, 1]), 1)
    p = [Fraction(3, 5), Fraction(3, 5), Fraction(1, 10), Fraction(1, 10)]
    S, u = demand_query(v, p)
    assert S == mask([2, 3]) and u == Fraction(11, 20)
    assert demand_query(v, [2, 2, 2, 2]) == (0, 0)
    with pytest.raises(ValueError):
        demand_query(v, [0, 0, -1, 0])
    with pytest.raises(ValueError):
        demand_query(v, [0, 0])


@st.composite
def valuation_and_prices(draw):
    m = draw(st.integers(2, 9))
    size = draw(st.integers(1, m))
    peaks = draw(st.lists(st.sets(st.integers(0, m - 1), min_size=size, max_size=size),
                          min_size=0, max_size=3, unique_by=frozenset))
    b = max((len(A & B) for i, A in enumerate(peaks) for B in peaks[i + 1:]), default=0)
    b = Fraction(b) + draw(st.sampled_from([0, Fraction(1, 3), 1]))
    a = Fraction(1, draw(st.integers(1, 3 * m)))
    v = MultiPeakValuation(m, tuple(mask(p) for p in peaks), a, b)
    prices = draw(st.lists(st.fractions(0, Fraction(1, 2), max_denominator=20), min_size=m, max_size=m))
    return v, prices


@settings(max_examples=120, deadline=None)
@given(valuation_and_prices())
def test_demand_matches_brute_force(vp):
    v, prices = vp
    S, u = demand_query(v, prices)
    S2, u2 = brute_force_demand(v, prices)
    assert u == u2
    assert v.value(S) - sum(prices[i] for i in members(S)) == u


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**16), st.sampled_from([2, 3]))
def test_greedy_guarantees_random(seed, k):
    rng = np.random.default_rng(seed)
    m = 8 if k == 2 else 6
    vals = []
    for _ in range(k):
        peaks = [sorted(rng.choice(m, 3, replace=False).tolist())]
        vals.append(make_valuation(m, peaks, Fraction(1, int(rng.integers(2, 8))), 2))
    inst = _inst(vals)
    opt = brute_force_welfare(inst).value
    assert greedy_welfare(inst).value >= opt / 2
    assert brute_force_maxmin(_inst(vals, MAXMIN)).value <= opt / k
    cpp = _inst(vals, CPP, 3)
    assert float(greedy_cpp(cpp).value) >= (1 - 1 / math.e) * float(brute_force_cpp(cpp).value) - 1e-9
