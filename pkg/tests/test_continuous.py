from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multipeak.continuous import (
    boundary_agreement_check,
    central_gradient,
    continuous_base,
    continuous_peak,
    glued_eval,
    in_peak_region,
    indicator,
    peak_formula,
)
from multipeak.valuation import make_valuation, mask

A = mask([0, 1, 2, 3])


def test_base_examples(toy):
    assert continuous_base(toy, np.zeros(8)) == 0
    S = mask([4, 5, 6])
    assert continuous_base(toy, indicator(S, 8)) == pytest.approx(float(toy.value(S)), abs=1e-15)
    assert continuous_base(toy, np.ones(8)) == 1


def test_peak_examples(toy):
    assert continuous_peak(toy, A, indicator(A, 8)) == pytest.approx(57 / 64, abs=1e-15)
    # formal value outside the region: a^2 b^2
    assert continuous_peak(toy, A, np.zeros(8)) == pytest.approx(1 / 64, abs=1e-15)
    with pytest.raises(ValueError):
        continuous_peak(toy, mask([4, 5]), np.zeros(8))


def test_region_membership(toy):
    assert in_peak_region(toy, A, indicator(A, 8))
    assert not in_peak_region(toy, A, np.zeros(8))
    x = np.zeros(8)
    x[0] = 1.0  # inside minus outside exactly b = 1
    assert not in_peak_region(toy, A, x)
    assert continuous_peak(toy, A, x) == pytest.approx(continuous_base(toy, x), abs=1e-15)


def test_glued_agrees_with_eval_on_all_points(two_peaks):
    for S in range(1 << 8):
        assert glued_eval(two_peaks, indicator(S, 8)) == pytest.approx(float(two_peaks.value(S)), abs=1e-12)


def test_boundary_agreement_passes(two_peaks):
    for P in two_peaks.peaks:
        rep = boundary_agreement_check(two_peaks, P, trials=100, seed=3)
        assert rep.passed and not rep.vacuous
        assert rep.max_value_gap <= 1e-9


def test_boundary_agreement_saturated_regime():
    v = make_valuation(8, [[0, 1, 2, 3]], Fraction(1, 2), 1)
    x = np.array([1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 0.0, 0.0])  # inside 3 - outside 2 = 1 = b
    rep = boundary_agreement_check(v, A, points=[x])
    assert rep.passed
    assert continuous_base(v, x) == 1
    assert np.allclose(central_gradient(lambda z: continuous_base(v, z), x), 0)


def test_boundary_mutant_fails(toy):
    a, b = float(toy.a), float(toy.b)

    def shifted(x):
        u = float(x[:4].sum())
        w = float(x[4:].sum())
        # b moved by 0.1 in the inside factor only
        return 1 - max(1 - a * (2 * u - (b + 0.1)), 0) * max(1 - a * (2 * w + b), 0)

    rep = boundary_agreement_check(toy, A, trials=50, peak_fn=shifted)
    assert not rep.passed
    assert rep.max_value_gap > 1e-9


def test_tolerances_must_be_positive(toy):
    with pytest.raises(ValueError):
        boundary_agreement_check(toy, A, tol_value=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=8, max_size=8))
def test_peak_dominates_base_in_region(xs):
    v = make_valuation(8, [[0, 1, 2, 3]], Fraction(1, 8), 1)
    x = np.array(xs)
    if in_peak_region(v, A, x):
        assert continuous_peak(v, A, x) >= continuous_base(v, x) - 1e-12
        assert glued_eval(v, x) == continuous_peak(v, A, x)


@given(st.floats(0, 8), st.floats(0, 8))
def test_peak_formula_bounded(u, w):
    assert peak_formula(1 / 8, 1.0, u, w) <= 1.0
