from fractions import Fraction

import pytest

from multipeak.checks import (
    check_monotone,
    check_peak_dominance,
    check_submodular,
    check_uniqueness,
)
from multipeak.valuation import MultiPeakValuation, make_valuation, mask, value_table


def test_valid_valuation_passes_everything(two_peaks):
    for check in (check_monotone, check_submodular, check_uniqueness, check_peak_dominance):
        rep = check(two_peaks)
        assert rep.passed, rep.to_dict()


def test_m10_and_m12_exhaustive():
    v = make_valuation(10, [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]], Fraction(1, 10), 1)
    rep = check_monotone(v)
    assert rep.passed and rep.exhaustive
    w = make_valuation(12, [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11]], Fraction(1, 8), 1)
    rep = check_submodular(w)
    assert rep.passed and rep.exhaustive and rep.checked == 66 * 2**10


def test_empty_and_single_peak_families():
    empty = MultiPeakValuation(6, (), Fraction(1, 6), Fraction(0))
    assert check_monotone(empty).passed
    assert check_submodular(empty).passed
    single = make_valuation(8, [[1, 3, 5]], Fraction(1, 6), Fraction(1, 2))
    assert check_submodular(single).passed


def test_monotone_mutant_without_clamp():
    a, b, peak = Fraction(1, 4), Fraction(1), mask([0, 1, 2, 3])
    v = MultiPeakValuation(8, (peak,), a, b)

    def unclamped(S):
        if v.close_peak(S) is None:
            return v.value(S)
        x, y = (S & peak).bit_count(), (S & ~peak).bit_count()
        # first factor no longer clamped at zero
        return 1 - (1 - a * (2 * x - b)) * max(1 - a * (2 * y + b), Fraction(0))

    rep = check_monotone(unclamped, 8)
    assert not rep.passed
    S, i = mask(rep.witness["S"]), rep.witness["i"]
    assert unclamped(S | 1 << i) < unclamped(S)


def test_submodular_mutant_non_intersecting_family():
    # peaks meet in 3 = b + 2 items; resolve double closeness by lowest index
    v = MultiPeakValuation(8, (mask([0, 1, 2, 3]), mask([0, 1, 2, 4])), Fraction(1, 8), Fraction(1))
    T, D = value_table(v, strict=False)

    def f(S):
        return Fraction(int(T[S]), D)

    rep = check_submodular(f, 8)
    assert not rep.passed
    assert rep.witness == {"S": [1, 2, 4], "i": 0, "j": 3}
    S, bi, bj = mask([1, 2, 4]), 1, 1 << 3
    assert f(S | bi | bj) - f(S | bj) > f(S | bi) - f(S)
    assert not check_uniqueness(v).passed


def test_callable_needs_ground_size():
    with pytest.raises(ValueError):
        check_monotone(lambda S: Fraction(0))


def test_sampled_mode_above_exhaustive_limit():
    v = make_valuation(16, [list(range(8)), list(range(8, 16))], Fraction(1, 16), 1)
    rep = check_submodular(v, samples=500)
    assert rep.passed and not rep.exhaustive
    assert check_uniqueness(v, samples=500).passed
