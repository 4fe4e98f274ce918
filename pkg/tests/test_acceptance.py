"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import sys
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from multipeak.checks import check_monotone, check_submodular
from multipeak.instances import (
    build_cpp_instance,
    gap_ratio,
    no_bound_formula,
    no_value_two_players,
    yes_value_formula,
)
from multipeak.profile_opt import closed_form_valid, grid_opt, structured_opt
from multipeak.setsystems import (
    NO,
    SHARED_FIRST,
    YES,
    collection_from_disjointness,
    generate_partition_family,
    make_disjointness,
    verify_pairwise,
    verify_union_bounds,
)
from multipeak.solvers import (
    brute_force_cpp,
    brute_force_demand,
    brute_force_maxmin,
    brute_force_welfare,
    demand_query,
    greedy_cpp,
    greedy_welfare,
)
from multipeak.valuation import MultiPeakValuation, mask

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from conftest import PIPELINE_SEEDS, two_player_pipeline  # noqa: E402


@pytest.fixture
def say(capsys):
    def _say(n: int, ok: bool, detail: str, seconds: float):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.2f}s)")
        assert ok, detail

    return _say


# --- shared fixtures --------------------------------------------------------

@lru_cache(maxsize=None)
def pipeline_results(s: int, seed: int, case: str):
    inst, eps = two_player_pipeline(s, seed, case)
    mm, _ = two_player_pipeline(s, seed, case, objective="maxmin")
    return inst, eps, brute_force_welfare(inst), brute_force_maxmin(mm), greedy_welfare(inst)


CPP_CONFIGS = [(2, 8, 6, 2), (4, 4, 8, 2), (8, 2, 8, 1)]  # (k, s, t, ones per player); m = 16
CPP_SEEDS = range(4)


@lru_cache(maxsize=None)
def cpp_results():
    out = []
    for k, s, t, opp in CPP_CONFIGS:
        for seed in CPP_SEEDS:
            fam = generate_partition_family(k, s, t, seed=seed)
            for case in (NO, YES):
                dis = make_disjointness(k, t, case, seed=seed, ones_per_player=opp)
                col = collection_from_disjointness(fam, dis, SHARED_FIRST)
                inst = build_cpp_instance(col)
                out.append((k, s, seed, case, dis, fam, inst, brute_force_cpp(inst), greedy_cpp(inst)))
    return out


def distinct_peaks(inst) -> bool:
    """NO-side precondition: no peak set is held by two players."""
    seen = [P for v in inst.valuations for P in v.peaks]
    return len(seen) == len(set(seen))


# --- criteria ---------------------------------------------------------------

def test_c01_two_player_gap_constant(say):
    t0 = time.perf_counter()
    s = 6
    yes = yes_value_formula(2, s, Fraction(2, 3) / s, Fraction(1, 2) * s)
    no = no_value_two_players(Fraction(2, 3), Fraction(1, 2))
    rep = gap_ratio(yes, no, "17/18")
    dt = time.perf_counter() - t0
    ok = yes == 2 and no == Fraction(17, 9) and rep.ratio == Fraction(17, 18) and rep.deviation == 0 and dt < 1
    say(1, ok, f"YES={yes} NO={no} ratio={rep.ratio} deviation={rep.deviation}", dt)


def test_c02_asymptotic_gap_constant(say):
    t0 = time.perf_counter()
    k = 200
    nb = no_bound_formula(k, Fraction(1, 2), Fraction(0))
    per = float(nb.value) / k
    limit = 1 - 1 / (2 * math.e)
    dt = time.perf_counter() - t0
    ok = abs(per - limit) <= 0.01 and abs(nb.k_star / k - 0.5) <= 0.02 and abs(nb.k_star - k / 2) <= 1 and dt < 1
    say(2, ok, f"k=200 per-player {per:.5f} vs {limit:.5f}, k*={nb.k_star}", dt)


def _two_player_tuples():
    out = [(Fraction(2, 3), Fraction(1, 2))]
    for n in range(8, 25):
        alpha = Fraction(n, 12)
        for beta in (Fraction(1, 2), Fraction(7, 12), Fraction(2, 3), Fraction(3, 4), Fraction(5, 6)):
            if (alpha, beta) not in out and closed_form_valid(alpha, beta):
                out.append((alpha, beta))
    return out[:20]


def test_c03_structural_optimizer_agreement(say):
    t0 = time.perf_counter()
    tuples = _two_player_tuples()
    worst_s, worst_g = 0.0, 0.0
    for alpha, beta in tuples:
        target = no_value_two_players(alpha, beta)
        worst_s = max(worst_s, abs(float(structured_opt(2, alpha, beta).value - target)))
        worst_g = max(worst_g, abs(grid_opt(2, alpha, beta, resolution=Fraction(1, 200)).value - float(target)))
    dt = time.perf_counter() - t0
    ok = len(tuples) == 20 and all(b >= Fraction(1, 2) for _, b in tuples) and worst_s <= 1e-9 \
        and worst_g <= 1e-2 and dt < 60
    say(3, ok, f"{len(tuples)} tuples, structured err {worst_s:.1e}, grid err {worst_g:.1e}", dt)


def _random_family(rng, idx):
    m = int(rng.integers(6, 15))
    size = int(rng.integers(2, max(3, m // 2 + 1)))
    n = int(rng.integers(1, 4))
    peaks = []
    while len(peaks) < n:
        P = mask(rng.choice(m, size, replace=False).tolist())
        if P not in peaks:
            peaks.append(P)
    b = Fraction(max(((A & B).bit_count() for i, A in enumerate(peaks) for B in peaks[i + 1:]), default=0))
    b += [Fraction(0), Fraction(1, 2), Fraction(1)][idx % 3]
    # every third family uses a = 1/(2s); the rest mix small and saturating scales
    a = Fraction(1, 2 * size) if idx % 3 == 0 else Fraction(1, int(rng.integers(1, 3 * m)))
    return MultiPeakValuation(m, tuple(peaks), a, b)


def test_c04_submodular_and_monotone(say):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    bad = []
    ms = []
    for idx in range(50):
        v = _random_family(rng, idx)
        assert v.intersecting_violation() is None
        ms.append(v.m)
        mono, sub = check_monotone(v), check_submodular(v)
        if not (mono.passed and sub.passed and mono.exhaustive and sub.exhaustive):
            bad.append((idx, mono.witness, sub.witness))
    dt = time.perf_counter() - t0
    ok = not bad and max(ms) <= 14 and dt < 600
    say(4, ok, f"50 families, m in [{min(ms)},{max(ms)}], violations {len(bad)}", dt)


def test_c05_demand_oracle_exactness(say):
    t0 = time.perf_counter()
    rng = np.random.default_rng(555)
    mismatches, queries = 0, 0
    for idx in range(20):
        m = int(rng.integers(8, 17))
        size = int(rng.integers(2, m // 2 + 1))
        peaks = []
        for _ in range(int(rng.integers(1, 4))):
            P = mask(rng.choice(m, size, replace=False).tolist())
            if P not in peaks:
                peaks.append(P)
        b = Fraction(max(((A & B).bit_count() for i, A in enumerate(peaks) for B in peaks[i + 1:]), default=0))
        v = MultiPeakValuation(m, tuple(peaks), Fraction(1, int(rng.integers(2, 2 * m))), b)
        for _ in range(100):
            scale = Fraction(1, int(rng.integers(1, 2 * m)))
            prices = [scale * Fraction(int(rng.integers(0, 30)), int(rng.integers(1, 20))) for _ in range(m)]
            _, u = demand_query(v, prices)
            _, u2 = brute_force_demand(v, prices)
            queries += 1
            mismatches += u != u2
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and queries == 2000 and dt < 600
    say(5, ok, f"{queries} queries, {mismatches} mismatches", dt)


def test_c06_end_to_end_yes_welfare(say):
    t0 = time.perf_counter()
    rows = []
    for s, seed in PIPELINE_SEEDS:
        inst, eps, w, _, _ = pipeline_results(s, seed, YES)
        p = inst.provenance
        rows.append((s, seed, w.value, yes_value_formula(2, s, p["a"], p["b"])))
    dt = time.perf_counter() - t0
    ok = all(got == want for *_, got, want in rows) and all(s <= 6 for s, *_ in rows) and dt < 60
    say(6, ok, "; ".join(f"s={s} seed={sd}: {got} = {want}" for s, sd, got, want in rows), dt)


def test_c07_end_to_end_no_welfare(say):
    t0 = time.perf_counter()
    rows = []
    for s, seed in PIPELINE_SEEDS:
        inst, eps, w, _, _ = pipeline_results(s, seed, NO)
        _, _, wy, _, _ = pipeline_results(s, seed, YES)
        p = inst.provenance
        bound = no_value_two_players(p["alpha"], p["beta"])
        rows.append((s, seed, eps, w.value, bound, wy.value,
                     closed_form_valid(p["alpha"], p["beta"], eps)))
    dt = time.perf_counter() - t0
    ok = all(valid and got <= bound and got < yes for _, _, _, got, bound, yes, valid in rows) and dt < 60
    say(7, ok, "; ".join(f"s={s} eps={e}: {got} <= {bd} < {y}" for s, _, e, got, bd, y, _ in rows), dt)


def test_c08_cpp_structure(say):
    t0 = time.perf_counter()
    checked_no, checked_yes, skipped, failures = 0, 0, 0, []
    for k, s, seed, case, dis, fam, inst, res, _ in cpp_results():
        assert inst.m <= 16 and math.comb(inst.m, s) <= 10**6
        eps = inst.provenance["epsilon"]
        if case == NO:
            if not distinct_peaks(inst):
                skipped += 1
                continue
            checked_no += 1
            close = sum(1 for v in inst.valuations if v.close_peak(res.witness) is not None)
            if close > 1 or res.value > 1 + (k - 1) * Fraction(3, 4):
                failures.append((k, seed, case, close, res.value))
        else:
            checked_yes += 1
            q = (1 + eps) / (2 * k)
            per = 1 - q * (1 - q)
            shared = fam.blocks[dis.all_ones_columns()[0]][0]
            values = [v.value(shared) for v in inst.valuations]
            if any(x != per for x in values) or res.value != k * per:
                failures.append((k, seed, case, values, res.value))
    dt = time.perf_counter() - t0
    ok = not failures and checked_no >= 10 and checked_yes == 12 and dt < 300
    say(8, ok, f"NO checked {checked_no} (skipped {skipped} with a peak shared by two players), "
               f"YES checked {checked_yes}, failures {failures}", dt)


def test_c09_maxmin(say):
    t0 = time.perf_counter()
    rows = []
    for s, seed in PIPELINE_SEEDS:
        _, _, wy, my, _ = pipeline_results(s, seed, YES)
        _, _, wn, mn, _ = pipeline_results(s, seed, NO)
        rows.append((s, seed, my.value, wy.value / 2, mn.value, wn.value / 2))
    dt = time.perf_counter() - t0
    ok = all(a == b and c <= d for _, _, a, b, c, d in rows) and dt < 60
    say(9, ok, "; ".join(f"s={s}: YES {a}={b}, NO {c}<={d}" for s, _, a, b, c, d in rows), dt)


def test_c10_setsystem_statistics(say):
    t0 = time.perf_counter()
    fam = generate_partition_family(3, 300, 16, Fraction(1, 2), seed=7)
    pair = verify_pairwise(fam)
    union = verify_union_bounds(fam, samples=20000, seed=7)
    dt = time.perf_counter() - t0
    ok = (fam.structure_violations() == [] and pair.max_intersection <= Fraction(3, 2) * 100
          and pair.mean_within_3sigma and union.passed and union.effective_epsilon <= Fraction(1, 2) and dt < 60)
    say(10, ok, f"max pair {pair.max_intersection} <= 150, mean {pair.mean_cross:.2f} "
                f"(3 sigma {3 * pair.sigma_mean:.3f}), union eff eps {float(union.effective_epsilon):.4f}", dt)


def test_c11_baselines(say):
    t0 = time.perf_counter()
    worst_w, worst_c = 1.0, 1.0
    for s, seed in PIPELINE_SEEDS:
        for case in (YES, NO):
            _, _, w, _, g = pipeline_results(s, seed, case)
            worst_w = min(worst_w, float(g.value / w.value))
    for *_, res, g in cpp_results():
        worst_c = min(worst_c, float(g.value / res.value))
    dt = time.perf_counter() - t0
    ok = worst_w >= 0.5 and worst_c >= 1 - 1 / math.e - 1e-9
    say(11, ok, f"worst greedy/opt: welfare {worst_w:.4f} (>= 0.5), cpp {worst_c:.4f} (>= {1 - 1 / math.e:.4f})", dt)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
