"""Print the gap tables: closed forms, the asymptotic NO bound, public projects,
and brute-forced two-player pipelines.

    python3 scripts/reproduce_gaps.py --max-k 400
"""

import argparse
import math
from dataclasses import dataclass
from fractions import Fraction

from multipeak.instances import (
    build_welfare_instance,
    cpp_far_value,
    gap_ratio,
    no_bound_formula,
    no_value_two_players,
    yes_value_formula,
)
from multipeak.profile_opt import structured_opt
from multipeak.setsystems import (
    NO,
    PER_PLAYER,
    YES,
    collection_epsilon,
    collection_from_disjointness,
    generate_partition_family,
    make_disjointness,
)
from multipeak.solvers import brute_force_welfare


@dataclass
class GapConfig:
    max_k: int = 400
    alpha: Fraction = Fraction(1, 2)
    pipeline: tuple = ((4, 26), (5, 30), (6, 30), (6, 11))
    t: int = 6


def two_player_table():
    print("two players, alpha = 2/3")
    print(f"{'eps':>6} {'beta':>8} {'NO closed':>10} {'NO exact':>10} {'ratio':>8}")
    for eps in (Fraction(0), Fraction(1, 40), Fraction(1, 20), Fraction(1, 10)):
        beta = Fraction(1, 2) + 2 * eps
        exact = structured_opt(2, Fraction(2, 3), beta, eps)
        closed = no_value_two_players(Fraction(2, 3), beta)
        r = gap_ratio(Fraction(2), exact.value)
        print(f"{str(eps):>6} {str(beta):>8} {float(closed):10.6f} {float(exact.value):10.6f} {float(r.ratio):8.5f}")


def asymptotic_table(cfg: GapConfig):
    limit = 1 - 1 / (2 * math.e)
    print(f"\nNO bound per player, alpha = {cfg.alpha}  (limit {limit:.5f})")
    print(f"{'k':>5} {'k*':>5} {'k*/k':>6} {'NO/k':>9} {'gap':>9}")
    k = 2
    while k <= cfg.max_k:
        nb = no_bound_formula(k, cfg.alpha)
        per = float(nb.value) / k
        print(f"{k:5d} {nb.k_star:5d} {nb.k_star / k:6.3f} {per:9.5f} {per - limit:+9.5f}")
        k *= 2


def cpp_table(cfg: GapConfig):
    print("\npublic project, a = 1/(2s), eps = 0")
    print(f"{'k':>5} {'YES/k':>9} {'NO/k':>9} {'ratio':>8} {'2 players':>10}")
    far = cpp_far_value(1, Fraction(1, 2))
    k = 2
    while k <= cfg.max_k:
        per = yes_value_formula(1, 1, Fraction(1, 2), Fraction(1, k))
        yes, no = k * per, 1 + (k - 1) * far
        pair = (1 + far) / (2 * per)
        print(f"{k:5d} {float(per):9.5f} {float(no) / k:9.5f} {float(no / yes):8.5f} {float(pair):10.5f}")
        k *= 2


def pipeline_table(cfg: GapConfig):
    print("\nbrute-forced two-player pipelines (alpha = 2/3, beta = 1/2 + 2 eps)")
    print(f"{'s':>3} {'seed':>5} {'case':>4} {'eps':>6} {'welfare':>10} {'bound':>10}")
    for s, seed in cfg.pipeline:
        fam = generate_partition_family(2, s, cfg.t, seed=seed)
        for case in (YES, NO):
            dis = make_disjointness(2, cfg.t, case, seed=seed, ones_per_player=2)
            col = collection_from_disjointness(fam, dis, PER_PLAYER)
            eps = collection_epsilon(col)
            beta = Fraction(1, 2) + 2 * eps
            inst = build_welfare_instance(col, Fraction(2, 3) / s, beta * s, epsilon=eps)
            w = brute_force_welfare(inst).value
            bound = yes_value_formula(2, s, Fraction(2, 3) / s, beta * s) if case == YES \
                else no_value_two_players(Fraction(2, 3), beta)
            print(f"{s:3d} {seed:5d} {case:>4} {str(eps):>6} {str(w):>10} {str(bound):>10}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-k", type=int, default=GapConfig.max_k)
    cfg = GapConfig(max_k=ap.parse_args().max_k)
    two_player_table()
    asymptotic_table(cfg)
    cpp_table(cfg)
    pipeline_table(cfg)


if __name__ == "__main__":
    main()
