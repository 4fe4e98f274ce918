"""Pairwise and union statistics of random partition families across seeds.

    python3 scripts/setsystem_stats.py --k 3 --s 300 --t 16 --seeds 10
"""

import argparse
from dataclasses import dataclass
from fractions import Fraction

from multipeak.setsystems import generate_partition_family, verify_pairwise, verify_union_bounds


@dataclass
class StatsConfig:
    k: int = 3
    s: int = 300
    t: int = 16
    seeds: int = 10
    epsilon: Fraction = Fraction(1, 2)
    samples: int = 20000


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name in ("k", "s", "t", "seeds", "samples"):
        ap.add_argument(f"--{name}", type=int, default=getattr(StatsConfig, name))
    ap.add_argument("--epsilon", type=Fraction, default=StatsConfig.epsilon)
    cfg = StatsConfig(**vars(ap.parse_args()))
    bound = (1 + cfg.epsilon) * Fraction(cfg.s, cfg.k)
    print(f"k={cfg.k} s={cfg.s} t={cfg.t} eps={cfg.epsilon}: pairwise bound {float(bound):.1f}")
    print(f"{'seed':>5} {'max pair':>9} {'mean':>8} {'3 sigma':>8} {'pair eps':>9} {'union eps':>10} {'ok':>3}")
    for seed in range(cfg.seeds):
        fam = generate_partition_family(cfg.k, cfg.s, cfg.t, cfg.epsilon, seed=seed)
        pair = verify_pairwise(fam)
        union = verify_union_bounds(fam, samples=cfg.samples, seed=seed)
        ok = pair.passed and union.passed and pair.mean_within_3sigma
        print(f"{seed:5d} {pair.max_intersection:9d} {pair.mean_cross:8.3f} {3 * pair.sigma_mean:8.3f} "
              f"{float(pair.effective_epsilon):9.4f} {float(union.effective_epsilon):10.4f} {'y' if ok else 'n':>3}")


if __name__ == "__main__":
    main()
