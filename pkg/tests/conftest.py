from fractions import Fraction

import pytest

from multipeak.instances import build_maxmin_instance, build_welfare_instance
from multipeak.setsystems import (
    NO,
    PER_PLAYER,
    YES,
    collection_epsilon,
    collection_from_disjointness,
    generate_partition_family,
    make_disjointness,
)
from multipeak.valuation import make_valuation

# (s, seed) pairs for k=2, t=6, two ones per player; chosen so the realized
# slack stays small enough for the two-player closed form to be the optimum.
PIPELINE_SEEDS = [(4, 26), (5, 30), (6, 30), (6, 11)]


def two_player_pipeline(s: int, seed: int, case: str, objective: str = "welfare"):
    """Family -> disjointness -> collection -> instance at alpha=2/3, beta=1/2+2*eps."""
    fam = generate_partition_family(2, s, 6, seed=seed)
    dis = make_disjointness(2, 6, case, seed=seed, ones_per_player=2)
    col = collection_from_disjointness(fam, dis, PER_PLAYER)
    eps = collection_epsilon(col)
    a = Fraction(2, 3) / s
    b = (Fraction(1, 2) + 2 * eps) * s
    build = build_maxmin_instance if objective == "maxmin" else build_welfare_instance
    return build(col, a, b, epsilon=eps), eps


@pytest.fixture
def toy():
    """m=8 with one peak {0,1,2,3}, a=1/8, b=1."""
    return make_valuation(8, [[0, 1, 2, 3]], Fraction(1, 8), 1)


@pytest.fixture
def two_peaks():
    return make_valuation(8, [[0, 1, 2, 3], [4, 5, 6, 7]], Fraction(1, 8), 1)


@pytest.fixture(params=[YES, NO])
def case(request):
    return request.param
