"""Randomized partition families, disjointness-driven collections, cover systems.

Items are laid out as ``s`` consecutive k-tuples: tuple ``r`` holds items
``r*k .. r*k + k - 1``.  Partition ``j`` sends the items of each tuple to
the ``k`` blocks through an independent uniformly random bijection.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .valuation import as_fraction, mask, members

YES, NO, UNKNOWN = "YES", "NO", "UNKNOWN"
PER_PLAYER, SHARED_FIRST = "PER_PLAYER", "SHARED_FIRST"

EXHAUSTIVE_TUPLES = 10**6


def union_fraction(k: int, ell: int) -> Fraction:
    """Expected covered fraction ``1 - (1 - 1/k)**ell`` of ell random blocks."""
    return 1 - (1 - Fraction(1, k)) ** ell


def _tuple_rng(seed: int, j: int, r: int) -> np.random.Generator:
    # Counter-based stream keyed by the seed; (j, r) sit in the high counter
    # words so draws for one tuple never reach another tuple's counter range.
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, r, j]))


@dataclass(frozen=True)
class PartitionFamily:
    k: int
    s: int
    t: int
    seed: int
    epsilon: Fraction
    blocks: tuple[tuple[int, ...], ...]  # blocks[j][i]

    @property
    def m(self) -> int:
        return self.k * self.s

    def block(self, j: int, i: int) -> int:
        return self.blocks[j][i]

    def incidence(self) -> np.ndarray:
        """Boolean (t*k, m) matrix; row ``j*k + i`` is block (j, i)."""
        out = np.zeros((self.t * self.k, self.m), dtype=bool)
        for j, part in enumerate(self.blocks):
            for i, B in enumerate(part):
                out[j * self.k + i, members(B)] = True
        return out

    def structure_violations(self) -> list[str]:
        """Partition and block-size defects; empty for every generated family."""
        full = (1 << self.m) - 1
        out = []
        for j, part in enumerate(self.blocks):
            if len(part) != self.k:
                out.append(f"partition {j} has {len(part)} blocks, expected {self.k}")
            union = 0
            for i, B in enumerate(part):
                if B.bit_count() != self.s:
                    out.append(f"block ({j},{i}) has size {B.bit_count()}, expected {self.s}")
                if union & B:
                    out.append(f"block ({j},{i}) overlaps an earlier block of partition {j}")
                union |= B
            if union != full:
                out.append(f"partition {j} does not cover the ground set")
        return out


def generate_partition_family(k: int, s: int, t: int, epsilon=Fraction(1, 2), seed: int = 0) -> PartitionFamily:
    if k < 2 or s < 1 or t < 0:
        raise ValueError("need k >= 2, s >= 1, t >= 0")
    blocks = []
    for j in range(t):
        part = [0] * k
        for r in range(s):
            perm = _tuple_rng(seed, j, r).permutation(k)
            for pos in range(k):
                part[int(perm[pos])] |= 1 << (r * k + pos)
        blocks.append(tuple(part))
    return PartitionFamily(k, s, t, seed, as_fraction(epsilon), tuple(blocks))


@dataclass
class PairwiseReport:
    max_intersection: int
    bound: Fraction
    passed: bool
    effective_epsilon: Fraction
    mean_cross: float
    expected_cross: Fraction
    sigma_pair: float
    sigma_mean: float
    mean_within_3sigma: bool
    pairs: int
    witness: Optional[tuple] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_pairwise(fam: PartitionFamily, epsilon=None) -> PairwiseReport:
    """Largest intersection over all pairs of distinct blocks.

    The mean is taken over pairs from different partitions, where each
    block pair is an independent draw with expected overlap s/k.
    """
    eps = fam.epsilon if epsilon is None else as_fraction(epsilon)
    k, s, t = fam.k, fam.s, fam.t
    bound = (1 + eps) * Fraction(s, k)
    if t == 0:
        return PairwiseReport(0, bound, True, Fraction(0), float("nan"), Fraction(s, k),
                              0.0, 0.0, True, 0)
    X = fam.incidence().astype(np.int64)
    G = X @ X.T
    n = G.shape[0]
    part = np.arange(n) // k
    off = ~np.eye(n, dtype=bool)
    upper = np.triu(off, 1)
    vals = np.where(upper, G, -1)
    flat = int(np.argmax(vals))
    r, c = divmod(flat, n)
    max_int = int(vals[r, c]) if n > 1 else 0
    cross = upper & (part[:, None] != part[None, :])
    cross_vals = G[cross]
    p = 1.0 / k
    sigma_pair = math.sqrt(s * p * (1 - p))
    mean = float(cross_vals.mean()) if cross_vals.size else float("nan")
    sigma_mean = sigma_pair / math.sqrt(cross_vals.size) if cross_vals.size else float("inf")
    within = bool(cross_vals.size == 0 or abs(mean - s / k) <= 3 * sigma_mean)
    eff = max(Fraction(0), Fraction(max_int * k, s) - 1)
    return PairwiseReport(
        max_int, bound, max_int <= bound, eff, mean, Fraction(s, k), sigma_pair, sigma_mean,
        within, int(upper.sum()),
        witness=((int(r // k), int(r % k)), (int(c // k), int(c % k))) if n > 1 else None,
    )


@dataclass
class UnionLevel:
    ell: int
    bound: Fraction
    max_union: int
    tuples: int
    exhaustive: bool
    effective_epsilon: Fraction
    passed: bool
    same_partition_union: int
    same_partition_epsilon: Fraction


@dataclass
class UnionReport:
    epsilon: Fraction
    levels: list[UnionLevel]

    @property
    def passed(self) -> bool:
        return all(lv.passed for lv in self.levels)

    @property
    def effective_epsilon(self) -> Fraction:
        return max((lv.effective_epsilon for lv in self.levels), default=Fraction(0))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "passed": self.passed,
            "effective_epsilon": self.effective_epsilon,
            "levels": [dict(lv.__dict__) for lv in self.levels],
        }


def _mixed_tuples(k: int, t: int, ell: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    for ii in itertools.combinations(range(k), ell):
        for jj in itertools.permutations(range(t), ell):
            yield ii, jj


def verify_union_bounds(fam: PartitionFamily, ell_max: Optional[int] = None, samples: int = 100_000,
                        epsilon=None, seed: int = 0) -> UnionReport:
    """Union sizes of ell blocks with distinct player indices and distinct partitions.

    Tuples drawn from one partition are disjoint, so their union is exactly
    ell*s; that case is reported separately as the known worst case rather
    than counted against the bound.
    """
    eps = fam.epsilon if epsilon is None else as_fraction(epsilon)
    k, s, t, m = fam.k, fam.s, fam.t, fam.m
    ell_max = k if ell_max is None else ell_max
    if ell_max > k:
        raise ValueError("ell_max cannot exceed k")
    X = fam.incidence()
    rng = np.random.default_rng(seed)
    levels = []
    for ell in range(1, ell_max + 1):
        frac = union_fraction(k, ell)
        bound = (frac + eps) * m
        same = ell * s
        same_eps = max(Fraction(0), Fraction(same, m) - frac)
        if t < ell:
            levels.append(UnionLevel(ell, bound, 0, 0, True, Fraction(0), True, same, same_eps))
            continue
        total = math.comb(k, ell) * math.perm(t, ell)
        exhaustive = total <= EXHAUSTIVE_TUPLES
        best = 0
        if exhaustive:
            it = _mixed_tuples(k, t, ell)
            while True:
                chunk = list(itertools.islice(it, 20000))
                if not chunk:
                    break
                rows = np.array([[j * k + i for i, j in zip(ii, jj)] for ii, jj in chunk])
                best = max(best, int(X[rows].any(axis=1).sum(axis=1).max()))
            count = total
        else:
            count = samples
            for start in range(0, samples, 20000):
                n = min(20000, samples - start)
                ii = np.argsort(rng.random((n, k)), axis=1)[:, :ell]
                jj = np.argsort(rng.random((n, t)), axis=1)[:, :ell]
                rows = jj * k + ii
                best = max(best, int(X[rows].any(axis=1).sum(axis=1).max()))
        eff = max(Fraction(0), Fraction(best, m) - frac)
        levels.append(UnionLevel(ell, bound, best, count, exhaustive, eff, best <= bound, same, same_eps))
    return UnionReport(eps, levels)


# --- disjointness instances and collections --------------------------------

@dataclass(frozen=True)
class DisjointnessInstance:
    bits: tuple[tuple[int, ...], ...]  # bits[i][j]: player i, column j
    case: str = UNKNOWN

    @property
    def k(self) -> int:
        return len(self.bits)

    @property
    def t(self) -> int:
        return len(self.bits[0]) if self.bits else 0

    def all_ones_columns(self) -> list[int]:
        return [j for j in range(self.t) if all(row[j] for row in self.bits)]

    def max_column_sum(self) -> int:
        return max((sum(row[j] for row in self.bits) for j in range(self.t)), default=0)

    def consistent(self) -> bool:
        if self.case == YES:
            return bool(self.all_ones_columns())
        if self.case == NO:
            return self.max_column_sum() <= 1
        return True


def make_disjointness(k: int, t: int, case: str, seed: int = 0, density: float = 0.5,
                      ones_per_player: Optional[int] = None) -> DisjointnessInstance:
    """Random YES or NO instance.

    With ``ones_per_player`` every player gets exactly that many ones, which
    keeps the derived groups equally sized.
    """
    case = case.upper()
    if case not in (YES, NO):
        raise ValueError(f"case must be YES or NO, got {case}")
    if k < 1 or t < (1 if case == YES else 0):
        raise ValueError("need k >= 1 and t >= 1 for a YES instance")
    rng = np.random.default_rng(seed)
    bits = np.zeros((k, t), dtype=np.int64)
    if case == YES:
        shared = int(rng.integers(t))
        bits[:, shared] = 1
        if ones_per_player is None:
            bits |= (rng.random((k, t)) < density).astype(np.int64)
        else:
            others = [j for j in range(t) if j != shared]
            if ones_per_player - 1 > len(others):
                raise ValueError("not enough columns for the requested ones per player")
            for i in range(k):
                bits[i, rng.choice(others, ones_per_player - 1, replace=False)] = 1
    else:
        if ones_per_player is None:
            for j in range(t):
                if rng.random() < density:
                    bits[int(rng.integers(k)), j] = 1
        else:
            if k * ones_per_player > t:
                raise ValueError("not enough columns for the requested ones per player")
            cols = rng.permutation(t)[: k * ones_per_player]
            for i in range(k):
                bits[i, cols[i * ones_per_player:(i + 1) * ones_per_player]] = 1
    return DisjointnessInstance(tuple(tuple(int(x) for x in row) for row in bits), case)


@dataclass(frozen=True)
class WellStructuredCollection:
    """Groups of equal-size sets, one group per player.

    ``labels[i][n]`` records which (partition, block) produced set ``n`` of
    group ``i``; it is empty for ingested cover systems.
    """

    m: int
    s: int
    b: Fraction
    groups: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[tuple[int, int], ...], ...] = ()
    epsilon: Fraction = Fraction(0)
    mode: str = PER_PLAYER

    @property
    def k(self) -> int:
        return len(self.groups)

    def max_within_group_intersection(self) -> tuple[int, Optional[tuple]]:
        best, wit = 0, None
        for gi, grp in enumerate(self.groups):
            for x, y in itertools.combinations(range(len(grp)), 2):
                c = (grp[x] & grp[y]).bit_count()
                if c > best:
                    best, wit = c, (gi, x, y)
        return best, wit

    def violations(self) -> list[str]:
        """Unmet well-structuredness conditions, as readable strings."""
        out = []
        if self.m != self.k * self.s:
            out.append(f"universe has {self.m} items, expected k*s = {self.k * self.s}")
        for gi, grp in enumerate(self.groups):
            for n, S in enumerate(grp):
                if S.bit_count() != self.s:
                    out.append(f"set {n} of group {gi} has size {S.bit_count()}, expected {self.s}")
        sizes = {len(g) for g in self.groups}
        if len(sizes) > 1:
            out.append(f"group sizes differ: {[len(g) for g in self.groups]}")
        best, wit = self.max_within_group_intersection()
        if best > self.b:
            out.append(f"sets {wit[1]} and {wit[2]} of group {wit[0]} intersect in {best} > b = {self.b}")
        return out

    def cross_group_epsilon(self, max_tuples: int = EXHAUSTIVE_TUPLES) -> Fraction:
        """Empirical union slack over tuples with distinct groups and distinct partitions.

        These are the tuples that can be chosen together in a NO instance.
        Without labels every tuple of distinct groups is used.
        """
        k, m = self.k, self.m
        worst = Fraction(0)
        for ell in range(1, k + 1):
            frac = union_fraction(k, ell)
            count = 0
            for gsel in itertools.combinations(range(k), ell):
                for pick in itertools.product(*(range(len(self.groups[g])) for g in gsel)):
                    if self.labels:
                        js = [self.labels[g][n][0] for g, n in zip(gsel, pick)]
                        if len(set(js)) < len(js):
                            continue
                    U = 0
                    for g, n in zip(gsel, pick):
                        U |= self.groups[g][n]
                    worst = max(worst, Fraction(U.bit_count(), m) - frac)
                    count += 1
                    if count > max_tuples:
                        break
        return worst


def collection_epsilon(col: WellStructuredCollection) -> Fraction:
    """Smallest epsilon making the collection's pairwise and union bounds hold."""
    best, _ = col.max_within_group_intersection()
    pair = max(Fraction(0), Fraction(best * col.k, col.s) - 1)
    return max(pair, col.cross_group_epsilon())


def shared_epsilon(col: WellStructuredCollection) -> Fraction:
    """Pairwise slack over the sets of all groups together.

    Public-project instances need every pair of distinct peaks, across
    players, to intersect in at most b items.
    """
    flat = sorted({S for grp in col.groups for S in grp})
    best = max(((A & B).bit_count() for A, B in itertools.combinations(flat, 2)), default=0)
    return max(Fraction(0), Fraction(best * col.k, col.s) - 1)


def collection_from_disjointness(fam: PartitionFamily, inst: DisjointnessInstance,
                                 mode: str = PER_PLAYER, epsilon=None) -> WellStructuredCollection:
    """Group i receives block (j, i) (or (j, 0) when shared) whenever player i holds a 1 in column j.

    Identical sets landing in one group are kept once.
    """
    if inst.t != fam.t:
        raise ValueError(f"instance has {inst.t} columns but the family has {fam.t} partitions")
    if inst.k > fam.k:
        raise ValueError(f"instance has {inst.k} players but the family only {fam.k} blocks per partition")
    if mode not in (PER_PLAYER, SHARED_FIRST):
        raise ValueError(f"unknown mode {mode}")
    eps = fam.epsilon if epsilon is None else as_fraction(epsilon)
    groups, labels = [], []
    for i, row in enumerate(inst.bits):
        grp, lab = [], []
        for j, bit in enumerate(row):
            if not bit:
                continue
            blk = 0 if mode == SHARED_FIRST else i
            B = fam.blocks[j][blk]
            if B not in grp:
                grp.append(B)
                lab.append((j, blk))
        groups.append(tuple(grp))
        labels.append(tuple(lab))
    return WellStructuredCollection(
        m=fam.m, s=fam.s, b=(1 + eps) * Fraction(fam.s, fam.k), groups=tuple(groups),
        labels=tuple(labels), epsilon=eps, mode=mode,
    )


# --- cover systems ----------------------------------------------------------

@dataclass(frozen=True)
class CoverSystem:
    universe: int
    groups: tuple[tuple[int, ...], ...]
    s: int
    g: int
    d: Optional[int] = None
    epsilon: Fraction = Fraction(0)

    @property
    def k(self) -> int:
        return len(self.groups)

    def to_collection(self) -> WellStructuredCollection:
        return WellStructuredCollection(
            m=self.universe, s=self.s, b=self.epsilon * self.s, groups=self.groups,
            epsilon=self.epsilon, mode=PER_PLAYER,
        )


def ingest_cover_system(doc: dict) -> CoverSystem:
    """Parse a cover-system JSON document.

    Required keys: ``universe`` (int) and ``groups`` (list of lists of index
    arrays).  ``s``, ``g`` and ``d`` default to the first set's size, the first
    group's length and the first element's degree; ``epsilon`` is a
    ``"p/q"`` string and defaults to 0.
    """
    try:
        n = int(doc["universe"])
        raw = doc["groups"]
        groups = []
        for grp in raw:
            sets = []
            for S in grp:
                items = [int(x) for x in S]
                if any(x < 0 or x >= n for x in items):
                    raise ValueError(f"set {items} has items outside the universe of size {n}")
                sets.append(mask(items))
            groups.append(tuple(sets))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed cover-system document: {exc!r}") from exc
    if not groups or not any(groups):
        raise ValueError("cover system has no sets")
    first = next(S for grp in groups for S in grp)
    s = int(doc.get("s", first.bit_count()))
    g = int(doc.get("g", len(groups[0])))
    d = doc.get("d")
    eps = Fraction(doc.get("epsilon", "0"))
    return CoverSystem(n, tuple(groups), s, g, None if d is None else int(d), eps)


@dataclass
class CoverValidation:
    violations: list[str] = field(default_factory=list)
    yes_witness: Optional[list[list[int]]] = None
    witness_search: str = "skipped"

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": self.violations,
                "yes_witness": self.yes_witness, "witness_search": self.witness_search}


def validate_cover_system(cs: CoverSystem, witness_limit: int = 10**6) -> CoverValidation:
    rep = CoverValidation()
    for gi, grp in enumerate(cs.groups):
        if len(grp) != cs.g:
            rep.violations.append(f"group {gi} has {len(grp)} sets, expected {cs.g}")
        for n, S in enumerate(grp):
            if S.bit_count() != cs.s:
                rep.violations.append(f"set {n} of group {gi} {members(S)} has size {S.bit_count()}, expected {cs.s}")
    degree = [0] * cs.universe
    for grp in cs.groups:
        for S in grp:
            for x in members(S):
                degree[x] += 1
    d = cs.d if cs.d is not None else degree[0]
    bad = [x for x, c in enumerate(degree) if c != d]
    if bad:
        rep.violations.append(f"elements {bad[:10]} do not lie in exactly {d} sets")
    cap = cs.epsilon * cs.s
    flat = [(gi, n, S) for gi, grp in enumerate(cs.groups) for n, S in enumerate(grp)]
    for (g1, n1, S1), (g2, n2, S2) in itertools.combinations(flat, 2):
        if S1 == S2:
            continue
        c = (S1 & S2).bit_count()
        if c > cap:
            rep.violations.append(
                f"sets {n1} of group {g1} and {n2} of group {g2} intersect in {c} > epsilon*s = {cap}"
            )
            break
    combos = math.prod(len(grp) for grp in cs.groups)
    if combos > witness_limit:
        rep.witness_search = f"skipped: {combos} combinations exceed {witness_limit}"
        return rep
    full = (1 << cs.universe) - 1
    rep.witness_search = "exhaustive: no witness"
    for pick in itertools.product(*cs.groups):
        U, ok = 0, True
        for S in pick:
            if U & S:
                ok = False
                break
            U |= S
        if ok and U == full:
            rep.yes_witness = [members(S) for S in pick]
            rep.witness_search = "exhaustive: witness found"
            break
    return rep


def family_to_dict(fam: PartitionFamily) -> dict:
    return {
        "metadata": {"k": fam.k, "s": fam.s, "t": fam.t, "seed": fam.seed, "epsilon": fam.epsilon},
        "partitions": [[members(B) for B in part] for part in fam.blocks],
    }


def family_from_dict(doc: dict) -> PartitionFamily:
    meta = doc["metadata"]
    blocks = tuple(tuple(mask(B) for B in part) for part in doc["partitions"])
    return PartitionFamily(int(meta["k"]), int(meta["s"]), int(meta["t"]), int(meta["seed"]),
                           Fraction(meta["epsilon"]), blocks)


def cover_to_dict(cs: CoverSystem) -> dict:
    return {
        "universe": cs.universe, "s": cs.s, "g": cs.g, "d": cs.d, "epsilon": cs.epsilon,
        "groups": [[members(S) for S in grp] for grp in cs.groups],
    }


def disjointness_to_dict(inst: DisjointnessInstance) -> dict:
    return {"case": inst.case, "k": inst.k, "t": inst.t, "bits": [list(r) for r in inst.bits]}


def disjointness_from_dict(doc: dict) -> DisjointnessInstance:
    return DisjointnessInstance(tuple(tuple(int(x) for x in r) for r in doc["bits"]),
                                doc.get("case", UNKNOWN))
