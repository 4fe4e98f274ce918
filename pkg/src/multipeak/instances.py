"""Auction and public-project instances, plus the closed-form YES values and NO bounds.

Normalized parameters: ``alpha = a*s`` and ``beta = b/s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .setsystems import (
    SHARED_FIRST,
    WellStructuredCollection,
    collection_epsilon,
    shared_epsilon,
    union_fraction,
)
from .valuation import MultiPeakValuation, as_fraction, closeness, positive_part
from . import serialize

WELFARE, MAXMIN, CPP = "welfare", "maxmin", "cpp"

Number = Union[Fraction, float]

TARGETS: dict[str, float] = {
    "1-1/(2e)": 1 - 1 / (2 * math.e),
    "17/18": 17 / 18,
    "3/4": 3 / 4,
    "7/8": 7 / 8,
    "1-1/e": 1 - 1 / math.e,
}
EXACT_TARGETS = {"17/18": Fraction(17, 18), "3/4": Fraction(3, 4), "7/8": Fraction(7, 8)}


class WitnessError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class AuctionInstance:
    m: int
    valuations: tuple[MultiPeakValuation, ...]
    objective: str = WELFARE
    cardinality: Optional[int] = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.objective not in (WELFARE, MAXMIN, CPP):
            raise ValueError(f"unknown objective {self.objective}")
        for v in self.valuations:
            if v.m != self.m:
                raise ValueError("all valuations must share the ground set")
        if self.objective == CPP:
            if self.cardinality is None or not 0 <= self.cardinality <= self.m:
                raise ValueError("CPP needs a cardinality between 0 and m")

    @property
    def k(self) -> int:
        return len(self.valuations)

    def welfare(self, allocation: Sequence[int]) -> Fraction:
        check_allocation(self, allocation)
        return sum((v.value(S) for v, S in zip(self.valuations, allocation)), Fraction(0))

    def min_value(self, allocation: Sequence[int]) -> Fraction:
        check_allocation(self, allocation)
        return min(v.value(S) for v, S in zip(self.valuations, allocation))

    def cpp_value(self, S: int) -> Fraction:
        if S.bit_count() != self.cardinality or S >> self.m:
            raise ValueError(f"set must have exactly {self.cardinality} items of the ground set")
        return sum((v.value(S) for v in self.valuations), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "objective": self.objective,
            "cardinality": self.cardinality,
            "valuations": [serialize.valuation_to_dict(v) for v in self.valuations],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuctionInstance":
        prov = dict(d.get("provenance") or {})
        for key in ("a", "b", "alpha", "beta", "epsilon"):
            if isinstance(prov.get(key), str):
                prov[key] = Fraction(prov[key])
        return cls(
            int(d["m"]),
            tuple(serialize.valuation_from_dict(v) for v in d["valuations"]),
            d.get("objective", WELFARE),
            d.get("cardinality"),
            prov,
        )


def check_allocation(inst: AuctionInstance, allocation: Sequence[int]) -> None:
    if len(allocation) != inst.k:
        raise ValueError(f"allocation has {len(allocation)} bundles for {inst.k} players")
    seen = 0
    for S in allocation:
        if S >> inst.m:
            raise ValueError("bundle contains items outside the ground set")
        if seen & S:
            raise ValueError("bundles are not pairwise disjoint")
        seen |= S


def _check_b(col: WellStructuredCollection, b: Fraction) -> None:
    best, wit = col.max_within_group_intersection()
    if best > b:
        g, x, y = wit
        raise WitnessError(
            f"b = {b} is below the intersection {best} of sets {x} and {y} in group {g}",
            witness={"group": g, "sets": [x, y], "intersection": best},
        )


def _provenance(col, a, b, eps, source) -> dict:
    return {
        "source": source,
        "mode": col.mode,
        "k": col.k,
        "s": col.s,
        "a": a,
        "b": b,
        "alpha": a * col.s,
        "beta": b / col.s,
        "epsilon": eps,
    }


def build_welfare_instance(col: WellStructuredCollection, a=None, b=None, style: str = "communication",
                           epsilon=None, objective: str = WELFARE) -> AuctionInstance:
    """Player i gets the multi-peak valuation with the sets of group i as peaks.

    ``style="communication"`` defaults to ``a = 1/(2s)``, ``b = (1+eps)s/k``;
    ``style="cover"`` to ``a = 1/(2s)``, ``b = eps*s`` with each player's
    valuation restricted to the union of its group.  ``epsilon`` defaults to
    the collection's empirical slack.
    """
    s, k = col.s, col.k
    eps = collection_epsilon(col) if epsilon is None else as_fraction(epsilon)
    a = Fraction(1, 2 * s) if a is None else as_fraction(a)
    if b is None:
        b = (1 + eps) * Fraction(s, k) if style == "communication" else eps * s
    b = as_fraction(b)
    if a <= 0 or b < 0:
        raise ValueError("a must be positive and b non-negative")
    _check_b(col, b)
    vals = []
    for grp in col.groups:
        support = None
        if style == "cover":
            support = 0
            for S in grp:
                support |= S
        vals.append(MultiPeakValuation(col.m, tuple(grp), a, b, support))
    return AuctionInstance(col.m, tuple(vals), objective, None,
                           _provenance(col, a, b, eps, f"{style}:{col.mode}"))


def build_maxmin_instance(col: WellStructuredCollection, a=None, b=None, **kw) -> AuctionInstance:
    return build_welfare_instance(col, a, b, objective=MAXMIN, **kw)


def build_cpp_instance(col: WellStructuredCollection, a=None, b=None, s: Optional[int] = None,
                       players: Optional[int] = None, epsilon=None) -> AuctionInstance:
    """Public-project instance choosing one set of exactly ``s`` items.

    ``players`` keeps only the first few groups (two for the 2-player variant).
    """
    if col.mode != SHARED_FIRST:
        raise ValueError("CPP instances are built from SHARED_FIRST collections")
    if players is not None:
        col = WellStructuredCollection(col.m, col.s, col.b, col.groups[:players],
                                       col.labels[:players] if col.labels else (), col.epsilon, col.mode)
    card = col.s if s is None else s
    if epsilon is None:
        epsilon = max(collection_epsilon(col), shared_epsilon(col))
    inst = build_welfare_instance(col, a, b, epsilon=epsilon)
    return AuctionInstance(inst.m, inst.valuations, CPP, card, inst.provenance)


# --- closed forms -----------------------------------------------------------

def yes_value_formula(k: int, s, a, b) -> Fraction:
    """Welfare when every player receives its own peak out of a disjoint cover."""
    a, b, s = as_fraction(a), as_fraction(b), as_fraction(s)
    return k * (1 - positive_part(1 - a * (2 * s - b)) * positive_part(1 - a * b))


def cpp_far_value(s, a) -> Fraction:
    a = as_fraction(a)
    return 1 - positive_part(1 - a * s) ** 2


def no_value_two_players(alpha, beta) -> Fraction:
    """Two-player NO optimum with the first player exactly saturated."""
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    x1 = (1 + alpha * beta) / (2 * alpha)
    return 2 - positive_part(1 - alpha * (2 - x1)) ** 2


@dataclass
class NoBound:
    value: Fraction
    k_star: int
    expanded: Optional[Fraction]
    per_k_star: list[Fraction]
    expanded_matches: bool
    notes: list[str] = field(default_factory=list)

    def __float__(self):
        return float(self.value)


def no_bound_formula(k: int, alpha, eps=Fraction(0)) -> NoBound:
    """Upper bound on NO-instance welfare, maximized over the number k* of close players.

    Uses the clamped form; the expanded polynomial form is reported for the
    maximizer and checked equal whenever ``alpha * y* <= 1``.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    alpha, eps = as_fraction(alpha), as_fraction(eps)
    notes = []
    values = []
    for ks in range(1, k + 1):
        cover = union_fraction(k, ks) + eps
        X = k * cover
        if X > k:
            notes.append(f"k*={ks}: x-mass cap {X} exceeds the budget, clamped to {k}")
            X = Fraction(k)
        val = 2 * alpha * X + 1
        if ks < k:
            y_star = (k - X) / (k - ks)
            val += (k - ks) * (1 - positive_part(1 - alpha * y_star) ** 2)
        values.append(val)
    best = max(range(k), key=lambda n: (values[n], -n))
    ks = best + 1
    expanded = None
    matches = True
    if ks < k:
        tail = (1 - Fraction(1, k)) ** ks - eps
        expanded = 2 * alpha * k + 1 - alpha**2 * k**2 / (k - ks) * tail**2
        y_star = k * tail / (k - ks)
        if alpha * y_star <= 1 and tail >= 0:
            matches = expanded == values[best]
            if not matches:
                notes.append("expanded and clamped forms disagree inside their common validity region")
        else:
            notes.append("expanded form outside its validity region (alpha*y* > 1)")
    return NoBound(values[best], ks, expanded, values, matches, notes)


@dataclass
class GapReport:
    yes_value: Number
    no_bound: Number
    ratio: Number
    target: str
    target_value: float
    deviation: Number
    effective_epsilon: Fraction = Fraction(0)
    parameters: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, Fraction):
                return {"exact": serialize.rat(x), "float": float(x)}
            return {"float": x, "precision": "double"}

        return {
            "yes_value": enc(self.yes_value),
            "no_bound": enc(self.no_bound),
            "ratio": enc(self.ratio),
            "target": self.target,
            "target_value": self.target_value,
            "deviation": enc(self.deviation),
            "effective_epsilon": serialize.rat(self.effective_epsilon),
            "parameters": {k: (serialize.rat(v) if isinstance(v, Fraction) else v)
                           for k, v in self.parameters.items()},
        }


def gap_ratio(yes: Number, no_bound: Number, target: Union[str, Number, None] = None,
              effective_epsilon=Fraction(0), parameters: Optional[dict] = None) -> GapReport:
    """NO/YES ratio and its distance from one of the named hardness constants.

    ``target`` is a name from :data:`TARGETS`, a number, or None for the
    nearest named constant.
    """
    if isinstance(yes, float) or isinstance(no_bound, float):
        ratio: Number = float(no_bound) / float(yes)
    else:
        ratio = Fraction(no_bound) / Fraction(yes)
    if target is None:
        name = min(TARGETS, key=lambda n: abs(TARGETS[n] - float(ratio)))
    elif isinstance(target, str):
        if target not in TARGETS:
            raise ValueError(f"unknown target {target}; choose from {sorted(TARGETS)}")
        name = target
    else:
        name = str(target)
    if name in EXACT_TARGETS and isinstance(ratio, Fraction):
        tv_exact: Number = EXACT_TARGETS[name]
    elif name in TARGETS:
        tv_exact = TARGETS[name]
    elif isinstance(target, Fraction) or isinstance(target, int):
        tv_exact = Fraction(target)
    else:
        tv_exact = float(target)
    if isinstance(ratio, Fraction) and isinstance(tv_exact, Fraction):
        dev: Number = ratio - tv_exact
    else:
        dev = float(ratio) - float(tv_exact)
    return GapReport(yes, no_bound, ratio, name, float(tv_exact), dev,
                     as_fraction(effective_epsilon), dict(parameters or {}))


# --- normalized profiles ----------------------------------------------------

@dataclass
class NormalizedProfile:
    x: list[Fraction]
    y: list[Fraction]
    alpha: Fraction
    beta: Fraction
    epsilon: Fraction
    closest: list[Optional[int]]
    violations: list[str] = field(default_factory=list)

    @property
    def k_star(self) -> int:
        """Number of players strictly inside their closest peak's region."""
        return sum(1 for x, y in zip(self.x, self.y) if x - self.beta > y)


def normalized_profile_from_allocation(inst: AuctionInstance, allocation: Sequence[int],
                                       epsilon=None) -> NormalizedProfile:
    """Per-player (x, y) = (|S & A|, |S - A|)/s against the closest peak A, sorted by x."""
    check_allocation(inst, allocation)
    prov = inst.provenance
    s = int(prov["s"])
    k = inst.k
    eps = as_fraction(prov.get("epsilon", 0) if epsilon is None else epsilon)
    rows = []
    for v, S in zip(inst.valuations, allocation):
        S &= v.domain
        best_idx = None
        best = None
        for idx, A in enumerate(v.peaks):
            c = closeness(S, A)
            if best is None or c > best:
                best, best_idx = c, idx
        if best_idx is None:
            rows.append((Fraction(0), Fraction(S.bit_count(), s), None))
        else:
            A = v.peaks[best_idx]
            rows.append((Fraction((S & A).bit_count(), s), Fraction((S & ~A).bit_count(), s), best_idx))
    order = sorted(range(k), key=lambda i: -rows[i][0])
    xs = [rows[i][0] for i in order]
    ys = [rows[i][1] for i in order]
    prof = NormalizedProfile(xs, ys, as_fraction(prov.get("alpha", 0)), as_fraction(prov.get("beta", 0)),
                             eps, [rows[i][2] for i in order])
    if sum(xs) + sum(ys) > k:
        prof.violations.append(f"total mass {sum(xs) + sum(ys)} exceeds {k}")
    run = Fraction(0)
    for ell, x in enumerate(xs, start=1):
        run += x
        cap = (union_fraction(k, ell) + eps) * k
        if run > cap:
            prof.violations.append(f"prefix {ell}: {run} > {cap}")
    return prof
