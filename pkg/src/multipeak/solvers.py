"""Exact and greedy solvers for welfare, max-min and public-project instances,
plus exact demand queries for a single multi-peak valuation.

Exact solvers enumerate over integer value tables (see
:func:`multipeak.valuation.common_tables`) and then re-evaluate the winning
witness through :meth:`MultiPeakValuation.value` before returning.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .instances import CPP, AuctionInstance, check_allocation
from .valuation import MultiPeakValuation, as_fraction, common_tables, members

DEFAULT_GUARD = 10**8
CHUNK = 1 << 18


class GuardExceeded(RuntimeError):
    pass


@dataclass
class SolveResult:
    solver: str
    value: Fraction
    witness: Union[tuple[int, ...], int]
    nodes: int
    seconds: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        w = self.witness
        return {
            "solver": self.solver,
            "value": f"{self.value.numerator}/{self.value.denominator}",
            "value_float": float(self.value),
            "witness": members(w) if isinstance(w, int) else [members(S) for S in w],
            "nodes": self.nodes,
            "seconds": self.seconds,
            **self.extra,
        }


def _assignment_masks(start: int, stop: int, k: int, m: int) -> list[np.ndarray]:
    """Per-player bundles for assignment vectors start..stop-1.

    Vector n lists the owner of each item with item 0 as the most significant
    base-k digit, so numeric order is lexicographic order.
    """
    n = np.arange(start, stop, dtype=np.int64)
    bundles = [np.zeros(n.size, dtype=np.int64) for _ in range(k)]
    for item in range(m - 1, -1, -1):
        digit = n % k
        n //= k
        for i in range(k):
            bundles[i] |= (digit == i).astype(np.int64) << item
    return bundles


def _assignment_to_bundles(n: int, k: int, m: int) -> tuple[int, ...]:
    out = [0] * k
    for item in range(m - 1, -1, -1):
        out[n % k] |= 1 << item
        n //= k
    return tuple(out)


def _brute_assign(inst: AuctionInstance, guard: int, combine: str) -> tuple[int, Fraction, int]:
    k, m = inst.k, inst.m
    total = k**m
    if total > guard:
        raise GuardExceeded(f"{k}**{m} = {total} assignments exceed the guard {guard}")
    tables, D = common_tables(inst.valuations)
    best_val, best_n = None, 0
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        bundles = _assignment_masks(start, stop, k, m)
        vals = [T[B] for T, B in zip(tables, bundles)]
        agg = sum(vals[1:], vals[0]) if combine == "sum" else np.minimum.reduce(vals)
        idx = int(np.argmax(agg))
        if best_val is None or agg[idx] > best_val:
            best_val, best_n = agg[idx], start + idx
    return best_n, Fraction(int(best_val), D), total


def brute_force_welfare(inst: AuctionInstance, guard: int = DEFAULT_GUARD) -> SolveResult:
    """Exact welfare optimum over all item-to-player assignments."""
    t0 = time.perf_counter()
    n, val, nodes = _brute_assign(inst, guard, "sum")
    alloc = _assignment_to_bundles(n, inst.k, inst.m)
    check = inst.welfare(alloc)
    if check != val:
        raise AssertionError(f"witness re-evaluates to {check}, enumeration said {val}")
    return SolveResult("brute_force_welfare", val, alloc, nodes, time.perf_counter() - t0)


def brute_force_maxmin(inst: AuctionInstance, guard: int = DEFAULT_GUARD) -> SolveResult:
    """Exact max-min optimum over all item-to-player assignments."""
    t0 = time.perf_counter()
    n, val, nodes = _brute_assign(inst, guard, "min")
    alloc = _assignment_to_bundles(n, inst.k, inst.m)
    check = inst.min_value(alloc)
    if check != val:
        raise AssertionError(f"witness re-evaluates to {check}, enumeration said {val}")
    return SolveResult("brute_force_maxmin", val, alloc, nodes, time.perf_counter() - t0)


def brute_force_cpp(inst: AuctionInstance, guard: int = DEFAULT_GUARD) -> SolveResult:
    """Exact best set of exactly ``cardinality`` items; ties go to the lexicographically least."""
    if inst.objective != CPP:
        raise ValueError("instance has no cardinality constraint")
    t0 = time.perf_counter()
    m, s = inst.m, inst.cardinality
    total = math.comb(m, s)
    if total > guard:
        raise GuardExceeded(f"C({m},{s}) = {total} candidate sets exceed the guard {guard}")
    tables, D = common_tables(inst.valuations)
    summed = sum(tables[1:], tables[0]) if tables else np.zeros(1 << m, dtype=np.int64)
    best_val, best_S = None, 0
    combos = itertools.combinations(range(m), s)
    while True:
        chunk = list(itertools.islice(combos, CHUNK))
        if not chunk:
            break
        if s == 0:
            sets = np.zeros(len(chunk), dtype=np.int64)
        else:
            sets = np.sum(np.left_shift(1, np.array(chunk, dtype=np.int64)), axis=1)
        vals = summed[sets]
        idx = int(np.argmax(vals))
        if best_val is None or vals[idx] > best_val:
            best_val, best_S = vals[idx], int(sets[idx])
    val = Fraction(int(best_val), D)
    if inst.cpp_value(best_S) != val:
        raise AssertionError("CPP witness re-evaluation mismatch")
    return SolveResult("brute_force_cpp", val, best_S, total, time.perf_counter() - t0)


def greedy_welfare(inst: AuctionInstance) -> SolveResult:
    """Items in index order, each to the player with the largest marginal value."""
    t0 = time.perf_counter()
    bundles = [0] * inst.k
    nodes = 0
    for item in range(inst.m):
        best_i, best_gain = 0, None
        for i, v in enumerate(inst.valuations):
            gain = v.marginal(bundles[i], item)
            nodes += 1
            if best_gain is None or gain > best_gain:
                best_i, best_gain = i, gain
        bundles[best_i] |= 1 << item
    alloc = tuple(bundles)
    check_allocation(inst, alloc)
    return SolveResult("greedy_welfare", inst.welfare(alloc), alloc, nodes, time.perf_counter() - t0)


def greedy_cpp(inst: AuctionInstance) -> SolveResult:
    """Cardinality-constrained greedy on the summed valuation."""
    if inst.objective != CPP:
        raise ValueError("instance has no cardinality constraint")
    t0 = time.perf_counter()
    S, nodes = 0, 0
    for _ in range(inst.cardinality):
        best_item, best_gain = None, None
        for item in range(inst.m):
            if S >> item & 1:
                continue
            gain = sum(v.marginal(S, item) for v in inst.valuations)
            nodes += 1
            if best_gain is None or gain > best_gain:
                best_item, best_gain = item, gain
        S |= 1 << best_item
    return SolveResult("greedy_cpp", inst.cpp_value(S), S, nodes, time.perf_counter() - t0)


# --- demand queries ---------------------------------------------------------

def _prices(v: MultiPeakValuation, prices: Sequence) -> list[Fraction]:
    p = [as_fraction(x) for x in prices]
    if len(p) != v.m:
        raise ValueError(f"expected {v.m} prices, got {len(p)}")
    if any(x < 0 for x in p):
        raise ValueError("prices must be non-negative")
    return p


def _demand_key(util: Fraction, S: int):
    # larger utility, then fewer items, then lexicographically least member list
    return (-util, S.bit_count(), members(S))


def demand_query(v: MultiPeakValuation, prices: Sequence) -> tuple[int, Fraction]:
    """Exact utility-maximizing bundle in polynomial time.

    Candidates: for every peak and every (inside, outside) count pair in the
    peak's region, the cheapest items inside plus the cheapest outside; and
    the cheapest ``n`` items overall for every ``n``.
    """
    p = _prices(v, prices)
    dom = members(v.domain)
    order = sorted(dom, key=lambda i: (p[i], i))

    best_S, best_u = 0, Fraction(0)
    prefix_S, prefix_p = 0, Fraction(0)
    for n in range(len(order) + 1):
        if n:
            prefix_S |= 1 << order[n - 1]
            prefix_p += p[order[n - 1]]
        u = v.value(prefix_S) - prefix_p
        if _demand_key(u, prefix_S) < _demand_key(best_u, best_S):
            best_S, best_u = prefix_S, u

    for A in v.peaks:
        inside = [i for i in order if A >> i & 1]
        outside = [i for i in order if not A >> i & 1]
        in_S, in_cost = [0], [Fraction(0)]
        for i in inside:
            in_S.append(in_S[-1] | 1 << i)
            in_cost.append(in_cost[-1] + p[i])
        out_S, out_cost = [0], [Fraction(0)]
        for i in outside:
            out_S.append(out_S[-1] | 1 << i)
            out_cost.append(out_cost[-1] + p[i])
        for x in range(len(inside) + 1):
            for y in range(len(outside) + 1):
                if x - y <= v.b:
                    break
                S = in_S[x] | out_S[y]
                u = v.peak_formula(x, y) - in_cost[x] - out_cost[y]
                if _demand_key(u, S) < _demand_key(best_u, best_S):
                    best_S, best_u = S, u
    return best_S, best_u


def brute_force_demand(v: MultiPeakValuation, prices: Sequence) -> tuple[int, Fraction]:
    """Exhaustive demand query over all 2**m bundles (exact)."""
    p = _prices(v, prices)
    tables, D = common_tables([v])
    T = tables[0]
    Q = math.lcm(*(x.denominator for x in p))
    ip = [int(x * Q) for x in p]
    m = v.m
    cost = np.zeros(1 << m, dtype=object if max(ip, default=0) * m * D > 2**60 else np.int64)
    for i in range(m):
        cost[1 << i: 1 << (i + 1)] = cost[: 1 << i] + ip[i]
    util = T.astype(cost.dtype) * Q - cost * D
    top = util.max()
    cands = np.flatnonzero(util == top)
    S = min((int(c) for c in cands), key=lambda c: (c.bit_count(), members(c)))
    return S, Fraction(int(top), D * Q)

