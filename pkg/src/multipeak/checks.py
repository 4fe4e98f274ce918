"""Exhaustive and sampled verification of valuation properties.

Every check accepts either a :class:`MultiPeakValuation` (fast path through
the exact integer value table) or any callable ``mask -> Fraction`` together
with the ground-set size, which is how deliberately broken mutants are fed
through the same machinery.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .continuous import base_formula, peak_formula, indicator
from .valuation import FamilyIntegrityError, MultiPeakValuation, members, value_table

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_M = 14

SetFunction = Union[MultiPeakValuation, Callable[[int], Fraction]]


@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int
    exhaustive: bool
    witness: Optional[dict] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "exhaustive": self.exhaustive,
            "witness": self.witness,
            "notes": self.notes,
        }


def _table(f: SetFunction, m: int) -> np.ndarray:
    if isinstance(f, MultiPeakValuation):
        T, _ = value_table(f)
        return T
    return np.array([f(S) for S in range(1 << m)], dtype=object)


def _ground_size(f: SetFunction, m: Optional[int]) -> int:
    if isinstance(f, MultiPeakValuation):
        return f.m
    if m is None:
        raise ValueError("ground-set size is required for a plain set function")
    return m


def _evaluator(f: SetFunction) -> Callable[[int], Fraction]:
    return f.value if isinstance(f, MultiPeakValuation) else f


def _without(m: int, bits: int) -> np.ndarray:
    S = np.arange(1 << m, dtype=np.int64)
    return S[(S & bits) == 0]


def check_monotone(f: SetFunction, m: Optional[int] = None, samples: int = 20000, seed: int = 0) -> CheckReport:
    """f(S) <= f(S + i) for every S and i not in S."""
    m = _ground_size(f, m)
    if m <= EXHAUSTIVE_MAX_M:
        T = _table(f, m)
        checked = 0
        for i in range(m):
            S = _without(m, 1 << i)
            bad = np.flatnonzero(T[S | (1 << i)] < T[S])
            checked += S.size
            if bad.size:
                s0 = int(S[bad[0]])
                return CheckReport("monotone", False, checked, True, {"S": members(s0), "i": i})
        return CheckReport("monotone", True, checked, True)

    rng = np.random.default_rng(seed)
    ev = _evaluator(f)
    for n in range(samples):
        S = int(rng.integers(0, 2, m) @ (1 << np.arange(m, dtype=object)))
        free = [i for i in range(m) if not S >> i & 1]
        if not free:
            continue
        i = int(rng.choice(free))
        if ev(S | (1 << i)) < ev(S):
            return CheckReport("monotone", False, n + 1, False, {"S": members(S), "i": i})
    return CheckReport("monotone", True, samples, False)


def check_submodular(f: SetFunction, m: Optional[int] = None, samples: int = 20000, seed: int = 0) -> CheckReport:
    """f(S+i+j) - f(S+j) <= f(S+i) - f(S) for all S and distinct i, j outside S."""
    m = _ground_size(f, m)
    if m <= EXHAUSTIVE_MAX_M:
        T = _table(f, m)
        checked = 0
        for i in range(m):
            for j in range(i + 1, m):
                bi, bj = 1 << i, 1 << j
                S = _without(m, bi | bj)
                lhs = T[S | bi | bj] - T[S | bj]
                rhs = T[S | bi] - T[S]
                bad = np.flatnonzero(lhs > rhs)
                checked += S.size
                if bad.size:
                    s0 = int(S[bad[0]])
                    return CheckReport(
                        "submodular", False, checked, True, {"S": members(s0), "i": i, "j": j}
                    )
        return CheckReport("submodular", True, checked, True)

    rng = np.random.default_rng(seed)
    ev = _evaluator(f)
    weights = 1 << np.arange(m, dtype=object)
    for n in range(samples):
        S = int(rng.integers(0, 2, m) @ weights)
        free = [i for i in range(m) if not S >> i & 1]
        if len(free) < 2:
            continue
        i, j = (int(x) for x in rng.choice(free, 2, replace=False))
        bi, bj = 1 << i, 1 << j
        if ev(S | bi | bj) - ev(S | bj) > ev(S | bi) - ev(S):
            return CheckReport("submodular", False, n + 1, False, {"S": members(S), "i": i, "j": j})
    return CheckReport("submodular", True, samples, False)


def check_uniqueness(v: MultiPeakValuation, samples: int = 2000, seed: int = 0) -> CheckReport:
    """No set, and no sampled fractional point, is b-close to two peaks."""
    notes = []
    checked = 0
    exhaustive = v.m <= EXHAUSTIVE_MAX_M
    try:
        if exhaustive:
            value_table(v)
            checked += 1 << v.m
        else:
            rng = np.random.default_rng(seed)
            weights = 1 << np.arange(v.m, dtype=object)
            for _ in range(samples):
                v.close_peak_index(int(rng.integers(0, 2, v.m) @ weights))
            checked += samples
    except FamilyIntegrityError as exc:
        S, p, q = exc.witness
        return CheckReport("uniqueness", False, checked, exhaustive, {"S": members(S), "peaks": [p, q]})

    # Fractional points: start near a peak indicator so the regions are actually hit.
    rng = np.random.default_rng(seed + 1)
    b = float(v.b)
    inds = [indicator(A, v.m) for A in v.peaks]
    signs = [np.where(ind > 0, 1.0, -1.0) * indicator(v.domain, v.m) for ind in inds]
    for n in range(samples if v.peaks else 0):
        ind = inds[n % len(inds)]
        x = np.clip(ind + rng.normal(0.0, 0.35, v.m), 0.0, 1.0)
        hits = [k for k, sg in enumerate(signs) if sg @ x > b]
        checked += 1
        if len(hits) > 1:
            return CheckReport(
                "uniqueness", False, checked, False, {"x": x.tolist(), "peaks": hits[:2]}
            )
    if v.intersecting_violation() is not None:
        notes.append("family is not b-intersecting, but no doubly-close point was found")
    return CheckReport("uniqueness", True, checked, exhaustive, notes=notes)


def check_peak_dominance(v: MultiPeakValuation, samples: int = 2000, seed: int = 0) -> CheckReport:
    """Inside a peak's region the peak value is never below the far value.

    On 0/1 points the values depend only on (|S & A|, |S - A|), so every
    feasible count pair is checked exactly; fractional points are sampled.
    """
    checked = 0
    dom_size = v.domain.bit_count()
    for idx, A in enumerate(v.peaks):
        na = A.bit_count()
        for x in range(na + 1):
            for y in range(dom_size - na + 1):
                if x - y <= v.b:
                    continue
                checked += 1
                if v.peak_formula(x, y) < v.far_formula(x + y):
                    return CheckReport(
                        "peak_dominance", False, checked, True, {"peak": idx, "inside": x, "outside": y}
                    )
    rng = np.random.default_rng(seed)
    a, b = float(v.a), float(v.b)
    for idx, A in enumerate(v.peaks):
        ind = indicator(A, v.m)
        dom = indicator(v.domain, v.m)
        for _ in range(samples // max(len(v.peaks), 1)):
            x = np.clip(ind + rng.normal(0.0, 0.3, v.m), 0.0, 1.0) * dom
            u, w = float(x @ ind), float(x.sum() - x @ ind)
            if u - w <= b:
                continue
            checked += 1
            if peak_formula(a, b, u, w) < base_formula(a, u + w) - 1e-12:
                return CheckReport(
                    "peak_dominance", False, checked, False, {"peak": idx, "x": x.tolist()}
                )
    return CheckReport("peak_dominance", True, checked, False)
