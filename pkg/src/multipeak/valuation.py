"""Multi-peak monotone submodular valuations over a finite ground set.

Item sets are plain Python ints used as bitmasks: item ``i`` is a member of
``S`` iff ``S >> i & 1``.  :func:`mask` and :func:`members` convert to and
from iterables of indices.

All discrete evaluation is exact (:class:`fractions.Fraction`).  Bulk
evaluation over every subset of a small ground set goes through
:func:`value_table`, which returns integers over a common denominator so
that numpy can be used without losing exactness.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np


class FamilyIntegrityError(ValueError):
    """A set was found b-close to two peaks, so the family is not b-intersecting."""

    def __init__(self, message: str, witness: tuple = ()):
        super().__init__(message)
        self.witness = witness


def mask(items: Iterable[int]) -> int:
    out = 0
    for i in items:
        if i < 0:
            raise ValueError(f"negative item index {i}")
        out |= 1 << i
    return out


def members(S: int) -> list[int]:
    out = []
    i = 0
    while S:
        if S & 1:
            out.append(i)
        S >>= 1
        i += 1
    return out


def popcount(S: int) -> int:
    return S.bit_count()


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions, decimal strings and ``"p/q"`` strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    return Fraction(x)


def positive_part(x):
    return x if x > 0 else 0 * x


def closeness(S: int, A: int) -> int:
    """``|S & A| - |S \\ A|``; S is b-close to A iff this exceeds b."""
    return (S & A).bit_count() - (S & ~A).bit_count()


@dataclass(frozen=True)
class MultiPeakValuation:
    """An (F, a, b)-multi-peak function on ``m`` items.

    ``peaks`` are bitmasks, ``a`` is the per-item scale and ``b`` the
    closeness threshold.  If ``support`` is given the function only looks at
    ``S & support``.
    """

    m: int
    peaks: tuple[int, ...]
    a: Fraction
    b: Fraction
    support: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", as_fraction(self.b))
        object.__setattr__(self, "peaks", tuple(int(p) for p in self.peaks))
        if self.m < 1:
            raise ValueError("ground set must have at least one item")
        if self.a <= 0:
            raise ValueError("scale a must be positive")
        if self.b < 0:
            raise ValueError("threshold b must be non-negative")
        full = (1 << self.m) - 1
        if len(set(self.peaks)) != len(self.peaks):
            raise ValueError("peaks must be distinct")
        for p in self.peaks:
            if p & ~full:
                raise ValueError(f"peak {members(p)} has items outside the ground set")
        if self.support is not None:
            if self.support & ~full:
                raise ValueError("support has items outside the ground set")
            for p in self.peaks:
                if p & ~self.support:
                    raise ValueError(f"peak {members(p)} is not contained in the support")

    @property
    def full(self) -> int:
        return (1 << self.m) - 1

    @property
    def domain(self) -> int:
        return self.full if self.support is None else self.support

    def validation_warnings(self) -> list[str]:
        """Non-fatal oddities: over-saturating scale, non-intersecting families."""
        out = []
        if self.a >= 1:
            out.append(f"a = {self.a} >= 1: every nonempty set is saturated")
        pair = self.intersecting_violation()
        if pair is not None:
            i, j = pair
            out.append(
                f"peaks {i} and {j} intersect in "
                f"{(self.peaks[i] & self.peaks[j]).bit_count()} > b = {self.b} items"
            )
        return out

    def intersecting_violation(self) -> Optional[tuple[int, int]]:
        """First pair of peak indices intersecting in more than b items, if any."""
        for i, A in enumerate(self.peaks):
            for j in range(i + 1, len(self.peaks)):
                if (A & self.peaks[j]).bit_count() > self.b:
                    return (i, j)
        return None

    def close_peak_index(self, S: int) -> Optional[int]:
        S &= self.domain
        found = None
        for idx, A in enumerate(self.peaks):
            if closeness(S, A) > self.b:
                if found is not None:
                    raise FamilyIntegrityError(
                        f"set {members(S)} is b-close to peaks {found} and {idx}",
                        witness=(S, found, idx),
                    )
                found = idx
        return found

    def close_peak(self, S: int) -> Optional[int]:
        """The unique peak S is b-close to, or None."""
        idx = self.close_peak_index(S)
        return None if idx is None else self.peaks[idx]

    def peak_formula(self, inside: int, outside: int) -> Fraction:
        a, b = self.a, self.b
        return 1 - positive_part(1 - a * (2 * inside - b)) * positive_part(1 - a * (2 * outside + b))

    def far_formula(self, size: int) -> Fraction:
        return 1 - positive_part(1 - self.a * size) ** 2

    def value(self, S: int) -> Fraction:
        S &= self.domain
        idx = self.close_peak_index(S)
        if idx is None:
            return self.far_formula(S.bit_count())
        A = self.peaks[idx]
        return self.peak_formula((S & A).bit_count(), (S & ~A).bit_count())

    __call__ = value

    def marginal(self, S: int, i: int) -> Fraction:
        bit = 1 << i
        if S & bit:
            raise ValueError(f"item {i} is already in the set")
        if i >= self.m or i < 0:
            raise ValueError(f"item {i} outside the ground set")
        return self.value(S | bit) - self.value(S)

    def with_peaks(self, peaks: Sequence[int]) -> "MultiPeakValuation":
        return MultiPeakValuation(self.m, tuple(peaks), self.a, self.b, self.support)


def make_valuation(m: int, peaks: Iterable[Iterable[int]], a, b, support=None) -> MultiPeakValuation:
    """Convenience constructor taking index lists instead of masks."""
    sup = None if support is None else mask(support)
    v = MultiPeakValuation(m, tuple(mask(p) for p in peaks), as_fraction(a), as_fraction(b), sup)
    for w in v.validation_warnings():
        warnings.warn(w, stacklevel=2)
    return v


# --- bulk evaluation -------------------------------------------------------

_INT64_SAFE = 2**62


def popcount_table(m: int) -> np.ndarray:
    """Popcounts of 0 .. 2**m - 1."""
    t = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        t[1 << i: 1 << (i + 1)] = t[: 1 << i] + 1
    return t


def value_table(v: MultiPeakValuation, strict: bool = True) -> tuple[np.ndarray, int]:
    """Exact values of ``v`` on every subset of the ground set.

    Returns ``(T, D)`` with ``v.value(S) == Fraction(T[S], D)``.  ``T`` is
    int64 when the scaled values provably fit, otherwise an object array of
    Python ints.  With ``strict=False`` a set close to several peaks uses the
    lowest-index one instead of raising.
    """
    m = v.m
    if m > 24:
        raise ValueError(f"value table over 2**{m} sets is too large")
    p, q = v.a.numerator, v.a.denominator
    r, u = v.b.numerator, v.b.denominator
    D = (q * u) ** 2
    bound = q * u + p * (2 * m * u + r)
    dtype = np.int64 if bound * bound < _INT64_SAFE else object

    pc = popcount_table(m)
    sets = np.arange(1 << m, dtype=np.int64) & np.int64(v.domain)
    n = pc[sets]
    qu = q * u

    base = np.maximum(qu - p * n * u, 0).astype(dtype)
    T = D - base * base
    claimed = np.full(1 << m, -1, dtype=np.int64)
    for idx, A in enumerate(v.peaks):
        inside = pc[sets & np.int64(A)]
        outside = n - inside
        close = u * (2 * inside - n) > r
        if strict:
            clash = close & (claimed >= 0)
            if np.any(clash):
                S = int(np.flatnonzero(clash)[0])
                raise FamilyIntegrityError(
                    f"set {members(S)} is b-close to peaks {int(claimed[S])} and {idx}",
                    witness=(S, int(claimed[S]), idx),
                )
        else:
            close &= claimed < 0
        claimed[close] = idx
        f1 = np.maximum(qu - p * (2 * inside[close] * u - r), 0).astype(dtype)
        f2 = np.maximum(qu - p * (2 * outside[close] * u + r), 0).astype(dtype)
        T[close] = D - f1 * f2
    return T, D


def common_tables(vals: Sequence[MultiPeakValuation]) -> tuple[list[np.ndarray], int]:
    """Value tables for several valuations rescaled to one denominator.

    The tables stay int64 only if the sum over all of them cannot overflow.
    """
    raw = [value_table(v) for v in vals]
    D = math.lcm(*(d for _, d in raw)) if raw else 1
    wide = any(T.dtype == object for T, _ in raw) or D * max(len(raw), 1) >= _INT64_SAFE
    out = []
    for T, d in raw:
        if wide:
            T = T.astype(object)
        out.append(T * (D // d) if D != d else T)
    return out, D
