"""Continuous extensions of a multi-peak valuation and the gluing checks.

The far-region extension depends only on the coordinate sum; each peak A
has its own extension that is used on the open region of points b-close to
A.  Gluing is seamless when the two agree in value and first partials on
the region boundary, which :func:`boundary_agreement_check` tests
numerically with central differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .valuation import MultiPeakValuation, members

FD_STEP = 1e-5


def indicator(S: int, m: int) -> np.ndarray:
    x = np.zeros(m)
    x[members(S)] = 1.0
    return x


def _restrict(v: MultiPeakValuation, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (v.m,):
        raise ValueError(f"expected a point with {v.m} coordinates, got shape {x.shape}")
    if v.support is not None:
        x = x * indicator(v.support, v.m)
    return x


def base_formula(a: float, total: float) -> float:
    return 1.0 - max(1.0 - a * total, 0.0) ** 2


def peak_formula(a: float, b: float, inside: float, outside: float) -> float:
    return 1.0 - max(1.0 - a * (2.0 * inside - b), 0.0) * max(1.0 - a * (2.0 * outside + b), 0.0)


def continuous_base(v: MultiPeakValuation, x) -> float:
    x = _restrict(v, x)
    return base_formula(float(v.a), float(x.sum()))


def _split(v: MultiPeakValuation, A: int, x: np.ndarray) -> tuple[float, float]:
    ind = indicator(A, v.m)
    inside = float(x @ ind)
    return inside, float(x.sum()) - inside


def _check_peak(v: MultiPeakValuation, A: int) -> None:
    if A not in v.peaks:
        raise ValueError(f"{members(A)} is not a peak of this valuation")


def continuous_peak(v: MultiPeakValuation, A: int, x) -> float:
    _check_peak(v, A)
    x = _restrict(v, x)
    inside, outside = _split(v, A, x)
    return peak_formula(float(v.a), float(v.b), inside, outside)


def in_peak_region(v: MultiPeakValuation, A: int, x) -> bool:
    x = _restrict(v, x)
    inside, outside = _split(v, A, x)
    return inside - outside > float(v.b)


def glued_eval(v: MultiPeakValuation, x) -> float:
    """The peak extension inside a peak's region, the base extension elsewhere."""
    x = _restrict(v, x)
    for A in v.peaks:
        inside, outside = _split(v, A, x)
        if inside - outside > float(v.b):
            return peak_formula(float(v.a), float(v.b), inside, outside)
    return base_formula(float(v.a), float(x.sum()))


def central_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@dataclass
class BoundaryReport:
    peak: list[int]
    trials: int
    max_value_gap: float = 0.0
    max_grad_gap: float = 0.0
    tol_value: float = 1e-9
    tol_grad: float = 1e-4
    vacuous: bool = False
    worst_point: Optional[list[float]] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.max_value_gap <= self.tol_value and self.max_grad_gap <= self.tol_grad


def sample_boundary_point(v: MultiPeakValuation, A: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    """A random point with sum-inside minus sum-outside exactly b.

    Joins a random point of the peak region to a random point outside it and
    takes the crossing of the (linear) closeness functional.
    """
    m, b = v.m, float(v.b)
    ind = indicator(A, m)
    dom = indicator(v.domain, m)
    sign = np.where(ind > 0, 1.0, -1.0) * dom

    def g(x):
        return float(sign @ x) - b

    hi = ind * rng.uniform(0.5, 1.0, m) + (1 - ind) * dom * rng.uniform(0.0, 0.05, m)
    if g(hi) <= 0:
        hi = ind.copy()
        if g(hi) <= 0:
            return None
    lo = rng.uniform(0.0, 1.0, m)
    if g(lo) >= 0:
        lo = (1 - ind) * rng.uniform(0.0, 1.0, m)
        if g(lo) >= 0:
            lo = np.zeros(m)
            if g(lo) >= 0:
                return None
    lam = g(lo) / (g(lo) - g(hi))
    return lo + lam * (hi - lo)


def boundary_agreement_check(
    v: MultiPeakValuation,
    A: int,
    trials: int = 200,
    tol_value: float = 1e-9,
    tol_grad: float = 1e-4,
    seed: int = 0,
    peak_fn: Optional[Callable[[np.ndarray], float]] = None,
    points: Optional[list] = None,
) -> BoundaryReport:
    """Compare the base and peak extensions (values and partials) on the boundary.

    ``peak_fn`` replaces the peak extension, which is how mutants are tested.
    ``points`` overrides the random boundary sample.
    """
    if tol_value <= 0 or tol_grad <= 0:
        raise ValueError("tolerances must be positive")
    _check_peak(v, A)
    rng = np.random.default_rng(seed)

    def base(x):
        return continuous_base(v, x)

    peak = peak_fn if peak_fn is not None else (lambda x: continuous_peak(v, A, x))
    report = BoundaryReport(members(A), trials, tol_value=tol_value, tol_grad=tol_grad)
    if points is None:
        points = []
        for _ in range(trials):
            x = sample_boundary_point(v, A, rng)
            if x is None:
                report.vacuous = True
                return report
            points.append(x)
    for x in points:
        x = np.asarray(x, dtype=float)
        dv = abs(peak(x) - base(x))
        dg = float(np.max(np.abs(central_gradient(peak, x) - central_gradient(base, x))))
        if dv > report.max_value_gap or dg > report.max_grad_gap:
            report.worst_point = x.tolist()
        report.max_value_gap = max(report.max_value_gap, dv)
        report.max_grad_gap = max(report.max_grad_gap, dg)
    report.trials = len(points)
    return report
