"""Maximizing total value over normalized allocation profiles.

A profile gives each player ``x`` (mass inside its closest peak) and ``y``
(mass outside), both in units of the peak size.  Feasible profiles have
``x`` sorted non-increasing, prefix sums of ``x`` bounded by the union
bounds of a NO instance, and total mass at most ``k``.

Two independent optimizers live here: :func:`structured_opt` searches only
the structured solutions (leading players close to their peaks at a common
level, trailing players far with equal ``y``; for two players the exact
piecewise-concave optimum), and :func:`grid_opt` brute-forces a grid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .setsystems import union_fraction
from .valuation import as_fraction, positive_part


def profile_value(x, y, alpha, beta):
    """Value of one player holding mass x inside and y outside its peak."""
    if x - beta > y:
        return 1 - positive_part(1 - alpha * (2 * x - beta)) * positive_part(1 - alpha * (2 * y + beta))
    return 1 - positive_part(1 - alpha * (x + y)) ** 2


def _value_array(x, y, alpha: float, beta: float) -> np.ndarray:
    close = x - beta > y
    vc = 1 - np.maximum(1 - alpha * (2 * x - beta), 0) * np.maximum(1 - alpha * (2 * y + beta), 0)
    vf = 1 - np.maximum(1 - alpha * (x + y), 0) ** 2
    return np.where(close, vc, vf)


def prefix_caps(k: int, eps) -> list:
    """Upper bounds on the sum of the ell largest x's, for ell = 1..k."""
    return [(union_fraction(k, ell) + eps) * k for ell in range(1, k + 1)]


@dataclass
class ProfileResult:
    value: object
    x: list
    y: list
    k_star: int
    closed_form: Optional[Fraction] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": float(self.value), "x": [float(v) for v in self.x],
                "y": [float(v) for v in self.y], "k_star": self.k_star,
                "closed_form": None if self.closed_form is None else float(self.closed_form),
                "notes": self.notes}


def feasible(x, y, k: int, eps, tol: float = 1e-12) -> bool:
    if any(v < -tol for v in list(x) + list(y)):
        return False
    if any(x[i] < x[i + 1] - tol for i in range(k - 1)):
        return False
    caps = prefix_caps(k, eps)
    run = 0
    for ell in range(k):
        run += x[ell]
        if run > caps[ell] + tol:
            return False
    return sum(x) + sum(y) <= k + tol


def saturation_point(alpha, beta):
    """Inside mass at which a close player's value reaches 1 (with y = 0)."""
    return (1 + alpha * beta) / (2 * alpha)


def closed_form_valid(alpha, beta, eps=Fraction(0)) -> bool:
    """Whether the two-player closed form is the exact optimum.

    The second player must be far (``beta >= 1/2 + 2 eps``), the saturation
    point of the first player must be feasible and inside its region, and
    shifting further mass to the first player must not pay off.
    """
    alpha, beta, eps = as_fraction(alpha), as_fraction(beta), as_fraction(eps)
    xs = saturation_point(alpha, beta)
    return beta >= Fraction(1, 2) + 2 * eps and beta < xs <= min(1 + 2 * eps, 2 - beta)


def _two_player_exact(alpha: Fraction, beta: Fraction, eps: Fraction) -> ProfileResult:
    upper = min(1 + 2 * eps, Fraction(2))
    far_both = 2 * profile_value(Fraction(0), Fraction(1), alpha, beta)
    best = ProfileResult(far_both, [Fraction(0), Fraction(0)], [Fraction(1), Fraction(1)], 0)
    # The one-close-player objective is concave in x1; its maximum sits at a kink or an end.
    candidates = {saturation_point(alpha, beta), 2 - beta, 2 - 1 / alpha, upper}
    for x1 in sorted(candidates):
        x1 = min(max(x1, Fraction(0)), upper)
        if not x1 - beta > 0:
            continue
        y2 = 2 - x1
        val = profile_value(x1, Fraction(0), alpha, beta) + profile_value(Fraction(0), y2, alpha, beta)
        if val > best.value:
            best = ProfileResult(val, [x1, Fraction(0)], [Fraction(0), y2], 1)
    return best


def _level_profile(t: float, ks: int, k: int, caps: list[float]) -> tuple[list[float], list[float]]:
    x = [0.0] * k
    run = 0.0
    prev = t
    for i in range(ks):
        xi = max(0.0, min(t, caps[i] - run, prev))
        x[i] = xi
        run += xi
        prev = xi
    rest = max(0.0, k - run)
    y = [0.0] * k
    if ks < k:
        for i in range(ks, k):
            y[i] = rest / (k - ks)
    elif k:
        y[k - 1] = rest
    return x, y


def _general_structured(k: int, alpha: float, beta: float, eps: float, points: int = 4001) -> ProfileResult:
    caps = [float(c) for c in prefix_caps(k, eps)]
    tmax = min(caps[0], float(k))
    best = None
    for ks in range(0, k + 1):
        ts = np.linspace(0.0, tmax, points).tolist() + [min(tmax, float(saturation_point(alpha, beta)))]
        scored = []
        for t in ts:
            x, y = _level_profile(t, ks, k, caps)
            scored.append((sum(profile_value(a, b, alpha, beta) for a, b in zip(x, y)), t))
        val, t = max(scored)
        step = tmax / (points - 1) if points > 1 else tmax
        while step > 1e-12:
            improved = False
            for cand in (t - step, t + step):
                if 0.0 <= cand <= tmax:
                    x, y = _level_profile(cand, ks, k, caps)
                    cv = sum(profile_value(a, b, alpha, beta) for a, b in zip(x, y))
                    if cv > val:
                        val, t, improved = cv, cand, True
            if not improved:
                step /= 2
        x, y = _level_profile(t, ks, k, caps)
        if best is None or val > best.value:
            best = ProfileResult(val, x, y, ks)
    return best


def structured_opt(k: int, alpha, beta, eps=Fraction(0)) -> ProfileResult:
    """Best structured profile.

    For ``k == 2`` and ``beta >= 1/2 + 2 eps`` the answer is exact (a
    Fraction) and ``closed_form`` carries the saturated-first-player value;
    otherwise a one-dimensional search per count of close players is run in
    floating point.
    """
    alpha, beta, eps = as_fraction(alpha), as_fraction(beta), as_fraction(eps)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if k < 1:
        raise ValueError("need at least one player")
    if k == 2 and beta >= Fraction(1, 2) + 2 * eps:
        res = _two_player_exact(alpha, beta, eps)
        xs = saturation_point(alpha, beta)
        res.closed_form = 2 - positive_part(1 - alpha * (2 - xs)) ** 2
        if not closed_form_valid(alpha, beta, eps):
            res.notes.append("closed form is not the optimum at these parameters")
        return res
    res = _general_structured(k, float(alpha), float(beta), float(eps))
    if k == 2:
        res.notes.append("beta below 1/2 + 2 eps: two close players possible, searched numerically")
    return res


def _grid(upper: float, h: float) -> np.ndarray:
    return np.arange(0, int(np.floor(upper / h + 1e-9)) + 1) * h


def _x_rows(k: int, caps: list[float], h: float) -> np.ndarray:
    rows = _grid(min(caps[0], k), h)[:, None]
    for i in range(1, k):
        g = _grid(min(caps[0], k), h)
        prev = rows[:, -1][:, None]
        run = rows.sum(axis=1)[:, None]
        ok = (g[None, :] <= prev + 1e-12) & (run + g[None, :] <= caps[i] + 1e-12)
        r, c = np.nonzero(ok)
        rows = np.hstack([rows[r], g[c][:, None]])
    return rows


def _y_rows(k: int, h: float) -> np.ndarray:
    if k == 1:
        return np.zeros((1, 0))
    g = _grid(k, h)
    rows = g[:, None]
    for _ in range(1, k - 1):
        run = rows.sum(axis=1)[:, None]
        ok = run + g[None, :] <= k + 1e-12
        r, c = np.nonzero(ok)
        rows = np.hstack([rows[r], g[c][:, None]])
    return rows


def grid_opt(k: int, alpha, beta, eps=Fraction(0), resolution=Fraction(1, 200), refine: bool = True,
             chunk: int = 2000) -> ProfileResult:
    """Brute-force grid search over feasible profiles, then local pattern refinement.

    The last player's ``y`` absorbs all unused mass (values are non-decreasing
    in ``y``), so the grid runs over the k x's and the first k-1 y's.  A
    heuristic oracle: it never exceeds the true optimum but is not certified.
    """
    a, bt, e, h = float(alpha), float(beta), float(eps), float(resolution)
    caps = [float(c) for c in prefix_caps(k, as_fraction(eps))]
    X = _x_rows(k, caps, h)
    Y = _y_rows(k, h)
    ysum = Y.sum(axis=1)
    best_val, best = -np.inf, None
    for start in range(0, X.shape[0], chunk):
        Xc = X[start:start + chunk]
        rest = k - Xc.sum(axis=1)[:, None] - ysum[None, :]
        ok = rest >= -1e-12
        total = np.zeros(rest.shape)
        for i in range(k - 1):
            total += _value_array(Xc[:, i][:, None], Y[:, i][None, :], a, bt)
        total += _value_array(Xc[:, k - 1][:, None], np.maximum(rest, 0.0), a, bt)
        total = np.where(ok, total, -np.inf)
        idx = np.unravel_index(int(np.argmax(total)), total.shape)
        if total[idx] > best_val:
            best_val = float(total[idx])
            xr, yr = Xc[idx[0]], Y[idx[1]]
            best = ([float(v) for v in xr], [float(v) for v in yr] + [max(0.0, k - float(xr.sum()) - float(yr.sum()))])
    x, y = best
    if refine:
        x, y, best_val = _pattern_refine(x, y, k, a, bt, e, h)
    ks = sum(1 for xi, yi in zip(x, y) if xi - bt > yi)
    return ProfileResult(best_val, x, y, ks)


def _total(x, y, a, bt) -> float:
    return float(sum(profile_value(xi, yi, a, bt) for xi, yi in zip(x, y)))


def _pattern_refine(x, y, k, a, bt, e, h, min_step: float = 1e-9):
    """Coordinate moves on x_1..x_k, y_1..y_{k-1}; y_k takes up the slack."""
    x, y = list(x), list(y)
    val = _total(x, y, a, bt)
    step = h / 2
    coords = [("x", i) for i in range(k)] + [("y", i) for i in range(k - 1)]
    for _ in range(10_000):
        improved = False
        for (kind, i), sign in itertools.product(coords, (1.0, -1.0)):
            nx, ny = list(x), list(y)
            (nx if kind == "x" else ny)[i] += sign * step
            ny[k - 1] = k - sum(nx) - sum(ny[:k - 1])
            if not feasible(nx, ny, k, e):
                continue
            nv = _total(nx, ny, a, bt)
            if nv > val + 1e-15:
                x, y, val, improved = nx, ny, nv, True
        if not improved:
            step /= 2
            if step < min_step:
                break
    return x, y, val
