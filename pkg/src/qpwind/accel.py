"""Profiles ``y -> L(E, iy)``, integer-slope convex fits, accelerations."""

from __future__ import annotations

import bisect
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cocycle import LENotConverged, converged_le


class QuantizationError(ValueError):
    """A slope away from every breakpoint is not close to an integer."""


class ConvexityError(ValueError):
    """Rounded slopes decrease somewhere."""


class ProfileError(RuntimeError):
    def __init__(self, message, y):
        super().__init__(message)
        self.y = y


@dataclass(frozen=True)
class LEProfile:
    E: complex
    y_grid: np.ndarray
    L_values: np.ndarray
    est_error: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y_grid, dtype=float)
        L = np.asarray(self.L_values, dtype=float)
        if y.shape != L.shape or y.ndim != 1:
            raise ValueError("grid and values must be 1-d and of equal length")
        if np.any(np.diff(y) <= 0):
            raise ValueError("y grid must be strictly increasing")
        if not np.all(np.isfinite(L)):
            raise ValueError("profile values must be finite")
        err = np.broadcast_to(np.asarray(self.est_error, dtype=float), y.shape).copy()
        object.__setattr__(self, "y_grid", y)
        object.__setattr__(self, "L_values", L)
        object.__setattr__(self, "est_error", err)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous convex piecewise-linear model with integer slopes.

    ``slopes[j]`` holds on ``(breakpoints[j-1], breakpoints[j])``; ``anchor``
    is the model value at ``y_min``.  ``brackets[j]`` is the grid interval that
    must contain ``breakpoints[j]``.
    """

    breakpoints: tuple
    slopes: tuple
    anchor: float
    y_min: float
    y_max: float
    fit_residual: float
    brackets: tuple = ()

    def segment_index(self, y: float, side: str = "+") -> int:
        if side == "+":
            return bisect.bisect_right(self.breakpoints, y)
        return bisect.bisect_left(self.breakpoints, y)

    def __call__(self, y):
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(y_arr)
        knots = [self.y_min, *self.breakpoints]
        vals = [self.anchor]
        for j, b in enumerate(self.breakpoints):
            vals.append(vals[-1] + self.slopes[j] * (b - knots[j]))
        for i, yy in enumerate(y_arr):
            j = bisect.bisect_right(self.breakpoints, yy)
            out[i] = vals[j] + self.slopes[j] * (yy - knots[j])
        return float(out[0]) if np.ndim(y) == 0 else out

    def slope_integral(self, a: float, b: float) -> float:
        """``int_a^b`` of the right-derivative of the model."""
        if b < a:
            return -self.slope_integral(b, a)
        pts = [a] + [g for g in self.breakpoints if a < g < b] + [b]
        return math.fsum(
            self.slopes[self.segment_index(lo, "+")] * (hi - lo) for lo, hi in zip(pts, pts[1:])
        )

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "slopes": list(self.slopes),
            "anchor": self.anchor,
            "y_range": [self.y_min, self.y_max],
            "fit_residual": self.fit_residual,
            "brackets": [list(b) for b in self.brackets],
        }


def _le_point(args):
    pot, alpha, E, y, tol, kw = args
    try:
        return converged_le(pot, alpha, E, y, tol, **kw)
    except LENotConverged as exc:
        return exc


def le_profile(pot, alpha, E, y_min, y_max, points, tol=1e-3, workers=1, **le_kw) -> LEProfile:
    """Converged exponents on ``points`` equally spaced values of ``y``."""
    if not y_min < y_max:
        raise ValueError("need y_min < y_max")
    if points < 5:
        raise ValueError("need at least 5 profile points")
    ys = np.linspace(y_min, y_max, points)
    jobs = [(pot, alpha, E, float(y), tol, le_kw) for y in ys]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_le_point, jobs))
    else:
        results = [_le_point(j) for j in jobs]
    for y, r in zip(ys, results):
        if isinstance(r, Exception):
            raise ProfileError(f"LE did not converge at y={y:g}: {r}", float(y))
    return LEProfile(complex(E), ys, np.array([r.value for r in results]),
                     np.array([r.est_error for r in results]))


def interval_slopes(profile: LEProfile) -> np.ndarray:
    return np.diff(profile.L_values) / np.diff(profile.y_grid)


def fit_quantized(profile: LEProfile, slope_tol: float = 0.1) -> PiecewiseLinear:
    """Fit a convex piecewise-linear model with integer slopes.

    Secant slopes between neighbouring grid points are rounded.  Runs of
    intervals whose slope is within ``slope_tol`` of a common integer become
    segments; at most two consecutive off-integer intervals may sit between
    segments (they hold a kink).  Each breakpoint is the intersection of the
    neighbouring integer-slope lines, kept inside its bracket.
    """
    y, L = profile.y_grid, profile.L_values
    if len(y) < 5:
        raise ValueError("need at least 5 profile points")
    s = interval_slopes(profile)
    r = np.rint(s).astype(int)
    clean = np.abs(s - r) <= slope_tol

    runs = []  # [slope, first interval, last interval]
    for i in range(len(s)):
        if not clean[i]:
            continue
        if runs and runs[-1][2] == i - 1 and runs[-1][0] == r[i]:
            runs[-1][2] = i
        else:
            runs.append([int(r[i]), i, i])
    if not runs:
        raise QuantizationError("no interval has a near-integer slope")
    if runs[0][1] != 0 or runs[-1][2] != len(s) - 1:
        bad = 0 if runs[0][1] != 0 else len(s) - 1
        raise QuantizationError(
            f"slope {s[bad]:.4f} on [{y[bad]:.4g}, {y[bad + 1]:.4g}] at the profile edge is not an integer"
        )
    for a, b in zip(runs, runs[1:]):
        gap = range(a[2] + 1, b[1])
        if b[0] < a[0]:
            raise ConvexityError(f"slope drops from {a[0]} to {b[0]} near y={y[b[1]]:.4g}")
        if b[0] == a[0]:
            i = gap[0]
            raise QuantizationError(f"slope {s[i]:.4f} on [{y[i]:.4g}, {y[i + 1]:.4g}] is not an integer")
        if len(gap) > 2:
            i = gap[len(gap) // 2]
            raise QuantizationError(f"{len(gap)} consecutive off-integer slopes around y={y[i]:.4g}")
        for i in gap:
            if not (a[0] - slope_tol <= s[i] <= b[0] + slope_tol):
                raise QuantizationError(f"slope {s[i]:.4f} near y={y[i]:.4g} is not between {a[0]} and {b[0]}")

    slopes = [run[0] for run in runs]
    intercepts = []
    for sl, i0, i1 in runs:
        idx = np.arange(i0, i1 + 2)
        # median: a kink just inside an end interval can pass the slope test
        intercepts.append(float(np.median(L[idx] - sl * y[idx])))
    breakpoints, brackets = [], []
    for j in range(len(runs) - 1):
        lo = y[runs[j][2] + 1]
        hi = y[runs[j + 1][1]]
        if hi <= lo:
            # runs meet at a grid point: kink lies in one of the two adjacent intervals
            lo, hi = y[max(runs[j][2], 0)], y[min(runs[j + 1][1] + 1, len(y) - 1)]
        g = (intercepts[j + 1] - intercepts[j]) / (slopes[j] - slopes[j + 1])
        breakpoints.append(float(min(max(g, lo), hi)))
        brackets.append((float(lo), float(hi)))
    anchor = slopes[0] * y[0] + intercepts[0]
    pl = PiecewiseLinear(tuple(breakpoints), tuple(slopes), float(anchor),
                         float(y[0]), float(y[-1]), 0.0, tuple(brackets))
    resid = float(np.max(np.abs(pl(y) - L)))
    return PiecewiseLinear(pl.breakpoints, pl.slopes, pl.anchor, pl.y_min, pl.y_max, resid, pl.brackets)


def slope_deviations(profile: LEProfile, pl: PiecewiseLinear, margin: float = 0.05) -> np.ndarray:
    """Pre-rounding slope errors on intervals farther than ``margin`` from every breakpoint."""
    y = profile.y_grid
    s = interval_slopes(profile)
    keep = np.ones(len(s), dtype=bool)
    for g in pl.breakpoints:
        keep &= (np.minimum(np.abs(y[:-1] - g), np.abs(y[1:] - g)) > margin)
        keep &= ~((y[:-1] < g) & (y[1:] > g))
    return np.abs(s[keep] - np.rint(s[keep]))


def acceleration_at(pl: PiecewiseLinear, y: float, side: str = "+") -> int:
    """One-sided derivative of the fitted model at ``y``."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if side == "+" and not pl.y_min <= y < pl.y_max:
        raise ValueError(f"y={y} outside [{pl.y_min}, {pl.y_max}) for a right derivative")
    if side == "-" and not pl.y_min < y <= pl.y_max:
        raise ValueError(f"y={y} outside ({pl.y_min}, {pl.y_max}] for a left derivative")
    return int(pl.slopes[pl.segment_index(y, side)])


def regularity_test(pl: PiecewiseLinear, y: float) -> bool:
    """Affine around ``y`` with a value clearly above zero."""
    same = acceleration_at(pl, y, "+") == acceleration_at(pl, y, "-")
    return bool(same and pl(y) > 3 * pl.fit_residual)


def default_workers() -> int:
    env = os.environ.get("QPWIND_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
