"""Finite-volume winding numbers of ``x -> f_n(E, x + i y)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cocycle import det_batch
from .model import CocycleParams, FourierPotential
from .polyalg import annulus_count
from .zeros import fn_zeros

HALF_PI = 0.5 * math.pi


class ContourZeroError(RuntimeError):
    """The contour ``|z| = e^{-y}`` passes through or very near a zero."""

    def __init__(self, message, y):
        super().__init__(message)
        self.y = y


class LimitNotStabilized(RuntimeError):
    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


@dataclass(frozen=True)
class WindingResult:
    total_winding: int
    nu_n: Fraction
    n: int
    y: float
    grid_used: int
    min_abs_f: float
    max_increment: float
    angle_sum: float

    def to_row(self) -> dict:
        return {"y": self.y, "nu_n": float(self.nu_n), "W": self.total_winding, "n": self.n}


def _phases(pot, params: CocycleParams, M: int, odd_only=False):
    j = np.arange(1, M, 2) if odd_only else np.arange(M)
    x = 2 * math.pi * j / M
    f, _, ls = det_batch(pot, params.alpha, params.E, x + 1j * params.y, params.n)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(f)) + ls
    return f / np.maximum(np.abs(f), 1e-300), logabs


def _assemble(unit):
    ratios = np.roll(unit, -1) / unit
    inc = np.angle(ratios)
    total = math.fsum(inc)
    return total, float(np.max(np.abs(inc)))


def winding_n(pot: FourierPotential, params: CocycleParams, M: int | None = None,
              max_doublings: int = 6) -> WindingResult:
    """Net argument change of ``f_n`` around one period of ``x``, as an integer.

    The grid starts at ``M`` (default ``max(64, 4 n m)`` rounded up to a power
    of two) and doubles until every increment is below ``pi/2`` and the
    integer agrees with the previous grid.  ``nu_n = -W / n``.
    """
    n = params.n
    if M is None:
        M = 1 << max(6, (4 * n * max(pot.degree, 1) - 1).bit_length())
    if M < 64:
        raise ValueError("initial grid must have at least 64 phases")
    unit, logabs = _phases(pot, params, M)
    prev_W = None
    for _ in range(max_doublings + 1):
        if not np.all(np.isfinite(logabs)):
            raise ContourZeroError(f"f_n vanishes on the contour y={params.y}", params.y)
        total, biggest = _assemble(unit)
        W = int(round(total / (2 * math.pi)))
        if biggest < HALF_PI and prev_W is not None and W == prev_W:
            finite = logabs[np.isfinite(logabs)]
            mean = math.fsum(finite) / finite.size
            rel_min = math.exp(float(np.min(logabs)) - mean)
            if rel_min < 1e-12:
                raise ContourZeroError(
                    f"|f_n| drops to {rel_min:.1e} of its typical size on y={params.y}", params.y
                )
            return WindingResult(W, Fraction(-W, n), n, params.y, M, rel_min, biggest, total)
        prev_W = W if biggest < HALF_PI else None
        u_odd, l_odd = _phases(pot, params, 2 * M, odd_only=True)
        unit = np.stack([unit, u_odd], axis=1).ravel()
        logabs = np.stack([logabs, l_odd], axis=1).ravel()
        M *= 2
    raise ContourZeroError(
        f"argument increments did not resolve after {max_doublings} doublings at y={params.y}; "
        "the contour is close to a zero", params.y
    )


@dataclass
class LimitTable:
    side: str
    rows: list = field(default_factory=list)  # (eps, n, nu_n)


def winding_limit(pot, alpha, E, y, side="+", eps_seq=(0.08, 0.04, 0.02), n_start=1000,
                  n_max=4000, perturb=1e-3) -> int:
    """One-sided limit of ``nu_n`` at ``y``.

    For each offset ``eps`` the level ``y +/- eps`` is probed with ``n`` doubling
    from ``n_start`` until the rounded ``nu_n`` repeats.  The answer is the
    common integer of the two smallest offsets.  A contour through a zero is
    nudged by ``perturb``.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    sgn = 1.0 if side == "+" else -1.0
    table = LimitTable(side)
    per_eps = []
    for eps in eps_seq:
        level = y + sgn * eps
        n = n_start
        last = None
        settled = None
        while n <= n_max:
            nu = _nu_with_nudge(pot, CocycleParams(alpha, E, level, n), perturb)
            table.rows.append((eps, n, float(nu)))
            k = int(round(float(nu)))
            if last is not None and k == last and abs(float(nu) - k) < 0.25:
                settled = k
                break
            last = k
            n *= 2
        per_eps.append(settled)
    tail = per_eps[-2:]
    if None in tail or tail[0] != tail[1]:
        raise LimitNotStabilized(
            f"winding limit at y={y} side {side} not stabilized: {table.rows}", table
        )
    return tail[0]


def _nu_with_nudge(pot, params, perturb):
    for shift in (0.0, perturb, -perturb, 2 * perturb):
        try:
            return winding_n(pot, params.with_(y=params.y + shift)).nu_n
        except ContourZeroError:
            continue
    raise ContourZeroError(f"no zero-free contour near y={params.y}", params.y)


@dataclass(frozen=True)
class CountCheck:
    y1: float
    y2: float
    n: int
    winding_diff: Fraction
    interior: int
    boundary: int

    @property
    def residual(self) -> Fraction:
        return self.winding_diff - Fraction(2 * self.interior + self.boundary, 2 * self.n)

    @property
    def doubled_counts(self) -> tuple[int, int]:
        """``(2 n (nu(y2) - nu(y1)), 2 interior + boundary)``; equal when consistent."""
        return int(2 * self.n * self.winding_diff), 2 * self.interior + self.boundary


def count_consistency(pot, alpha, E, y1, y2, n, roots=None, M=None) -> CountCheck:
    """Compare ``nu_n(y2) - nu_n(y1)`` with the zero count in ``A(e^{-y2}, e^{-y1})``."""
    if not y1 < y2:
        raise ValueError("need y1 < y2")
    w1 = winding_n(pot, CocycleParams(alpha, E, y1, n), M)
    w2 = winding_n(pot, CocycleParams(alpha, E, y2, n), M)
    if roots is None:
        roots = fn_zeros(pot, alpha, E, n)
    interior, boundary = annulus_count(roots, math.exp(-y2), math.exp(-y1))
    return CountCheck(y1, y2, n, w2.nu_n - w1.nu_n, interior, boundary)
