"""Zeros of ``z -> f_n(E, z)``, ``z = exp(i (x + i y))``, and their circles.

For a potential of degree ``m`` the determinant is a Laurent polynomial with
exponents in ``[-n m, n m]``.  Its coefficients span roughly ``exp(n * gamma)``
in magnitude, so they are recovered from samples on a ladder of radii and
used only to seed the root finder; the Aberth iteration itself takes its
Newton corrections straight from the determinant recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import det_batch, det_newton_ratio
from .model import FourierPotential
from .polyalg import (
    LaurentPoly,
    RootSet,
    aberth,
    dft_interpolate_radii,
    newton_polygon_start,
)

N_CAP = 150


class InterpolationIllConditioned(RuntimeError):
    pass


class RootsNotConverged(RuntimeError):
    def __init__(self, message, rootset=None):
        super().__init__(message)
        self.rootset = rootset


@dataclass(frozen=True)
class ZeroCircleReport:
    n: int
    degree: int
    radii_log: np.ndarray
    turning_points: tuple
    fractions: tuple
    epsilon: float
    unassigned_fraction: float
    assigned: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "degree": self.degree,
            "epsilon": self.epsilon,
            "turning_points": list(self.turning_points),
            "fractions": [[g, f] for g, f in self.fractions],
            "unassigned_fraction": self.unassigned_fraction,
        }


def zero_free_radius(pot: FourierPotential, E: complex, cap: float = 12.0) -> float:
    """A ``T`` such that ``f_n(E, .)`` has no zeros with ``|log|z|| > T``, any n.

    Beyond ``T`` every diagonal entry of ``H_n - E`` exceeds ``2`` in modulus
    (strict diagonal dominance), so the truncation is invertible.
    """
    ks = np.array(list(pot.coeffs), dtype=int)
    amps = np.abs(np.array(list(pot.coeffs.values()), dtype=complex))
    if ks.size == 0:
        return 0.0
    T_side = []
    for sign in (1, -1):
        # |z| -> infinity is y -> -infinity; the term e^{-k y} grows for sign*k > 0
        lead = np.max(sign * ks)
        if lead <= 0:
            T_side.append(cap)
            continue
        top = amps[sign * ks == lead][0]

        def margin(t):
            rest = np.sum(amps[sign * ks != lead] * np.exp(np.abs(ks[sign * ks != lead]) * t))
            return top * math.exp(lead * t) - rest - abs(E) - 2.0

        t = 0.25
        while margin(t) <= 0 and t < cap:
            t *= 1.5
        T_side.append(min(t, cap))
    return max(T_side)


def _sample_ladder(pot, alpha, E, n, log_radii, N):
    x = 2 * math.pi * np.arange(N) / N
    theta0 = x[None, :] - 1j * np.asarray(log_radii)[:, None]
    f, _, ls = det_batch(pot, alpha, E, theta0, n)
    return f, ls


def fn_laurent(pot: FourierPotential, alpha, E, n: int, sample_radius: float = 1.0,
               ladder_step: float = 0.1, validate=True) -> LaurentPoly:
    """Laurent coefficients of ``z -> f_n(E, z)``.

    Samples the recurrence at ``N = 2 n m + 1`` (rounded up to a power of two)
    points on each circle of a radius ladder spanning the zero-free bound and
    keeps, per coefficient, the circle with the smallest roundoff bound.  The
    result is checked against the recurrence at 16 fresh points on
    ``|z| = sample_radius``.
    """
    m = pot.degree
    K = n * m
    if K < 1:
        raise ValueError("need n * degree >= 1")
    N = 1 << (2 * K).bit_length()
    T = zero_free_radius(pot, E) + 0.5
    steps = max(2, int(math.ceil(2 * T / ladder_step)))
    log_radii = np.unique(np.concatenate([np.linspace(-T, T, steps + 1), [math.log(sample_radius)]]))
    f, ls = _sample_ladder(pot, alpha, E, n, log_radii, N)
    p = dft_interpolate_radii(f, ls, np.exp(log_radii), -K, K, trim_rel=0.0)
    if validate:
        err = validate_laurent(pot, alpha, E, n, p, sample_radius)
        if err > 1e-8:
            raise InterpolationIllConditioned(
                f"Laurent recovery error {err:.2e} at radius {sample_radius}; try another radius"
            )
    return p


def validate_laurent(pot, alpha, E, n, p: LaurentPoly, radius: float, count=16, seed=12345) -> float:
    """Max error of ``p`` against the recurrence at random points on a circle,
    relative to the largest sampled ``|f_n|``."""
    rng = np.random.default_rng(seed)
    x = 2 * math.pi * rng.random(count)
    theta0 = x - 1j * math.log(radius)
    f, _, ls = det_batch(pot, alpha, E, theta0, n)
    top = np.max(ls)
    direct = f * np.exp(ls - top)
    z = radius * np.exp(1j * x)
    approx = LaurentPoly(p.k_min, p.coeffs, p.log_scale - top, trim_rel=0.0)(z)
    return float(np.max(np.abs(approx - direct)) / np.max(np.abs(direct)))


def fn_zeros(pot: FourierPotential, alpha, E, n: int, tol=1e-13, max_iter=400,
             laurent: LaurentPoly | None = None) -> RootSet:
    """All ``2 n m`` zeros of ``f_n(E, .)`` in the punctured plane.

    Seeds come from the Newton polygon of the recovered coefficients; the
    iteration works on ``F(z) = z^{n m} f_n(z)`` with ``F/F'`` evaluated by the
    recurrence and its ``z``-derivative.
    """
    if n > N_CAP:
        raise ValueError(f"zero extraction is capped at n={N_CAP} in double precision")
    K = n * pot.degree
    if K == 0:
        return RootSet(np.zeros(0, complex), np.zeros(0), True, 0)
    if laurent is None:
        laurent = fn_laurent(pot, alpha, E, n, validate=False)
    init = newton_polygon_start(np.abs(laurent.coeffs))
    if len(init) != 2 * K:
        raise InterpolationIllConditioned("recovered Laurent polynomial lost end coefficients")

    def ratio(z):
        theta0 = np.angle(z) - 1j * np.log(np.abs(z))
        r, _ = det_newton_ratio(pot, alpha, E, theta0, n, wrt="z")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = r / (1.0 + K * r / z)
        return np.where(np.isfinite(r), out, 0.0)

    rs = aberth(ratio, init, tol, max_iter)
    return rs


def symmetry_check(rs, tol: float) -> bool:
    """Every root has a partner within ``tol`` of ``1 / conj(root)``."""
    z = rs.roots if isinstance(rs, RootSet) else np.asarray(rs, dtype=complex)
    if z.size == 0:
        return True
    mirror = 1.0 / np.conj(z)
    dist = np.abs(mirror[:, None] - z[None, :])
    scale = np.maximum(1.0, np.abs(mirror))
    return bool(np.all(np.min(dist, axis=1) <= tol * scale))


def zero_circle_report(pot: FourierPotential, alpha, E, n: int, pl, epsilon=0.05,
                       rs: RootSet | None = None) -> ZeroCircleReport:
    """Assign each zero to the nearest turning point in the ``-log|z|`` variable.

    ``pl`` is a fitted :class:`~qpwind.accel.PiecewiseLinear`.  For a real
    potential the fit is assumed one-sided (``y >= 0``) and its turning
    points are mirrored to ``-gamma``; turning points already present on both
    sides are used as they are.
    """
    if pot.degree == 0:
        return ZeroCircleReport(n, 0, np.zeros(0), (), (), epsilon, 0.0, np.zeros(0))
    if rs is None:
        rs = fn_zeros(pot, alpha, E, n)
    if not rs.converged:
        raise RootsNotConverged("Aberth iteration did not converge", rs)
    gammas = sorted(float(g) for g in pl.breakpoints)
    if pot.is_real and complex(E).imag == 0:
        gammas = sorted(set(gammas) | {-g for g in gammas if g > 0})
    radii_log = -np.log(np.abs(rs.roots))
    total = len(radii_log)
    assigned = np.full(total, np.nan)
    fractions = []
    if gammas:
        g = np.array(gammas)
        dist = np.abs(radii_log[:, None] - g[None, :])
        nearest = np.argmin(dist, axis=1)
        ok = dist[np.arange(total), nearest] < epsilon
        assigned[ok] = g[nearest[ok]]
        for j, gj in enumerate(gammas):
            fractions.append((gj, np.count_nonzero(ok & (nearest == j)) / total))
    unassigned = 1.0 - sum(f for _, f in fractions)
    return ZeroCircleReport(n, total, radii_log, tuple(gammas), tuple(fractions),
                            epsilon, unassigned, assigned)
