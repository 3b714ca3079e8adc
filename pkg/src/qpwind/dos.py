"""Spectra of Dirichlet truncations, empirical density of states, Thouless checks.

Eigenvalues of ``H_n(x + i y)`` are the roots of ``E -> f_n(E)``.  They are
found by Aberth iteration whose Newton corrections come from the determinant
recurrence and its ``E``-derivative.  Monomial coefficients of the
characteristic polynomial (``charpoly_in_E``) are available for small ``n``
only: their conditioning degrades like ``(R / cap)^n`` for spectra near a
segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import converged_le, det_batch, det_newton_ratio
from .model import FourierPotential, energy_bound, eval_potential
from .polyalg import LaurentPoly, RootSet, aberth, dft_interpolate

GUARD = 0.1


class CharpolyIllConditioned(RuntimeError):
    pass


class SpectrumError(RuntimeError):
    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class HypothesisViolation(ValueError):
    pass


@dataclass(frozen=True)
class EmpiricalMeasure:
    points: np.ndarray
    n: int
    phase_count: int

    @property
    def weight(self) -> float:
        return 1.0 / (self.n * self.phase_count)


@dataclass(frozen=True)
class ThoulessReport:
    E_grid: np.ndarray
    potential_values: np.ndarray
    L_values: np.ndarray
    residuals: np.ndarray
    excluded: np.ndarray
    assumption: str = "Lebesgue measure of {L = 0} at this level assumed zero"

    @property
    def max_residual(self) -> float:
        ok = ~self.excluded
        return float(np.max(self.residuals[ok])) if ok.any() else math.nan


@dataclass(frozen=True)
class AccdenResult:
    lhs: float
    rhs: float
    residual: float
    L0: float


def _diagonal(pot, alpha, x, y, n):
    j = np.arange(1, n + 1)
    return eval_potential(pot, x + 1j * y + j * alpha)


def charpoly_in_E(pot, alpha, x, y, n, validate=True) -> LaurentPoly:
    """Monic ``E -> det(E - H_n(x + i y))`` by sampling on ``|E| = R``.

    ``R`` is the energy bound plus one.  The fit is checked at 8 fresh points
    on the same circle.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    R = energy_bound(pot, y) + 1.0
    N = n + 1
    E = R * np.exp(2j * math.pi * np.arange(N) / N)
    f, _, ls = det_batch(pot, alpha, E, x + 1j * y, n)
    top = float(np.max(ls))
    p = dft_interpolate(f * np.exp(ls - top), 0, n, R)
    lead = p.coeffs[-1] * math.exp(top) if p.k_max == n else 0.0
    if lead == 0:
        raise CharpolyIllConditioned("leading coefficient lost; use a smaller n")
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[p.k_min:] = p.coeffs * math.exp(top) / lead
    coeffs[-1] = 1.0
    out = LaurentPoly(0, coeffs, trim_rel=0.0)
    if validate:
        rng = np.random.default_rng(7)
        Et = R * np.exp(2j * math.pi * rng.random(8))
        ft, _, lt = det_batch(pot, alpha, Et, x + 1j * y, n)
        direct = ft * np.exp(lt)
        err = np.max(np.abs(out(Et) - direct) / np.abs(direct))
        if not err <= 1e-8:
            raise CharpolyIllConditioned(f"validation error {err:.1e}; use a smaller n")
    return out


def _spectrum_start(diag, n):
    c = complex(np.mean(diag))
    rad = float(np.max(np.abs(diag - c))) + 2.0
    ang = 2 * math.pi * (np.arange(n) + 0.25) / n + 0.3
    return c + rad * np.exp(1j * ang)


def _spectra(pot, alpha, xs, y, n, tol, max_iter):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    diags = [_diagonal(pot, alpha, x, y, n) for x in xs]
    theta0 = (xs + 1j * y)[:, None]

    def ratio(E):
        r, _ = det_newton_ratio(pot, alpha, E, theta0, n, wrt="E")
        return np.where(np.isfinite(r), r, 0.0)

    init = np.stack([_spectrum_start(dg, n) for dg in diags])
    sets = aberth(ratio, init, tol, max_iter)
    for x, dg, rs in zip(xs, diags, sets):
        if not rs.converged:
            raise SpectrumError(f"Aberth iteration did not converge at phase x={x}", x)
        trace = math.fsum(dg.real) + 1j * math.fsum(dg.imag)
        got = math.fsum(rs.roots.real) + 1j * math.fsum(rs.roots.imag)
        scale = float(np.sum(np.abs(rs.roots))) + 1.0
        if abs(got - trace) > 1e-8 * scale:
            raise SpectrumError(f"trace check failed at x={x}: {got} vs {trace}", x)
    return sets


def truncated_spectrum(pot, alpha, x, y, n, tol=1e-13, max_iter=500) -> RootSet:
    """Eigenvalues of ``H_n(x + i y)``.

    Converged roots must also reproduce the trace (sum of diagonal entries).
    """
    return _spectra(pot, alpha, [x], y, n, tol, max_iter)[0]


def empirical_dos(pot, alpha, y, n, S, batch=16) -> EmpiricalMeasure:
    """Eigenvalues pooled over the phases ``2 pi s / S``, in phase order."""
    if S < 1:
        raise ValueError("need at least one phase sample")
    xs = 2 * math.pi * np.arange(S) / S
    pts = []
    for i in range(0, S, batch):
        pts.extend(rs.roots for rs in _spectra(pot, alpha, xs[i:i + batch], y, n, 1e-13, 500))
    return EmpiricalMeasure(np.concatenate(pts), n, S)


def log_potential(mu: EmpiricalMeasure, E) -> float:
    """``sum_j w log|E - E_j|``; ``-inf`` when ``E`` is one of the points."""
    d = np.abs(mu.points - complex(E))
    if np.any(d == 0):
        return -math.inf
    return math.fsum(np.log(d)) * mu.weight


def thouless_report(pot, alpha, y, n, S, E_grid, guard=GUARD, mu=None, le_tol=1e-4,
                    L_exact=None) -> ThoulessReport:
    """Compare the log-potential of the empirical DOS with the exponent.

    Probes closer than ``guard`` to any eigenvalue are excluded.  ``L_exact``
    (a callable) replaces the numerical exponent when a closed form exists.
    """
    if not guard > 0:
        raise ValueError("guard must be positive")
    if mu is None:
        mu = empirical_dos(pot, alpha, y, n, S)
    E_grid = np.asarray(E_grid, dtype=complex)
    pots, Ls, res, excl = [], [], [], []
    for E in E_grid:
        near = np.min(np.abs(mu.points - E)) < guard
        excl.append(bool(near))
        pots.append(log_potential(mu, E))
        if near:
            Ls.append(math.nan)
            res.append(math.nan)
            continue
        L = L_exact(E) if L_exact is not None else converged_le(pot, alpha, E, y, le_tol).value
        Ls.append(L)
        res.append(abs(pots[-1] - L))
    return ThoulessReport(E_grid, np.array(pots), np.array(Ls), np.array(res), np.array(excl))


def accden_check(pot: FourierPotential, alpha, E, y, n, S, pl=None, points=None, le_tol=1e-3,
                 mu=None) -> AccdenResult:
    """Both sides of the relation between accelerations and the DOS at level ``y``.

    Left: ``L(E, i0)`` plus the integral of the fitted integer slopes over
    ``[0, y]``.  Right: the log-potential at ``E`` of the empirical DOS of
    ``H_n(x + i y)``.
    """
    from .accel import fit_quantized, le_profile

    if not pot.is_real:
        raise HypothesisViolation("the relation needs a real potential")
    L0 = converged_le(pot, alpha, E, 0.0, le_tol).value
    if y == 0:
        lhs = L0
        resid_fit = 0.0
    else:
        if pl is None:
            pts = points or max(11, int(math.ceil(abs(y) / 0.1)) + 1)
            prof = le_profile(pot, alpha, E, min(0.0, y), max(0.0, y), pts, le_tol)
            pl = fit_quantized(prof)
        resid_fit = pl.fit_residual
        lhs = L0 + pl.slope_integral(0.0, y)
    if not L0 > 3 * max(resid_fit, le_tol):
        raise HypothesisViolation(f"L(E, i0) = {L0:.3g} is not clearly positive")
    if mu is None:
        mu = empirical_dos(pot, alpha, y, n, S)
    rhs = log_potential(mu, E)
    return AccdenResult(lhs, rhs, abs(lhs - rhs), L0)
