"""Transfer matrices, Dirichlet determinants and Lyapunov exponents.

Everything here is vectorised over phases: the loops run over the ``n`` steps
of the orbit and numpy handles a whole grid of phases (or energies) at once.
Products are kept as a unit-size value times ``exp(log_scale)``; a rescale is
applied to an entry only when its magnitude leaves ``[1/2, 2]``.

Sign convention: ``f_n`` is ``det(E - H_n)`` as produced by the recurrence
``f_l = (E - v_l) f_{l-1} - f_{l-2}``; ``det(H_n - E) = (-1)^n f_n``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import TWO_PI, CocycleParams, FourierPotential

_LO, _HI = 0.5, 2.0


@dataclass(frozen=True)
class ScaledMatrix:
    """2x2 matrix ``exp(log_scale) * m``."""

    m: np.ndarray
    log_scale: float

    @property
    def value(self) -> np.ndarray:
        return self.m * math.exp(self.log_scale)

    def det(self) -> complex:
        m = self.m
        d = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        return complex(d * math.exp(2.0 * self.log_scale))


@dataclass(frozen=True)
class ScaledPair:
    """``(f_n, f_{n-1}) = exp(log_scale) * (f_cur, f_prev)``."""

    f_cur: complex
    f_prev: complex
    log_scale: float

    @property
    def values(self) -> tuple[complex, complex]:
        s = math.exp(self.log_scale)
        return self.f_cur * s, self.f_prev * s


@dataclass(frozen=True)
class LEResult:
    value: float
    n_used: int
    grid_used: int
    est_error: float = 0.0


class LENotConverged(RuntimeError):
    """Raised when n/grid doubling hits its caps before reaching ``tol``."""

    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = list(estimates)


def orbit_potential(pot: FourierPotential, alpha: float, theta0, n: int, derivative=False):
    """Yield ``v(theta0 + l alpha)`` for ``l = 1..n``.

    With ``derivative=True`` also yields ``d v / d z`` where
    ``z = exp(i theta0)``, i.e. the derivative used for zeros in the phase.
    """
    theta0 = np.asarray(theta0, dtype=complex)
    ks, amps = pot.modes
    base = [c * np.exp(1j * k * theta0) for k, c in zip(ks, amps)]
    inv_z = np.exp(-1j * theta0) if derivative else None
    zero = np.zeros(theta0.shape, dtype=complex)
    for l in range(1, n + 1):
        v = zero
        dv = zero
        for k, b in zip(ks, base):
            # exact rotation per step; no accumulated phase drift
            term = b * cmath.exp(1j * k * math.fmod(l * alpha, TWO_PI))
            v = v + term
            if derivative:
                dv = dv + k * term
        if derivative:
            yield v, dv * inv_z
        else:
            yield v


def _rescale(arrays, log_scale):
    mag = np.abs(arrays[0])
    for a in arrays[1:]:
        mag = np.maximum(mag, np.abs(a))
    bad = (mag > _HI) | (mag < _LO)
    if not np.any(bad):
        return arrays, log_scale
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(bad & (mag > 0), mag, 1.0)
        out = [a / s for a in arrays]
        log_scale = log_scale + np.log(s)
    return out, log_scale


def transfer_batch(pot, alpha, E, theta0, n):
    """Scaled ``M_n`` for every phase in ``theta0`` (any shape).

    Returns ``(m, log_scale)`` with ``m`` of shape ``theta0.shape + (2, 2)``.
    """
    theta0 = np.asarray(theta0, dtype=complex)
    E = np.asarray(E, dtype=complex)
    shape = np.broadcast_shapes(theta0.shape, E.shape)
    a = np.ones(shape, complex)
    b = np.zeros(shape, complex)
    c = np.zeros(shape, complex)
    d = np.ones(shape, complex)
    ls = np.zeros(shape)
    for v in orbit_potential(pot, alpha, theta0, n):
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("non-finite potential value along the orbit")
        t = E - v
        a, b, c, d = t * a - c, t * b - d, a, b
        (a, b, c, d), ls = _rescale((a, b, c, d), ls)
    m = np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)
    return m, ls


def det_batch(pot, alpha, E, theta0, n):
    """Scaled ``(f_n, f_{n-1})`` for broadcast arrays of energies and phases."""
    theta0 = np.asarray(theta0, dtype=complex)
    E = np.asarray(E, dtype=complex)
    shape = np.broadcast_shapes(theta0.shape, E.shape)
    f = np.ones(shape, complex)
    g = np.zeros(shape, complex)
    ls = np.zeros(shape)
    for v in orbit_potential(pot, alpha, theta0, n):
        f, g = (E - v) * f - g, f
        (f, g), ls = _rescale((f, g), ls)
    return f, g, ls


def det_newton_ratio(pot, alpha, E, theta0, n, wrt="E"):
    """``f_n / (d f_n / d var)`` where ``var`` is the energy or ``z = e^{i theta0}``.

    The derivative is propagated alongside the recurrence, so no polynomial
    coefficients are formed.  Returns ``(ratio, log|f_n|)``.
    """
    theta0 = np.asarray(theta0, dtype=complex)
    E = np.asarray(E, dtype=complex)
    shape = np.broadcast_shapes(theta0.shape, E.shape)
    f1 = np.ones(shape, complex)
    f0 = np.zeros(shape, complex)
    d1 = np.zeros(shape, complex)
    d0 = np.zeros(shape, complex)
    ls = np.zeros(shape)
    if wrt == "E":
        for v in orbit_potential(pot, alpha, theta0, n):
            t = E - v
            f1, f0, d1, d0 = t * f1 - f0, f1, f1 + t * d1 - d0, d1
            (f1, f0, d1, d0), ls = _rescale((f1, f0, d1, d0), ls)
    elif wrt == "z":
        for v, dv in orbit_potential(pot, alpha, theta0, n, derivative=True):
            t = E - v
            f1, f0, d1, d0 = t * f1 - f0, f1, -dv * f1 + t * d1 - d0, d1
            (f1, f0, d1, d0), ls = _rescale((f1, f0, d1, d0), ls)
    else:
        raise ValueError("wrt must be 'E' or 'z'")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = f1 / d1
        logabs = np.log(np.abs(f1)) + ls
    return ratio, logabs


def _top_singular_log(m):
    """log of the largest singular value of a stack of 2x2 matrices."""
    fro2 = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = np.abs(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])
    disc = np.sqrt(np.maximum((fro2 - 2 * det) * (fro2 + 2 * det), 0.0))
    return 0.5 * np.log(0.5 * (fro2 + disc))


def _fsum_mean(values) -> float:
    values = np.asarray(values, dtype=float).ravel()
    return math.fsum(values) / values.size


def _theta0(params: CocycleParams, x):
    return np.asarray(x, dtype=float) + 1j * params.y


def transfer_product(pot: FourierPotential, params: CocycleParams, x: float) -> ScaledMatrix:
    """n-step transfer matrix ``M_n(x + i y)`` with log-rescaling."""
    m, ls = transfer_batch(pot, params.alpha, params.E, _theta0(params, x), params.n)
    return ScaledMatrix(m, float(ls))


def finite_le_grid(pot, params: CocycleParams, xs) -> np.ndarray:
    """``(1/n) log ||M_n(x + i y)||_2`` for an array of real phases."""
    m, ls = transfer_batch(pot, params.alpha, params.E, _theta0(params, xs), params.n)
    return (_top_singular_log(m) + ls) / params.n


def finite_le(pot, params: CocycleParams, x: float) -> float:
    x = math.fmod(float(x), TWO_PI)
    return float(finite_le_grid(pot, params, x))


def phase_grid(M: int) -> np.ndarray:
    return TWO_PI * np.arange(M) / M


def averaged_le(pot, params: CocycleParams, M: int, refine=False, method="grid") -> LEResult:
    """Phase-averaged finite-n exponent on the uniform grid ``2 pi j / M``.

    ``refine=True`` also evaluates the ``2M`` grid and reports the change as
    ``est_error``.  ``method="birkhoff"`` instead follows the single orbit of
    ``x = 0`` for ``n * M`` steps.
    """
    if M < 1:
        raise ValueError("grid size must be >= 1")
    if method == "birkhoff":
        long = params.with_(n=params.n * M)
        return LEResult(finite_le(pot, long, 0.0), long.n, 1, 0.0)
    if method != "grid":
        raise ValueError(f"unknown averaging method {method!r}")
    value = _fsum_mean(finite_le_grid(pot, params, phase_grid(M)))
    if not refine:
        return LEResult(value, params.n, M, 0.0)
    fine = _fsum_mean(finite_le_grid(pot, params, phase_grid(2 * M)))
    return LEResult(fine, params.n, 2 * M, abs(fine - value))


def converged_le(pot, alpha, E, y, tol=1e-3, n0=256, M0=32, n_max=2**15, M_max=2**11) -> LEResult:
    """Double ``n`` and the phase grid until successive estimates agree to ``tol``.

    Phase-independent potentials use a single phase.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n, M = n0, (1 if pot.degree == 0 else M0)
    history = []
    prev = None
    while True:
        params = CocycleParams(alpha, E, y, n)
        est = averaged_le(pot, params, M).value
        history.append((n, M, est))
        if prev is not None and abs(est - prev) < tol:
            return LEResult(est, n, M, abs(est - prev))
        if n >= n_max:
            raise LENotConverged(
                f"LE not converged at E={complex(E)}, y={y}: last estimates "
                f"{history[-2:]}", history[-2:]
            )
        prev = est
        n = min(2 * n, n_max)
        if pot.degree:
            M = min(2 * M, M_max)


def det_recurrence(pot, params: CocycleParams, x: float) -> ScaledPair:
    """``(f_n, f_{n-1})`` at phase ``x + i y`` via the three-term recurrence."""
    f, g, ls = det_batch(pot, params.alpha, params.E, _theta0(params, x), params.n)
    return ScaledPair(complex(f), complex(g), float(ls))


def log_abs_fn_grid(pot, params: CocycleParams, xs):
    """``log|f_n|`` and ``arg f_n`` on an array of phases (``-inf``/nan at exact zeros)."""
    f, _, ls = det_batch(pot, params.alpha, params.E, _theta0(params, xs), params.n)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(f)) + ls
    arg = np.where(f == 0, np.nan, np.angle(f))
    return logabs, arg


def log_abs_fn(pot, params: CocycleParams, x: float) -> tuple[float, float]:
    logabs, arg = log_abs_fn_grid(pot, params, float(x))
    return float(logabs), float(arg)


def ldt_deviation_fraction(pot, params: CocycleParams, epsilon: float, M: int) -> float:
    """Fraction of grid phases where ``(1/n) log|f_n|`` strays more than ``epsilon``
    from its grid mean.  Exact zeros count as deviating.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if M < 16:
        raise ValueError("need at least 16 phases")
    logabs, _ = log_abs_fn_grid(pot, params, phase_grid(M))
    per_step = logabs / params.n
    finite = np.isfinite(per_step)
    if not finite.any():
        return 1.0
    mean = _fsum_mean(per_step[finite])
    dev = ~finite | (np.abs(np.where(finite, per_step, 0.0) - mean) > epsilon)
    return float(np.count_nonzero(dev)) / M
