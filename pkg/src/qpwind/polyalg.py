"""Laurent polynomials, coefficient recovery, Aberth-Ehrlich roots, Jensen check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRIM_REL = 1e-13


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class LaurentPoly:
    """``exp(log_scale) * sum_j coeffs[j] z^(k_min + j)``.

    Leading and trailing coefficients below ``trim_rel * max|coeff|`` are
    trimmed on construction (``k_min`` is shifted accordingly).  Pass
    ``trim_rel=0`` when tiny end coefficients are known to be genuine.
    """

    k_min: int
    coeffs: np.ndarray
    log_scale: float = 0.0
    trim_rel: float = TRIM_REL

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        k_min = int(self.k_min)
        big = np.max(np.abs(c)) if c.size else 0.0
        if big == 0:
            c, k_min = np.zeros(1, complex), 0
        else:
            keep = np.nonzero(np.abs(c) > self.trim_rel * big)[0]
            c = c[keep[0]: keep[-1] + 1]
            k_min += int(keep[0])
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "k_min", k_min)

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        """Degree of the associated polynomial ``z^{-k_min} p``."""
        return len(self.coeffs) - 1

    def as_dict(self) -> dict:
        s = math.exp(self.log_scale)
        return {self.k_min + j: complex(c * s) for j, c in enumerate(self.coeffs) if c != 0}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        p = horner(self.coeffs, z)
        out = p * z ** self.k_min * math.exp(self.log_scale)
        return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray
    converged: bool
    iterations: int = 0

    def __len__(self):
        return len(self.roots)


@dataclass(frozen=True)
class JensenSides:
    lhs: float
    rhs: float
    residual: float
    residual_shifted: float
    quadrature_points: int


def horner(coeffs, z):
    """Evaluate ``sum_j coeffs[j] z^j`` (ascending order)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _horner_with_derivative(coeffs, z):
    p = np.zeros(z.shape, dtype=complex) + coeffs[-1]
    dp = np.zeros(z.shape, dtype=complex)
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def poly_newton_ratio(coeffs):
    """Return ``z -> P(z) / P'(z)`` for ascending ``coeffs``.

    Outside the unit disc the reversed polynomial in ``1/z`` is used, which
    keeps intermediate magnitudes bounded for high degrees.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    d = len(coeffs) - 1
    rev = coeffs[::-1]

    def ratio(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        inner = np.abs(z) <= 1
        with np.errstate(divide="ignore", invalid="ignore"):
            if inner.any():
                p, dp = _horner_with_derivative(coeffs, z[inner])
                out[inner] = p / dp
            if (~inner).any():
                zo = z[~inner]
                w = 1.0 / zo
                r, dr = _horner_with_derivative(rev, w)
                out[~inner] = np.where(r == 0, 0.0, zo / (d - w * dr / r))
        return out

    return ratio


def newton_polygon_start(abs_coeffs, offset=0.4):
    """Initial guesses on circles read off the upper convex hull of ``log|c_k|``.

    Each hull edge from ``k_i`` to ``k_j`` contributes ``k_j - k_i`` points on
    the circle of radius ``(|c_{k_i}| / |c_{k_j}|)^(1/(k_j - k_i))``.
    """
    a = np.asarray(abs_coeffs, dtype=float)
    d = len(a) - 1
    with np.errstate(divide="ignore"):
        la = np.log(a)
    idx = [k for k in range(d + 1) if np.isfinite(la[k])]
    hull: list[int] = []
    for k in idx:
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            # drop k2 if it lies on or below the chord k1 -> k
            if (la[k2] - la[k1]) * (k - k1) <= (la[k] - la[k1]) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(k)
    guesses = []
    for i in range(len(hull) - 1):
        k1, k2 = hull[i], hull[i + 1]
        m = k2 - k1
        r = math.exp((la[k1] - la[k2]) / m)
        ang = 2 * math.pi * np.arange(m) / m + 2 * math.pi * i / d + offset
        guesses.append(r * np.exp(1j * ang))
    if hull and hull[0] > 0:
        guesses.append(np.zeros(hull[0], dtype=complex))
    return np.concatenate(guesses) if guesses else np.zeros(0, complex)


def aberth(newton_ratio, init, tol=1e-12, max_iter=500, at_floor=None):
    """Aberth-Ehrlich simultaneous iteration.

    ``newton_ratio(z)`` must return ``P(z)/P'(z)`` elementwise.  All roots are
    updated together from the previous sweep (Jacobi style); roots whose
    correction fell below ``tol * max(1, |z|)`` are frozen.  The optional
    ``at_floor(z)`` returns a mask of roots whose residual is already at the
    rounding level of the evaluation; such a root is frozen once its
    correction stops halving, or after 20 sweeps at that level.

    ``init`` of shape ``(B, d)`` runs ``B`` independent problems in one sweep
    (``newton_ratio`` then receives ``(B, d)`` arrays) and a list of
    :class:`RootSet` is returned.
    """
    z = np.array(init, dtype=complex)
    batched = z.ndim == 2
    if not batched:
        z = z[None, :]
    B, d = z.shape
    if d == 0:
        empty = RootSet(np.zeros(0, complex), np.zeros(0), True, 0)
        return [empty] * B if batched else empty
    active = np.ones((B, d), dtype=bool)
    eye = np.eye(d, dtype=bool)
    prev = np.full((B, d), np.inf)
    streak = np.zeros((B, d), dtype=int)
    it = 0
    while it < max_iter and active.any():
        it += 1
        N = newton_ratio(z if batched else z[0])
        N = np.asarray(N).reshape(B, d)
        diff = z[:, :, None] - z[:, None, :]
        diff[:, eye] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            S = np.sum(1.0 / diff, axis=2) - 1.0
            w = N / (1.0 - N * S)
        bad = ~np.isfinite(w)
        if bad.any():
            # exact hit (N = 0) or a coincidence: nudge instead of stepping
            w = np.where(bad & (N == 0), 0.0, w)
            w = np.where(~np.isfinite(w), 1e-8 * (1 + np.abs(z)), w)
        w = np.where(active, w, 0.0)
        aw = np.abs(w)
        done = aw < tol * np.maximum(1.0, np.abs(z))
        if at_floor is not None:
            floor = np.asarray(at_floor(z if batched else z[0])).reshape(B, d)
            streak = np.where(floor, streak + 1, 0)
            # keep iterating while the correction still shrinks (clusters tighten)
            done |= floor & ((aw > 0.5 * prev) | (streak >= 20))
            prev = aw
        z = z - w
        active &= ~done
    final = np.asarray(newton_ratio(z if batched else z[0])).reshape(B, d)
    residuals = np.abs(final) / np.maximum(1.0, np.abs(z))
    residuals = np.where(np.isfinite(residuals), residuals, 0.0)
    out = [RootSet(z[b], residuals[b], not active[b].any(), it) for b in range(B)]
    return out if batched else out[0]


def aberth_roots(p: LaurentPoly, tol=1e-12, max_iter=500, init=None) -> RootSet:
    """All roots of ``z^{-k_min} p(z)``, started from Newton-polygon circles."""
    if p.degree < 1:
        raise ValueError("need degree >= 1")
    if init is None:
        init = newton_polygon_start(np.abs(p.coeffs))
    return aberth(poly_newton_ratio(p.coeffs), init, tol, max_iter, horner_floor(p.coeffs))


def horner_floor(coeffs, safety=4.0):
    """Mask of points where ``|P(z)|`` is within the Horner rounding bound.

    The bound is ``2 d eps sum |c_k| |z|^k`` (times ``safety``).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    a = np.abs(coeffs)
    d = len(coeffs) - 1
    rev, arev = coeffs[::-1], a[::-1]
    u = safety * 2 * max(d, 1) * np.finfo(float).eps

    def mask(z):
        z = np.asarray(z, dtype=complex)
        az = np.abs(z)
        inner = az <= 1
        w = np.where(inner, z, 1.0 / np.where(z == 0, 1.0, z))
        val = np.where(inner, horner(coeffs, w), horner(rev, w))
        bound = np.where(inner, horner(a, np.abs(w)), horner(arev, np.abs(w)))
        return np.abs(val) <= u * bound.real

    return mask


def dft_interpolate(values, k_min: int, k_max: int, rho: float = 1.0) -> LaurentPoly:
    """Laurent polynomial with exponents in ``[k_min, k_max]`` through samples at
    ``rho * exp(2 pi i j / N)``.
    """
    values = np.asarray(values, dtype=complex)
    N = len(values)
    if N < k_max - k_min + 1:
        raise ValueError(f"{N} samples cannot determine {k_max - k_min + 1} coefficients")
    if not rho > 0:
        raise ValueError("sampling radius must be positive")
    spectrum = np.fft.fft(values) / N
    ks = np.arange(k_min, k_max + 1)
    coeffs = spectrum[ks % N] * np.exp(-ks * math.log(rho))
    return LaurentPoly(k_min, coeffs)


def dft_interpolate_radii(values, log_scales, radii, k_min, k_max, trim_rel=TRIM_REL) -> LaurentPoly:
    """Coefficient recovery from samples on several circles.

    ``values[r, j] * exp(log_scales[r, j])`` is the sample at
    ``radii[r] * exp(2 pi i j / N)``.  Each coefficient is taken from the
    circle with the smallest roundoff bound ``max|sample| / rho^k``, which is
    what keeps coefficients of widely different sizes accurate.
    """
    values = np.asarray(values, dtype=complex)
    log_scales = np.asarray(log_scales, dtype=float)
    R, N = values.shape
    if N < k_max - k_min + 1:
        raise ValueError(f"{N} samples per circle cannot determine {k_max - k_min + 1} coefficients")
    ks = np.arange(k_min, k_max + 1)
    best_bound = np.full(len(ks), np.inf)
    best = np.zeros(len(ks), dtype=complex)
    best_log = np.zeros(len(ks))
    for r in range(R):
        top = np.max(log_scales[r])
        scaled = values[r] * np.exp(log_scales[r] - top)
        spectrum = np.fft.fft(scaled) / N
        log_rho = math.log(radii[r])
        bound = top + np.log(np.max(np.abs(scaled))) - ks * log_rho
        better = bound < best_bound
        best_bound = np.where(better, bound, best_bound)
        best = np.where(better, spectrum[ks % N], best)
        best_log = np.where(better, top - ks * log_rho, best_log)
    with np.errstate(divide="ignore"):
        ref = float(np.max(np.log(np.abs(best)) + best_log))
    coeffs = best * np.exp(best_log - ref)
    return LaurentPoly(k_min, coeffs, ref, trim_rel)


def annulus_count(roots, r1: float, r2: float, boundary_tol=None) -> tuple[int, int]:
    """``(interior, boundary)`` root counts for the annulus ``r1 < |z| < r2``.

    ``boundary_tol`` defaults to ``1e-6 * r`` for each circle.
    """
    if not 0 < r1 < r2:
        raise ValueError("need 0 < r1 < r2")
    z = roots.roots if isinstance(roots, RootSet) else np.asarray(roots, dtype=complex)
    a = np.abs(z)
    t1 = 1e-6 * r1 if boundary_tol is None else boundary_tol
    t2 = 1e-6 * r2 if boundary_tol is None else boundary_tol
    on = (np.abs(a - r1) <= t1) | (np.abs(a - r2) <= t2)
    inside = (a > r1 + t1) & (a < r2 - t2) & ~on
    return int(np.count_nonzero(inside)), int(np.count_nonzero(on))


def _circle_mean_log(p: LaurentPoly, r: float, M: int, shift: float) -> float:
    x = 2 * math.pi * (np.arange(M) + shift) / M
    z = r * np.exp(1j * x)
    with np.errstate(divide="ignore"):
        vals = np.log(np.abs(horner(p.coeffs, z))) + p.k_min * math.log(r)
    return math.fsum(vals) / M + p.log_scale


def circle_mean_log(p: LaurentPoly, r: float, M0: int, shift=0.0, tol=1e-10, M_max=2**20):
    """Trapezoid mean of ``log|p|`` on ``|z| = r``, doubling until stable."""
    M = M0
    prev = _circle_mean_log(p, r, M, shift)
    while M < M_max:
        M *= 2
        cur = _circle_mean_log(p, r, M, shift)
        if abs(cur - prev) < tol:
            return cur, M
        prev = cur
    return prev, M


def jensen_sides(p: LaurentPoly, r1: float, r2: float, M=None, roots: RootSet | None = None,
                 boundary_tol=None) -> JensenSides:
    """Both sides of Jensen's formula on the closed annulus ``r1 <= |z| <= r2``.

    Left: difference of circle means of ``log|p|`` by quadrature (zeros on
    either circle are divided out first and their means added exactly).  Right: the
    interior zero sum, half-weighted boundary zeros on ``|z| = r1`` and the
    principal-value argument term on the inner circle, all from the roots.
    """
    if not 0 < r1 < r2:
        raise ValueError("need 0 < r1 < r2")
    M0 = M if M is not None else 2 * p.degree + 16
    if M0 < 2 * p.degree + 16:
        raise ValueError("quadrature needs at least 2*degree + 16 points")
    if roots is None:
        if p.degree >= 1:
            roots = aberth_roots(p)
            if not roots.converged:
                raise RootFindingError("root finder did not converge")
            z = roots.roots
        else:
            z = np.zeros(0, complex)
    else:
        z = roots.roots
    a = np.abs(z)
    t1 = 1e-6 * r1 if boundary_tol is None else boundary_tol
    t2 = 1e-6 * r2 if boundary_tol is None else boundary_tol
    on1 = np.abs(a - r1) <= t1
    on2 = np.abs(a - r2) <= t2
    interior = (a > r1) & (a < r2) & ~on1 & ~on2
    inside1 = (a < r1) & ~on1
    log_ratio = math.log(r2 / r1)
    # principal-value winding on |z| = r1 including the pole order at 0
    pv = np.count_nonzero(inside1) + 0.5 * np.count_nonzero(on1) + p.k_min
    rhs = math.fsum(np.log(r2 / a[interior])) + 0.5 * np.count_nonzero(on1) * log_ratio + log_ratio * pv

    # boundary zeros make log|p| singular on a circle; divide them out and
    # add their exact circle means log max(r, |a|) back
    q, exact = p, 0.0
    on = on1 | on2
    if on.any():
        c = q.coeffs[::-1]
        for a_b in z[on]:
            c, _ = np.polydiv(c, np.array([1.0, -a_b]))
        q = LaurentPoly(p.k_min, c[::-1], p.log_scale, trim_rel=0.0)
        exact = math.fsum(math.log(max(r2, b) / max(r1, b)) for b in a[on])

    def lhs_at(shift):
        m2, M2 = circle_mean_log(q, r2, M0, shift)
        m1, M1 = circle_mean_log(q, r1, M0, shift)
        return m2 - m1 + exact, max(M1, M2)

    lhs, used = lhs_at(0.0)
    lhs_s, _ = lhs_at(0.5)
    return JensenSides(lhs, rhs, abs(lhs - rhs), abs(lhs_s - rhs), used)


def jensen_residual(p: LaurentPoly, r1: float, r2: float, M=None, roots=None) -> float:
    """``|LHS - RHS|`` of the closed-annulus Jensen formula."""
    return jensen_sides(p, r1, r2, M, roots).residual
