"""Desk-scale acceptance checks.

Each ``check_*`` function returns a :class:`CriterionResult`.  Tolerances
live in :data:`DEFAULT_TOLERANCES` and can be overridden (``qpwind verify``
reads them from the config file).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import accel, cocycle, dos, polyalg, winding, zeros
from .model import GOLDEN_ALPHA, CocycleParams, FourierPotential, amo_potential, eval_potential, free_le

DEFAULT_TOLERANCES = {
    "free_le": 1e-3,
    "free_le_seconds": 2.0,
    "amo_le": 5e-3,
    "amo_le_seconds": 60.0,
    "slope_dev": 0.05,
    "slope_margin": 0.05,
    "breakpoint": 0.02,
    "transition_seconds": 300.0,
    "zero_residual": 1e-8,
    "zero_eps": 0.05,
    "zero_assigned": 0.90,
    "zero_circle_frac": 0.05,
    "zero_symmetry": 1e-6,
    "zero_seconds": 120.0,
    "jensen": 1e-8,
    "jensen_seconds": 30.0,
    "thouless_free": 0.05,
    "thouless_amo": 0.1,
    "thouless_seconds": 300.0,
    "accden": 0.1,
    "ldt_slack": 0.02,
    "ldt_max": 0.2,
}

LAM = 0.5
E_REF = 3.5


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.1f}s) {self.detail}"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "detail": self.detail}


def _tol(tols, key):
    return (tols or {}).get(key, DEFAULT_TOLERANCES[key])


class _Cache:
    """Shared intermediate results (L0, the E=3.5 profile) across criteria."""

    def __init__(self, alpha=GOLDEN_ALPHA):
        self.alpha = alpha
        self.pot = amo_potential(LAM)
        self._L0 = None
        self._pl = None
        self._prof = None

    @property
    def L0(self):
        if self._L0 is None:
            self._L0 = cocycle.converged_le(self.pot, self.alpha, E_REF, 0.0, 1e-4).value
        return self._L0

    @property
    def gamma(self):
        return self.L0 + math.log(2.0)

    def profile(self):
        if self._prof is None:
            self._prof = accel.le_profile(self.pot, self.alpha, E_REF, 0.0, 2.5, 26, 1e-3)
            self._pl = accel.fit_quantized(self._prof)
        return self._prof, self._pl


def check_free_le(tols=None, cache=None):
    t = time.perf_counter()
    r = cocycle.converged_le(FourierPotential(), GOLDEN_ALPHA, 3.0, 0.0, 1e-4)
    exact = math.log((3 + math.sqrt(5)) / 2)
    dt = time.perf_counter() - t
    err = abs(r.value - exact)
    ok = err < _tol(tols, "free_le") and dt < _tol(tols, "free_le_seconds")
    return CriterionResult(1, "free-cocycle LE", ok, {"value": r.value, "exact": exact, "error": err}, dt)


def check_amo_le(tols=None, cache=None):
    t = time.perf_counter()
    pot = amo_potential(LAM)
    errs = {}
    for y in (0.0, 0.2, 0.5, 0.7, 1.0, 1.5):
        val = cocycle.averaged_le(pot, CocycleParams(GOLDEN_ALPHA, 0.0, y, 4096), 512).value
        errs[y] = abs(val - max(math.log(LAM) + y, 0.0))
    dt = time.perf_counter() - t
    worst = max(errs.values())
    ok = worst < _tol(tols, "amo_le") and dt < _tol(tols, "amo_le_seconds")
    return CriterionResult(2, "AMO Lyapunov formula", ok, {"max_error": worst}, dt)


def check_quantization(tols=None, cache=None):
    cache = cache or _Cache()
    t = time.perf_counter()
    detail = {}
    ok = True
    for E in (3.5, 4.0, 2 + 2j):
        if E == E_REF:
            prof, pl = cache.profile()
        else:
            prof = accel.le_profile(cache.pot, cache.alpha, E, 0.0, 2.5, 26, 1e-3)
            pl = accel.fit_quantized(prof)
        dev = accel.slope_deviations(prof, pl, _tol(tols, "slope_margin"))
        worst = float(dev.max()) if dev.size else 0.0
        detail[str(E)] = {"slopes": list(pl.slopes), "breakpoints": list(pl.breakpoints),
                          "max_slope_dev": worst}
        ok &= worst < _tol(tols, "slope_dev")
    return CriterionResult(3, "acceleration quantization", ok, detail, time.perf_counter() - t)


def check_transition(tols=None, cache=None):
    cache = cache or _Cache()
    t = time.perf_counter()
    _, pl = cache.profile()
    gamma = cache.gamma
    bp_err = min((abs(b - gamma) for b in pl.breakpoints), default=math.inf)
    ok = bp_err < _tol(tols, "breakpoint")
    detail = {"L0": cache.L0, "gamma": gamma, "breakpoint_error": bp_err}
    for label, y, expect in (("below", 0.5 * gamma, 0), ("above", gamma + 0.3, 1)):
        for side in ("+", "-"):
            nu = winding.winding_limit(cache.pot, cache.alpha, E_REF, y, side)
            om = accel.acceleration_at(pl, y, side)
            detail[f"{label}{side}"] = {"nu": nu, "omega": om}
            ok &= nu == expect == om
    dt = time.perf_counter() - t
    ok &= dt < _tol(tols, "transition_seconds")
    return CriterionResult(4, "topological transition", ok, detail, dt)


def check_zero_circles(tols=None, cache=None):
    cache = cache or _Cache()
    t = time.perf_counter()
    n = 100
    gamma = cache.gamma
    rs = zeros.fn_zeros(cache.pot, cache.alpha, E_REF, n)
    pl = accel.PiecewiseLinear((gamma,), (0, 1), cache.L0, 0.0, 2.5, 0.0)
    eps = _tol(tols, "zero_eps")
    rep = zeros.zero_circle_report(cache.pot, cache.alpha, E_REF, n, pl, eps, rs=rs)
    dt = time.perf_counter() - t
    assigned = 1.0 - rep.unassigned_fraction
    fr_ok = all(abs(f - 0.5) <= _tol(tols, "zero_circle_frac") for _, f in rep.fractions)
    sym = zeros.symmetry_check(rs, _tol(tols, "zero_symmetry"))
    ok = (rs.converged and len(rs) == 2 * n and float(rs.residuals.max()) < _tol(tols, "zero_residual")
          and assigned >= _tol(tols, "zero_assigned") and fr_ok and sym and dt < _tol(tols, "zero_seconds"))
    detail = {"roots": len(rs), "max_residual": float(rs.residuals.max()), "assigned": assigned,
              "fractions": [list(f) for f in rep.fractions], "symmetric": sym}
    return CriterionResult(5, "zero circles", ok, detail, dt)


COUNT_ANNULI = ((-2.5, -1.0), (-1.9, -1.78), (1.79, 1.86), (0.5, 1.83), (-3.0, 3.0))


def _count_with_nudge(cache, y1, y2, n, roots, step=1e-3):
    for k in range(8):
        a, b = y1 - k * step, y2 + k * step
        try:
            chk = winding.count_consistency(cache.pot, cache.alpha, E_REF, a, b, n, roots)
        except winding.ContourZeroError:
            continue
        if chk.boundary == 0:
            return chk
    raise winding.ContourZeroError(f"no zero-free levels near ({y1}, {y2})", y1)


def check_count_identity(tols=None, cache=None):
    cache = cache or _Cache()
    t = time.perf_counter()
    ok = True
    detail = {}
    for n in (20, 60, 100):
        roots = zeros.fn_zeros(cache.pot, cache.alpha, E_REF, n)
        rows = []
        for y1, y2 in COUNT_ANNULI:
            chk = _count_with_nudge(cache, y1, y2, n, roots)
            lhs, rhs = chk.doubled_counts
            rows.append((round(chk.y1, 4), round(chk.y2, 4), lhs, rhs))
            ok &= lhs == rhs
        detail[n] = rows
    return CriterionResult(6, "count identity", ok, detail, time.perf_counter() - t)


def random_jensen_case(rng, r1=0.7, r2=1.3, gap=1e-3):
    """A random Laurent polynomial with known roots kept ``gap`` away from both circles."""
    d = int(rng.integers(1, 41))
    roots = []
    while len(roots) < d:
        r = math.exp(rng.uniform(math.log(0.3), math.log(2.0)))
        if min(abs(r - r1), abs(r - r2)) > gap:
            roots.append(r * np.exp(2j * math.pi * rng.random()))
    roots = np.array(roots)
    lead = complex(rng.normal(), rng.normal())
    coeffs = lead * np.poly(roots)[::-1]
    k_min = int(rng.integers(-3, 2))
    return polyalg.LaurentPoly(k_min, coeffs, trim_rel=0.0), roots


def check_jensen(tols=None, cache=None, count=100, seed=20240501):
    t = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        p, _ = random_jensen_case(rng)
        worst = max(worst, polyalg.jensen_residual(p, 0.7, 1.3))
    dt = time.perf_counter() - t
    ok = worst < _tol(tols, "jensen") and dt < _tol(tols, "jensen_seconds")
    return CriterionResult(7, "Jensen identity", ok, {"cases": count, "max_residual": worst}, dt)


def check_thouless(tols=None, cache=None):
    t = time.perf_counter()
    probes3 = 3.0 * np.exp(2j * math.pi * (np.arange(16) + 0.5) / 16)
    free = FourierPotential()
    rep1 = dos.thouless_report(free, GOLDEN_ALPHA, 0.0, 200, 1, probes3, L_exact=free_le)
    probes6 = 6.0 * np.exp(2j * math.pi * (np.arange(16) + 0.5) / 16)
    rep2 = dos.thouless_report(amo_potential(LAM), GOLDEN_ALPHA, 1.0, 128, 64, probes6)
    dt = time.perf_counter() - t
    ok = (rep1.max_residual < _tol(tols, "thouless_free") and rep2.max_residual < _tol(tols, "thouless_amo")
          and not rep1.excluded.any() and not rep2.excluded.any() and dt < _tol(tols, "thouless_seconds"))
    return CriterionResult(8, "Thouless formula", ok,
                           {"free_max": rep1.max_residual, "amo_max": rep2.max_residual}, dt)


def check_accden(tols=None, cache=None):
    cache = cache or _Cache()
    t = time.perf_counter()
    r = dos.accden_check(cache.pot, cache.alpha, E_REF, 1.5, 128, 64)
    dt = time.perf_counter() - t
    ok = r.residual < _tol(tols, "accden")
    return CriterionResult(9, "accden identity", ok,
                           {"lhs": r.lhs, "rhs": r.rhs, "residual": r.residual}, dt)


# --- property suites -------------------------------------------------------

EPS = np.finfo(float).eps


def random_potential(rng, max_degree=3, real=None):
    d = int(rng.integers(1, max_degree + 1))
    real = bool(rng.integers(0, 2)) if real is None else real
    coeffs = {}
    for k in range(1, d + 1):
        c = complex(rng.normal(), rng.normal()) * 0.5 / k
        coeffs[k] = c
        coeffs[-k] = c.conjugate() if real else complex(rng.normal(), rng.normal()) * 0.5 / k
    if real:
        coeffs[0] = rng.normal() * 0.3
    return FourierPotential(coeffs)


def prop_unimodular(rng):
    pot = random_potential(rng, 2, real=True)
    n = int(rng.integers(1, 61))
    params = CocycleParams(GOLDEN_ALPHA, complex(rng.uniform(-2, 2), rng.uniform(-0.05, 0.05)),
                           rng.uniform(-0.3, 0.3), n)
    sm = cocycle.transfer_product(pot, params, rng.uniform(0, 2 * math.pi))
    sigma = math.exp(float(cocycle._top_singular_log(sm.m)) + sm.log_scale)
    # floor: roundoff in det of the scaled matrix is ~eps * ||M_n||^2
    return abs(sm.det() - 1) <= n * 1e-12 + 8 * EPS * sigma ** 2


def prop_entry_identity(rng):
    pot = random_potential(rng)
    n = int(rng.integers(1, 51))
    E = complex(rng.normal() * 2, rng.normal())
    y = rng.uniform(-0.5, 0.5)
    x = rng.uniform(0, 2 * math.pi)
    p = CocycleParams(GOLDEN_ALPHA, E, y, n)
    M = cocycle.transfer_product(pot, p, x).value

    def f(k, xx):
        if k == 0:
            return 1.0
        if k < 0:
            return 0.0
        return cocycle.det_recurrence(pot, p.with_(n=k), xx).values[0]

    a = p.alpha
    expect = np.array([[f(n, x), -f(n - 1, x + a)], [f(n - 1, x), -f(n - 2, x + a)]])
    return np.max(np.abs(M - expect)) <= 1e-9 * np.max(np.abs(M))


def prop_vieta(rng):
    pot = random_potential(rng, 2)
    n = int(rng.integers(2, 65))
    x, y = rng.uniform(0, 2 * math.pi), rng.uniform(-0.5, 0.5)
    rs = dos.truncated_spectrum(pot, GOLDEN_ALPHA, x, y, n)
    diag = eval_potential(pot, x + 1j * y + np.arange(1, n + 1) * GOLDEN_ALPHA)
    tr_ok = abs(np.sum(rs.roots) - np.sum(diag)) <= 1e-8 * (np.sum(np.abs(diag)) + 1)
    f0 = cocycle.det_recurrence(pot, CocycleParams(GOLDEN_ALPHA, 0.0, y, n), x)
    log_det = math.log(abs(f0.f_cur)) + f0.log_scale
    log_prod = math.fsum(np.log(np.abs(rs.roots)))
    det_ok = abs(log_prod - log_det) <= 1e-6 * max(1.0, abs(log_det))
    return tr_ok and det_ok


def prop_dft_roundtrip(rng):
    width = int(rng.integers(1, 31))
    k_min = int(rng.integers(-15, 1))
    c = rng.normal(size=width) + 1j * rng.normal(size=width)
    c[0] = c[0] or 1.0
    c[-1] = c[-1] or 1.0
    rho = rng.uniform(0.9, 1.1)
    N = 1 << max(2, (width - 1).bit_length() + 1)
    z = rho * np.exp(2j * math.pi * np.arange(N) / N)
    p = polyalg.LaurentPoly(k_min, c, trim_rel=0.0)
    q = polyalg.dft_interpolate(p(z), k_min, k_min + width - 1, rho)
    got = np.zeros(width, complex)
    got[q.k_min - k_min: q.k_min - k_min + len(q.coeffs)] = q.coeffs
    return np.max(np.abs(got - c)) < 1e-10 * max(1.0, np.max(np.abs(c)))


def prop_reconstruction(rng):
    d = int(rng.integers(1, 61))
    roots = np.exp(rng.uniform(math.log(0.5), math.log(2.0), d)) * np.exp(2j * math.pi * rng.random(d))
    lead = complex(rng.normal(), rng.normal())
    coeffs = lead * np.poly(roots)[::-1]
    rs = polyalg.aberth_roots(polyalg.LaurentPoly(0, coeffs))
    back = lead * np.poly(rs.roots)[::-1]
    return rs.converged and np.max(np.abs(back - coeffs)) <= 1e-7 * np.max(np.abs(coeffs))


def prop_le_even(rng):
    pot = random_potential(rng, 2, real=True)
    E = rng.uniform(-4, 4)
    y = rng.uniform(0.05, 1.0)
    n = int(rng.integers(16, 129))
    a = cocycle.averaged_le(pot, CocycleParams(GOLDEN_ALPHA, E, y, n), 32, refine=True)
    b = cocycle.averaged_le(pot, CocycleParams(GOLDEN_ALPHA, E, -y, n), 32, refine=True)
    return abs(a.value - b.value) <= 2 * max(a.est_error, b.est_error) + 1e-12


def prop_nu_integer(rng):
    while True:
        pot = random_potential(rng, 2)
        n = int(rng.integers(1, 61))
        p = CocycleParams(GOLDEN_ALPHA, complex(rng.normal() * 2, rng.normal()), rng.uniform(-1, 1), n)
        try:
            w = winding.winding_n(pot, p)
        except winding.ContourZeroError:
            continue
        return (abs(w.angle_sum - 2 * math.pi * w.total_winding) < 1e-6
                and w.nu_n * n == -w.total_winding)


PROPERTIES = {
    "unimodularity": prop_unimodular,
    "transfer entries": prop_entry_identity,
    "vieta trace/det": prop_vieta,
    "dft round-trip": prop_dft_roundtrip,
    "root reconstruction": prop_reconstruction,
    "LE evenness": prop_le_even,
    "nu_n integer": prop_nu_integer,
}


def check_properties(tols=None, cache=None, per_property=75, seed=7):
    t = time.perf_counter()
    rng = np.random.default_rng(seed)
    failures = {}
    total = 0
    for name, prop in PROPERTIES.items():
        bad = sum(0 if prop(rng) else 1 for _ in range(per_property))
        total += per_property
        failures[name] = bad
    ok = total >= 500 and sum(failures.values()) == 0
    return CriterionResult(10, "property suites", ok, {"cases": total, "failures": failures},
                           time.perf_counter() - t)


def check_ldt(tols=None, cache=None, M=512):
    t = time.perf_counter()
    pot = amo_potential(LAM)
    fr = {n: cocycle.ldt_deviation_fraction(pot, CocycleParams(GOLDEN_ALPHA, E_REF, 0.0, n), 0.1, M)
          for n in (500, 4000)}
    ok = fr[4000] <= fr[500] + _tol(tols, "ldt_slack") and max(fr.values()) <= _tol(tols, "ldt_max")
    return CriterionResult(11, "empirical LDT", ok, {"fractions": fr}, time.perf_counter() - t)


CHECKS = (check_free_le, check_amo_le, check_quantization, check_transition, check_zero_circles,
          check_count_identity, check_jensen, check_thouless, check_accden, check_properties,
          check_ldt)


def run_all(tols=None, only=None):
    cache = _Cache()
    out = []
    for chk in CHECKS:
        if only and chk.__name__ not in only:
            continue
        try:
            res = chk(tols, cache)
        except Exception as exc:  # a crash is a failed criterion, not an aborted run
            res = CriterionResult(CHECKS.index(chk) + 1, chk.__name__, False, {"error": repr(exc)})
        out.append(res)
    return out
