"""Randomized invariants (hypothesis)."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qpwind import cocycle, polyalg, winding
from qpwind.model import GOLDEN_ALPHA, CocycleParams, FourierPotential

finite = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def potentials(draw, real=False, max_degree=2):
    d = draw(st.integers(1, max_degree))
    coeffs = {}
    for k in range(1, d + 1):
        c = complex(draw(finite), draw(finite))
        coeffs[k] = c
        coeffs[-k] = c.conjugate() if real else complex(draw(finite), draw(finite))
    return FourierPotential(coeffs)


@settings(max_examples=60, deadline=None)
@given(potentials(real=True), st.integers(1, 40), st.floats(-2, 2), st.floats(0, 6.28))
def test_unimodular(pot, n, E, x):
    sm = cocycle.transfer_product(pot, CocycleParams(GOLDEN_ALPHA, E, 0.0, n), x)
    sigma2 = math.exp(2 * (float(cocycle._top_singular_log(sm.m)) + sm.log_scale))
    assert abs(sm.det() - 1) <= n * 1e-12 + 8 * np.finfo(float).eps * sigma2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 25), st.integers(-10, 0), st.floats(0.8, 1.25), st.integers(0, 2**32 - 1))
def test_dft_round_trip(width, k_min, rho, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=width) + 1j * rng.normal(size=width)
    N = 1 << max(2, width.bit_length() + 1)
    z = rho * np.exp(2j * np.pi * np.arange(N) / N)
    p = polyalg.LaurentPoly(k_min, c, trim_rel=0.0)
    q = polyalg.dft_interpolate(p(z), k_min, k_min + width - 1, rho)
    got = np.array([q.as_dict().get(k, 0) for k in range(k_min, k_min + width)])
    assert np.max(np.abs(got - c)) < 1e-10 * max(1.0, np.max(np.abs(c)))


@settings(max_examples=40, deadline=None)
@given(potentials(), st.integers(1, 30), finite, st.floats(-1, 1))
def test_nu_is_integer_over_n(pot, n, e, y):
    p = CocycleParams(GOLDEN_ALPHA, 2 * e + 0.5j * e, y, n)
    try:
        w = winding.winding_n(pot, p)
    except winding.ContourZeroError:
        return
    assert w.nu_n * n == -w.total_winding
    assert abs(w.angle_sum - 2 * math.pi * w.total_winding) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=0.3, max_magnitude=3.0), min_size=1, max_size=30))
def test_roots_reconstruct_polynomial(roots):
    # distinct roots; exact multiple roots only come back as clusters
    z = np.array(roots)
    assume(len(z) < 2 or np.min(np.abs(z[:, None] - z[None, :]) + np.eye(len(z))) > 0.05)
    c = np.poly(roots)[::-1]
    rs = polyalg.aberth_roots(polyalg.LaurentPoly(0, c, trim_rel=0.0))
    back = np.poly(rs.roots)[::-1]
    assert rs.converged
    assert np.max(np.abs(back - c)) <= 1e-7 * np.max(np.abs(c))
