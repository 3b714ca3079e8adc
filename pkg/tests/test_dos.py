import math

import numpy as np
import pytest

from conftest import dense_h, match_sets
from qpwind import dos
from qpwind.model import FourierPotential, free_le


@pytest.mark.parametrize("y", [0.0, 0.8])
def test_spectrum_matches_eigvals(trig3, alpha, y):
    n = 40
    rs = dos.truncated_spectrum(trig3, alpha, 0.7, y, n)
    ev = np.linalg.eigvals(dense_h(trig3, alpha, 0.7 + 1j * y, n))
    assert rs.converged and match_sets(rs.roots, ev) < 1e-10


def test_real_potential_real_spectrum(amo, alpha):
    rs = dos.truncated_spectrum(amo, alpha, 0.2, 0.0, 30)
    assert np.max(np.abs(rs.roots.imag)) < 1e-10


def test_charpoly_coefficients(trig3, alpha):
    n = 8
    p = dos.charpoly_in_E(trig3, alpha, 0.3, 0.2, n)
    ev = np.linalg.eigvals(dense_h(trig3, alpha, 0.3 + 0.2j, n))
    np.testing.assert_allclose(p.coeffs, np.poly(ev)[::-1], atol=1e-9)


def test_charpoly_ill_conditioned(amo, alpha):
    with pytest.raises(dos.CharpolyIllConditioned):
        dos.charpoly_in_E(amo, alpha, 0.3, 0.0, 150)


def test_empirical_dos_shape(amo, alpha):
    mu = dos.empirical_dos(amo, alpha, 0.5, 10, 6, batch=4)
    assert mu.points.size == 60 and mu.weight == pytest.approx(1 / 60)


def test_log_potential():
    mu = dos.EmpiricalMeasure(np.array([0.0, 2.0]), 2, 1)
    assert dos.log_potential(mu, 1.0 + 1j) == pytest.approx(0.5 * (0.5 * math.log(2) + 0.5 * math.log(2)))
    assert dos.log_potential(mu, 2.0) == -math.inf


def test_thouless_free(alpha):
    probes = 3.0 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)
    rep = dos.thouless_report(FourierPotential(), alpha, 0.0, 200, 1, probes, L_exact=free_le)
    assert not rep.excluded.any()
    assert rep.max_residual < 0.05
    assert "assumed" in rep.assumption


def test_thouless_excludes_near_spectrum(alpha):
    rep = dos.thouless_report(FourierPotential(), alpha, 0.0, 50, 1, np.array([0.0 + 0.01j, 3.0]),
                              L_exact=free_le)
    assert rep.excluded.tolist() == [True, False]
    assert math.isnan(rep.residuals[0])


def test_thouless_guard_positive(alpha):
    with pytest.raises(ValueError):
        dos.thouless_report(FourierPotential(), alpha, 0.0, 5, 1, [3.0], guard=0.0)


def test_accden_amo(amo, alpha):
    r = dos.accden_check(amo, alpha, 3.5, 1.5, 96, 32)
    assert r.residual < 0.1


def test_accden_at_y0_is_thouless(amo, alpha):
    r = dos.accden_check(amo, alpha, 3.5, 0.0, 64, 16)
    assert r.lhs == r.L0 and r.residual < 0.1


def test_accden_needs_real_potential(alpha):
    with pytest.raises(dos.HypothesisViolation):
        dos.accden_check(FourierPotential({1: 1.0}), alpha, 3.0, 0.5, 10, 4)


def test_accden_needs_positive_exponent(amo, alpha):
    with pytest.raises(dos.HypothesisViolation):
        dos.accden_check(amo, alpha, 0.0, 0.0, 10, 4)
