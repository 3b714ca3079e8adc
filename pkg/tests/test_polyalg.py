import math

import numpy as np
import pytest

from conftest import match_sets
from qpwind import polyalg
from qpwind.polyalg import LaurentPoly, RootSet


def test_cubic_roots():
    rs = polyalg.aberth_roots(LaurentPoly(0, [-6, 11, -6, 1]))
    assert rs.converged
    np.testing.assert_allclose(np.sort(rs.roots.real), [1, 2, 3], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_random_roots_against_numpy(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=31) + 1j * rng.normal(size=31)
    rs = polyalg.aberth_roots(LaurentPoly(0, c))
    assert rs.converged and len(rs) == 30
    assert match_sets(rs.roots, np.roots(c[::-1])) < 1e-9


def test_known_roots_round_trip(rng):
    z = np.exp(rng.uniform(-0.7, 0.7, 40)) * np.exp(2j * np.pi * rng.random(40))
    rs = polyalg.aberth_roots(LaurentPoly(0, np.poly(z)[::-1]))
    assert match_sets(rs.roots, z) < 1e-8


def test_clustered_roots_reach_rounding_floor():
    # tight cluster: corrections stall at roundoff, not at the nominal tolerance
    z = np.concatenate([0.6 + 0.01 * np.exp(2j * np.pi * np.arange(6) / 6), np.exp(2j * np.pi * np.arange(30) / 30)])
    rs = polyalg.aberth_roots(LaurentPoly(0, np.poly(z)[::-1]))
    assert rs.converged
    assert match_sets(rs.roots, z) < 1e-4


@pytest.mark.parametrize("root,k", [(1j, 3), (2.0, 4), (0.5, 2)])
def test_multiple_root_returned_as_cluster(root, k):
    rs = polyalg.aberth_roots(LaurentPoly(0, np.poly([root] * k)[::-1]))
    assert rs.converged
    # spread of order eps^(1/k)
    assert np.max(np.abs(rs.roots - root)) < 1e-2
    assert abs(np.mean(rs.roots) - root) < 1e-4 * max(1, abs(root))


def test_exact_root_outside_unit_disc_does_not_stall():
    ratio = polyalg.poly_newton_ratio(np.array([-2.0, 1.0]))
    assert ratio(np.array([2.0 + 0j]))[0] == 0


def test_batched_aberth_matches_single():
    polys = [np.poly([1, 2, 3])[::-1], np.poly([0.5j, -1, 4])[::-1]]
    init = np.stack([polyalg.newton_polygon_start(np.abs(p)) for p in polys])

    def ratio(z):
        return np.stack([polyalg.poly_newton_ratio(p)(row) for p, row in zip(polys, z)])

    out = polyalg.aberth(ratio, init)
    assert isinstance(out, list) and len(out) == 2
    assert match_sets(out[1].roots, [0.5j, -1, 4]) < 1e-10


def test_newton_polygon_radii():
    # roots of modulus 0.01 and 100: hull gives two circles
    c = np.poly([0.01, 0.01j, 100, -100])[::-1]
    start = polyalg.newton_polygon_start(np.abs(c))
    r = np.sort(np.abs(start))
    assert r[1] < 0.1 and r[2] > 10


def test_newton_polygon_zero_roots():
    start = polyalg.newton_polygon_start(np.array([0, 0, 1.0, 1.0]))
    assert np.count_nonzero(start == 0) == 2 and len(start) == 3


def test_laurent_trim_and_eval():
    p = LaurentPoly(-2, [1e-20, 2.0, 3.0, 0.0])
    assert p.k_min == -1 and p.k_max == 0
    z = 1.7 - 0.2j
    assert p(z) == pytest.approx(2 / z + 3)
    assert p.as_dict() == {-1: 2.0, 0: 3.0}


def test_laurent_log_scale():
    p = LaurentPoly(0, [1.0, 1.0], log_scale=math.log(3))
    assert p(2.0) == pytest.approx(9.0)


@pytest.mark.parametrize("rho", [0.5, 1.0, 1.8])
def test_dft_interpolate_exact(rho, rng):
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    N = 16
    z = rho * np.exp(2j * np.pi * np.arange(N) / N)
    vals = sum(ck * z ** (k - 4) for k, ck in enumerate(c))
    p = polyalg.dft_interpolate(vals, -4, 4, rho)
    np.testing.assert_allclose(np.array([p.as_dict().get(k, 0) for k in range(-4, 5)]), c, atol=1e-12)


def test_dft_interpolate_rejects_short_grid():
    with pytest.raises(ValueError):
        polyalg.dft_interpolate(np.ones(4), -3, 3)


def test_annulus_count_with_boundary():
    roots = np.array([0.5, 1.0, 1.5, 2.0, 3.0])
    assert polyalg.annulus_count(roots, 1.0, 2.0) == (1, 2)
    assert polyalg.annulus_count(RootSet(roots, np.zeros(5), True, 0), 0.4, 2.5) == (4, 0)


def test_circle_mean_log_classical_jensen(rng):
    z = rng.normal(size=7) + 1j * rng.normal(size=7)
    lead = 2.5
    p = LaurentPoly(0, lead * np.poly(z)[::-1])
    for r in (0.5, 1.0, 2.0):
        want = math.log(lead) + np.sum(np.log(np.maximum(r, np.abs(z))))
        got, _ = polyalg.circle_mean_log(p, r, 32)
        assert got == pytest.approx(want, abs=1e-10)


def test_jensen_interior_and_boundary():
    # zeros at radius 0.7 (on inner circle), 1.0 (interior), 2.0 (outside); pole order 1
    z = np.array([0.7, 1.0j, -2.0])
    p = LaurentPoly(-1, np.poly(z)[::-1], trim_rel=0.0)
    js = polyalg.jensen_sides(p, 0.7, 1.3, roots=RootSet(z, np.zeros(3), True, 0))
    assert js.residual < 1e-8 and js.residual_shifted < 1e-8


def test_jensen_finds_roots_itself(rng):
    z = np.exp(rng.uniform(-1, 1, 25)) * np.exp(2j * np.pi * rng.random(25))
    p = LaurentPoly(-3, np.poly(z)[::-1], trim_rel=0.0)
    assert polyalg.jensen_residual(p, 0.8, 1.25) < 1e-8


def test_jensen_rejects_bad_annulus():
    with pytest.raises(ValueError):
        polyalg.jensen_sides(LaurentPoly(0, [1.0, 1.0]), 1.0, 0.5)
