import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import amo_zeros_qep
from qpwind import winding
from qpwind.model import CocycleParams, FourierPotential


def test_free_potential_has_no_winding(alpha):
    r = winding.winding_n(FourierPotential(), CocycleParams(alpha, 3.0, 0.7, 50))
    assert r.total_winding == 0 and r.nu_n == 0


@pytest.mark.parametrize("y", [-2.5, -1.0, 0.3, 1.9, 2.4])
def test_winding_counts_zeros_inside(amo, alpha, y):
    # argument principle for z^{nm} f_n: W = #zeros in |z| < e^{-y} minus n m
    n = 30
    z = amo_zeros_qep(0.5, alpha, 3.5, n)
    inside = int(np.count_nonzero(np.abs(z) < math.exp(-y)))
    r = winding.winding_n(amo, CocycleParams(alpha, 3.5, y, n))
    assert r.total_winding == inside - n
    assert r.nu_n == Fraction(n - inside, n)


def test_amo_winding_below_and_above(amo, alpha):
    below = winding.winding_n(amo, CocycleParams(alpha, 3.5, 0.5, 400))
    above = winding.winding_n(amo, CocycleParams(alpha, 3.5, 2.3, 400))
    assert below.nu_n == 0 and above.nu_n == 1


def test_contour_through_zero(amo, alpha):
    # n = 1: the zero z* of E - lam (z w + 1/(z w)) sits on |z| = e^{-y}
    w = np.exp(1j * alpha)
    t = np.roots([1, -3.5 / 0.5, 1])  # t = z w solves t + 1/t = E / lam
    y = -math.log(abs(t[0] / w))
    with pytest.raises(winding.ContourZeroError) as ei:
        winding.winding_n(amo, CocycleParams(alpha, 3.5, y, 1))
    assert ei.value.y == pytest.approx(y)


def test_grid_minimum(amo, alpha):
    with pytest.raises(ValueError):
        winding.winding_n(amo, CocycleParams(alpha, 3.5, 0.0, 5), M=32)


def test_result_row(amo, alpha):
    row = winding.winding_n(amo, CocycleParams(alpha, 3.5, 0.5, 20)).to_row()
    assert set(row) == {"y", "nu_n", "W", "n"}


def test_count_consistency_exact(amo, alpha):
    chk = winding.count_consistency(amo, alpha, 3.5, -2.0, 1.5, 40)
    lhs, rhs = chk.doubled_counts
    assert lhs == rhs and chk.residual == 0


def test_count_consistency_needs_order(amo, alpha):
    with pytest.raises(ValueError):
        winding.count_consistency(amo, alpha, 3.5, 1.0, 0.5, 10)


@pytest.mark.slow
def test_one_sided_limits(amo, alpha):
    gamma = 1.825
    assert winding.winding_limit(amo, alpha, 3.5, gamma, "+") == 1
    assert winding.winding_limit(amo, alpha, 3.5, gamma, "-") == 0


def test_limit_side_validation(amo, alpha):
    with pytest.raises(ValueError):
        winding.winding_limit(amo, alpha, 3.5, 1.0, "up")
