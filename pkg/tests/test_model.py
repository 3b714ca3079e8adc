import json
import math

import numpy as np
import pytest

from qpwind import model
from qpwind.model import CocycleParams, FourierPotential, amo_potential, free_le


def test_eval_matches_cosine(amo):
    theta = np.array([0.0, 0.3, 1.0 + 0.5j, -2.0 - 1j])
    np.testing.assert_allclose(amo(theta), 2 * 0.5 * np.cos(theta), rtol=1e-14)


def test_scalar_eval_returns_complex(amo):
    assert isinstance(amo(0.4), complex)


def test_degree_and_realness(trig3):
    assert trig3.degree == 2
    assert trig3.is_real
    assert not FourierPotential({1: 1.0}).is_real
    assert FourierPotential().degree == 0


def test_zero_amplitudes_dropped():
    p = FourierPotential({3: 0.0, 1: 1.0, -1: 1.0})
    assert p.degree == 1 and 3 not in p.coeffs


def test_real_potential_is_real_on_axis(trig3):
    x = np.linspace(0, 2 * math.pi, 13)
    assert np.max(np.abs(trig3(x).imag)) < 1e-14


def test_json_round_trip(trig3):
    back = FourierPotential.from_json(trig3.to_json())
    assert back.coeffs == trig3.coeffs


def test_json_duplicate_indices_add():
    p = FourierPotential.from_json(json.dumps({"coeffs": [[1, 1, 0], [1, 0.5, 0]]}))
    assert p.coeffs == {1: 1.5}


@pytest.mark.parametrize("doc", [
    {},
    {"coeffs": [[1, 1]]},
    {"coeffs": [[0.5, 1, 0]]},
    {"coeffs": [[1, "nan", 0]]},
])
def test_bad_potential_specs(doc):
    with pytest.raises(ValueError):
        FourierPotential.from_dict(doc)


def test_params_reduce_alpha_and_validate():
    p = CocycleParams(2 * math.pi + 0.25, 3, 0.1, 5)
    assert p.alpha == pytest.approx(0.25)
    assert p.E == 3 + 0j
    assert p.with_(n=7).n == 7
    with pytest.raises(ValueError):
        CocycleParams(0.1, 0, 0, 0)


def test_amo_requires_positive_coupling():
    with pytest.raises(ValueError):
        amo_potential(0.0)


def test_amo_oracle():
    assert model.amo_le_oracle(0.5, 0.0, 0.0) == 0.0
    assert model.amo_le_oracle(0.5, 1.5, 0.0) == pytest.approx(1.5 + math.log(0.5))
    with pytest.raises(ValueError):
        model.amo_le_oracle(0.5, -0.1, 0.0)


@pytest.mark.parametrize("E", [3.0, -3.0, 2.5 + 1j, 0.3j, 1.0])
def test_free_le_closed_form(E):
    # larger root of t^2 - E t + 1, straight from numpy
    t = np.roots([1, -E, 1])
    assert free_le(E) == pytest.approx(math.log(np.max(np.abs(t))), abs=1e-12)


def test_golden_alpha():
    assert model.GOLDEN_ALPHA / (2 * math.pi) == pytest.approx(0.6180339887498949)


def test_energy_bound_dominates_spectrum(trig3, alpha):
    from conftest import dense_h

    for y in (0.0, 0.7):
        H = dense_h(trig3, alpha, 0.3 + 1j * y, 30)
        assert np.max(np.abs(np.linalg.eigvals(H))) <= model.energy_bound(trig3, y)
