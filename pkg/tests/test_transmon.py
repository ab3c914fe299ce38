import json
import math

import numpy as np
import pytest

from sfqdrag import (
    InvalidSpecError,
    TransmonSpec,
    build_charge_hamiltonian,
    build_model,
    calibrate,
    diagonalize_and_project,
    model_from_dict,
    model_to_dict,
)
from sfqdrag.transmon import TWO_PI

from conftest import ALPHA, OMEGA_01


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        TransmonSpec(charging_energy=-1.0, josephson_energy=1.0)
    with pytest.raises(InvalidSpecError):
        TransmonSpec(charging_energy=1.0, josephson_energy=5.0)  # ratio below 20
    with pytest.raises(InvalidSpecError):
        TransmonSpec(charging_energy=1.0, josephson_energy=100.0, charge_dimension=200)
    with pytest.raises(InvalidSpecError):
        TransmonSpec(charging_energy=1.0, josephson_energy=100.0, charge_dimension=1)


def test_charge_hamiltonian_no_josephson_limit():
    # With the cosine term absent the spectrum is the bare charging parabola.
    ec = 1.7
    spec = TransmonSpec(charging_energy=ec, josephson_energy=1e-9 * ec * 1e12,
                        charge_dimension=5, kept_levels=3)
    h = build_charge_hamiltonian(spec)
    diag_expected = np.array([16 * ec, 4 * ec, 0.0, 4 * ec, 16 * ec])
    np.testing.assert_allclose(np.diag(h), diag_expected, rtol=1e-12)
    np.testing.assert_allclose(np.diag(h, 1), -spec.josephson_energy / 2 * np.ones(4))
    np.testing.assert_array_equal(h, h.T)


def test_calibrated_gaps_match_targets(spec, model):
    assert abs(model.omega_01 - OMEGA_01) < TWO_PI * 1e3
    omega_12 = model.energies[2] - model.energies[1]
    assert abs((model.omega_01 - omega_12) - ALPHA) < TWO_PI * 1e3
    assert 60 < spec.ratio < 80


def test_perturbative_frequency_estimate(spec):
    # sqrt(8 E_C E_J) - E_C approximates the exact 0-1 gap to a couple percent.
    ec, ej = spec.charging_energy, spec.josephson_energy
    approx = math.sqrt(8 * ec * ej) - ec
    exact = build_model(spec).omega_01
    assert abs(approx - exact) / exact < 0.02


def test_zero_point_fluctuation(model, spec):
    r_formula = 0.5 * (spec.josephson_energy / (2 * spec.charging_energy)) ** 0.25
    assert model.zero_point_r == pytest.approx(r_formula)
    assert abs(abs(model.charge_op[0, 1]) - model.zero_point_r) / model.zero_point_r < 0.05


def test_charge_operator_structure(model):
    n = model.charge_op
    assert np.linalg.norm(n - n.conj().T) < 1e-12
    # gauge: consecutive elements purely positive imaginary
    for k in range(model.dim - 1):
        assert n[k, k + 1].imag > 0
        assert abs(n[k, k + 1].real) < 1e-12 * abs(n[k, k + 1])
    # parity: same-parity matrix elements vanish at n_g = 0
    for i in range(model.dim):
        for j in range(model.dim):
            if (i - j) % 2 == 0:
                assert abs(n[i, j]) < 1e-10


def test_energies_increasing_and_anharmonicity_negative(model):
    assert np.all(np.diff(model.energies) > 0)
    # omega_12 < omega_01: levels compress going up
    assert model.energies[2] - model.energies[1] < model.energies[1] - model.energies[0]
    assert model.anharmonicity_exact > 0  # stored as omega_01 - omega_12


def test_dimension_convergence(spec):
    wide = TransmonSpec(
        charging_energy=spec.charging_energy,
        josephson_energy=spec.josephson_energy,
        charge_dimension=401,
        kept_levels=spec.kept_levels,
    )
    e201 = build_model(spec).energies
    e401 = build_model(wide).energies
    scale = e201[-1]
    assert np.max(np.abs(e201 - e401)) / scale < 1e-10


def test_gate_charge_insensitivity(spec):
    shifted = TransmonSpec(
        charging_energy=spec.charging_energy,
        josephson_energy=spec.josephson_energy,
        gate_charge=0.25,
        charge_dimension=spec.charge_dimension,
        kept_levels=spec.kept_levels,
    )
    w0 = build_model(spec).omega_01
    w1 = build_model(shifted).omega_01
    assert abs(w1 - w0) / w0 < 1e-6


def test_calibration_fixed_point(spec):
    model = build_model(spec)
    again = calibrate(OMEGA_01, ALPHA, initial_spec=spec)
    assert abs(build_model(again).omega_01 - OMEGA_01) < TWO_PI * 1e3
    assert abs(model.omega_01 - OMEGA_01) < TWO_PI * 1e3


def test_calibration_from_perturbative_guess(spec):
    guess = TransmonSpec(
        charging_energy=ALPHA,
        josephson_energy=OMEGA_01**2 / (8 * ALPHA),
    )
    alt = calibrate(OMEGA_01, ALPHA, initial_spec=guess)
    assert alt.charging_energy == pytest.approx(spec.charging_energy, rel=1e-6)
    assert alt.josephson_energy == pytest.approx(spec.josephson_energy, rel=1e-6)


def test_calibration_rejects_bad_targets():
    with pytest.raises(InvalidSpecError):
        calibrate(-1.0, ALPHA)
    with pytest.raises(InvalidSpecError):
        calibrate(OMEGA_01, OMEGA_01 / 5)


def test_diagonalize_rejects_non_hermitian(spec):
    h = build_charge_hamiltonian(spec).astype(complex)
    h[0, 1] += 1.0j * spec.josephson_energy
    with pytest.raises(InvalidSpecError):
        diagonalize_and_project(h, spec)


def test_model_json_roundtrip(model):
    doc = json.loads(json.dumps(model_to_dict(model)))
    back = model_from_dict(doc)
    np.testing.assert_allclose(back.energies, model.energies, rtol=1e-12)
    np.testing.assert_allclose(back.charge_op, model.charge_op, atol=1e-15)
    assert back.omega_01 == pytest.approx(model.omega_01)
    assert back.spec.charge_dimension == model.spec.charge_dimension
