import math

import numpy as np
import pytest

from sfqdrag import (
    ClockConfig,
    InvalidSpecError,
    expand_bits,
    leak_frequency,
    leakage_suppression_ratio,
    pulse_spectrum,
    spectrum_magnitude,
)

from oracles import dtft_magnitude


def _clock(model, s=4):
    return ClockConfig.for_model(model, s)


def _bare(n, s=4):
    return ("1" + "0" * (s - 1)) * n


def test_resonant_train_sums_coherently(model):
    clock = _clock(model)
    n = 37
    assert spectrum_magnitude(_bare(n), clock, 1.0) == pytest.approx(n, abs=1e-9)
    assert spectrum_magnitude(_bare(n), clock, 0.0) == pytest.approx(n)


def test_single_kick_flat_spectrum(model):
    clock = _clock(model)
    grid = np.linspace(0.0, 4.0, 101)
    table = pulse_spectrum("1000", clock, freq_grid=grid)
    np.testing.assert_allclose(table.magnitude, np.ones_like(grid), atol=1e-12)


def test_leak_frequency_value(model):
    # (omega_01 - alpha) / omega_01 with the calibrated 5 GHz / 250 MHz chip
    assert leak_frequency(model) == pytest.approx(0.95, abs=1e-3)


def test_grid_validation(model):
    clock = _clock(model)
    with pytest.raises(InvalidSpecError):
        pulse_spectrum("1000", clock, freq_grid=np.array([-0.1, 1.0]))
    with pytest.raises(InvalidSpecError):
        pulse_spectrum("1000", clock, freq_grid=np.array([1.0, 4.5]))


def test_default_grid_and_leak_freq(model):
    clock = _clock(model)
    table = pulse_spectrum(_bare(10), clock, model=model)
    assert len(table.freq_grid) == 2048
    assert table.freq_grid[0] == pytest.approx(0.5)
    assert table.freq_grid[-1] == pytest.approx(1.5)
    assert table.leak_freq == pytest.approx(leak_frequency(model))
    no_model = pulse_spectrum(_bare(10), clock)
    assert math.isnan(no_model.leak_freq)


def test_magnitude_bounded_by_kick_count(model, rng):
    clock = _clock(model)
    bits = "".join(rng.choice(["0", "1"], size=64))
    table = pulse_spectrum(bits, clock)
    assert np.all(table.magnitude <= bits.count("1") + 1e-12)


def test_periodicity_in_clock_multiplier(model):
    clock = _clock(model)
    bits = "0100" + _bare(5) + "0001"
    base = np.linspace(0.0, 0.9, 40)
    m1 = spectrum_magnitude(bits, clock, base)
    m2 = spectrum_magnitude(bits, clock, base + clock.multiplier)
    np.testing.assert_allclose(m1, m2, atol=1e-9)


def test_translation_invariance(model):
    clock = _clock(model)
    bits = "01001000" + "1000"
    shifted = "0000" * 3 + bits
    grid = np.linspace(0.5, 1.5, 64)
    np.testing.assert_allclose(
        spectrum_magnitude(bits, clock, grid),
        spectrum_magnitude(shifted, clock, grid),
        atol=1e-10,
    )


def test_matches_direct_transform_oracle(model, rng):
    clock = _clock(model)
    bits = "".join(rng.choice(["0", "1"], size=48))
    for omega in (0.3, 0.95, 1.0, 1.37):
        expected = dtft_magnitude(bits, clock.multiplier, omega)
        assert spectrum_magnitude(bits, clock, omega) == pytest.approx(expected, abs=1e-12)


def test_suppression_ratio_trivial_cases(model):
    clock = _clock(model)
    bits = _bare(20)
    assert leakage_suppression_ratio(bits, bits, clock, model) == pytest.approx(1.0)
    with pytest.raises(InvalidSpecError):
        leakage_suppression_ratio("", bits, clock, model)


def test_optimized_ramp_suppresses_leak_component(model, best_pi_4x_by_cycles):
    clock = _clock(model)
    best = best_pi_4x_by_cycles[4].best_schedule
    bits = expand_bits(best)
    bare = _bare(best.kick_count)
    ratio = leakage_suppression_ratio(bare, bits, clock, model)
    assert ratio > 10.0


def test_leak_magnitude_decreases_with_ramp_length(model, best_pi_4x_by_cycles):
    clock = _clock(model)
    omega_leak = leak_frequency(model)
    mags = []
    for n in range(5):
        bits = expand_bits(best_pi_4x_by_cycles[n].best_schedule)
        mags.append(spectrum_magnitude(bits, clock, omega_leak))
    # non-increasing within 10% slack
    for prev, cur in zip(mags, mags[1:]):
        assert cur <= prev * 1.10
    assert mags[-1] < mags[0] / 5
