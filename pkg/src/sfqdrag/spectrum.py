"""Dirac-comb spectra of pulse sequences.

A bit string is a comb of delta kicks on the clock grid; its transform at
frequency ``omega`` (in units of the qubit frequency) is the coherent sum
``S(omega) = sum_m exp(2 pi i m omega / S)`` over kick tick indices m.
Magnitudes are reported unnormalized; suppression ratios are
normalization-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .schedule import ClockConfig, kick_slot_indices
from .transmon import EigenModel

DEFAULT_GRID_POINTS = 2048
DEFAULT_GRID_RANGE = (0.5, 1.5)


@dataclass(frozen=True)
class SpectrumTable:
    """Comb spectrum sampled on a frequency grid (units of omega_01)."""

    freq_grid: np.ndarray
    magnitude: np.ndarray
    leak_freq: float

    def __post_init__(self):
        self.freq_grid.setflags(write=False)
        self.magnitude.setflags(write=False)


def leak_frequency(model: EigenModel) -> float:
    """Leakage transition frequency omega_12 in units of omega_01."""
    return float((model.energies[2] - model.energies[1]) / model.omega_01)


def spectrum_magnitude(bits: str, clock: ClockConfig, omega) -> np.ndarray | float:
    """|S(omega)| for a bit string; ``omega`` may be a scalar or an array."""
    slots = np.asarray(kick_slot_indices(bits), dtype=float)
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if slots.size == 0:
        mags = np.zeros_like(omega_arr)
    else:
        phases = np.exp(2j * np.pi * np.outer(omega_arr, slots) / clock.multiplier)
        mags = np.abs(phases.sum(axis=1))
    return float(mags[0]) if np.isscalar(omega) or np.ndim(omega) == 0 else mags


def pulse_spectrum(bits: str, clock: ClockConfig, freq_grid: np.ndarray | None = None,
                   model: EigenModel | None = None) -> SpectrumTable:
    """Spectrum of a pulse sequence on a grid within [0, S].

    The default grid brackets the qubit and leakage frequencies. The table
    carries the model's leakage frequency when a model is supplied, NaN
    otherwise.
    """
    if freq_grid is None:
        freq_grid = np.linspace(*DEFAULT_GRID_RANGE, DEFAULT_GRID_POINTS)
    freq_grid = np.asarray(freq_grid, dtype=float)
    if freq_grid.min() < 0 or freq_grid.max() > clock.multiplier:
        raise InvalidSpecError("frequency grid must lie within [0, clock multiplier]")
    mags = spectrum_magnitude(bits, clock, freq_grid)
    leak = leak_frequency(model) if model is not None else float("nan")
    return SpectrumTable(freq_grid=freq_grid, magnitude=np.asarray(mags), leak_freq=leak)


def envelope_dip_frequency(table: SpectrumTable, band: tuple[float, float] = (0.8, 1.1)) -> float:
    """Location of the minimum of the peak envelope within ``band``.

    The raw comb transform oscillates with nulls spaced ~1/duration, so the
    physically meaningful dip is read off the envelope of local maxima (the
    interpolated peak curve).
    """
    m, w = table.magnitude, table.freq_grid
    is_peak = (m[1:-1] > m[:-2]) & (m[1:-1] > m[2:])
    wp, mp = w[1:-1][is_peak], m[1:-1][is_peak]
    sel = (wp >= band[0]) & (wp <= band[1])
    if not np.any(sel):
        raise InvalidSpecError("no spectral peaks inside the requested band")
    wp, mp = wp[sel], mp[sel]
    return float(wp[np.argmin(mp)])


def leakage_suppression_ratio(bits_noramp: str, bits_ramped: str, clock: ClockConfig,
                              model: EigenModel) -> float:
    """Ratio of spectral weight at the leakage frequency, bare over ramped."""
    if not bits_noramp or not bits_ramped:
        raise InvalidSpecError("both sequences must be non-empty")
    omega_leak = leak_frequency(model)
    bare = spectrum_magnitude(bits_noramp, clock, omega_leak)
    ramped = spectrum_magnitude(bits_ramped, clock, omega_leak)
    if ramped == 0.0:
        return float("inf")
    return float(bare / ramped)
