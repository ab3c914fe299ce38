"""Exact unitary evolution of bit schedules.

Every factor is exact: kicks are delta functions (zero duration) built
from the matrix exponential of the charge operator, and free evolution is
diagonal in the eigenbasis.  There are no integrator or step-size choices.

Sign conventions
----------------
The kick is ``U = exp(+i (theta'/2) n)`` with ``theta' = theta / r``.
Together with the charge-operator gauge (``n[k, k+1]`` positive imaginary)
this makes a slot-0 kick act on the qubit subspace as the standard
``R_Y(+theta) = exp(-i (theta/2) Y)`` up to the zero-point ratio
``|n01| / r``.  A kick at clock slot k is the same rotation about the
in-plane axis ``(-sin(2 pi k / S), cos(2 pi k / S), 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .schedule import ClockConfig, PulseSchedule, expand_bits, kick_slot_indices
from .transmon import EigenModel

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Propagator:
    """Dense unitary on the truncated transmon space."""

    matrix: np.ndarray
    total_time: float

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitarity_defect(self) -> float:
        u = self.matrix
        return float(np.linalg.norm(u.conj().T @ u - np.eye(self.dim)))


@dataclass(frozen=True)
class ProjectedGate:
    """Computational-subspace block of a propagator, in the rotating frame."""

    matrix: np.ndarray
    frame: str = "rotating@omega_01"

    def __post_init__(self):
        self.matrix.setflags(write=False)


def kick_matrix(model: EigenModel, kick_angle: float) -> np.ndarray:
    """Unitary matrix of a single kick, ``exp(+i (theta/r) n / 2)``."""
    if not 0.0 < kick_angle < 0.5:
        raise InvalidSpecError(f"kick_angle {kick_angle} outside (0, 0.5)")
    phi = 0.5 * kick_angle / model.zero_point_r
    lam, vecs = np.linalg.eigh(model.charge_op)
    return (vecs * np.exp(1j * phi * lam)) @ vecs.conj().T


def kick_unitary(model: EigenModel, kick_angle: float) -> Propagator:
    """Single delta kick as a zero-duration propagator."""
    return Propagator(matrix=kick_matrix(model, kick_angle), total_time=0.0)


def free_evolution(model: EigenModel, t: float) -> Propagator:
    """Diagonal free evolution ``exp(-i E_k t)``."""
    if t < 0:
        raise InvalidSpecError("free evolution time must be non-negative")
    return Propagator(matrix=np.diag(np.exp(-1j * model.energies * t)), total_time=t)


def _walk_bits(energies: np.ndarray, kick: np.ndarray, bits: str, tick: float) -> np.ndarray:
    """Ordered product for a tick string: kick-then-wait per '1', wait per '0'.

    Adjacent waits are merged; waits apply as row scalings instead of
    dense products.
    """
    dim = len(energies)
    u = np.eye(dim, dtype=complex)
    prev = 0
    for m in kick_slot_indices(bits):
        if m > prev:
            u = np.exp(-1j * energies * ((m - prev) * tick))[:, None] * u
        u = kick @ u
        prev = m
    if len(bits) > prev:
        u = np.exp(-1j * energies * ((len(bits) - prev) * tick))[:, None] * u
    return u


def bit_propagator(model: EigenModel, bits: str, clock: ClockConfig,
                   kick_angle: float) -> Propagator:
    """Propagator of a raw tick string on the given clock."""
    kick = kick_matrix(model, kick_angle)
    u = _walk_bits(model.energies, kick, bits, clock.clock_period)
    return Propagator(matrix=u, total_time=len(bits) * clock.clock_period)


def sequence_propagator(model: EigenModel, schedule: PulseSchedule) -> Propagator:
    """Full schedule propagator: off-ramp x train x on-ramp, in time order."""
    return bit_propagator(model, expand_bits(schedule), schedule.clock, schedule.kick_angle)


def project_computational(prop: Propagator, model: EigenModel) -> ProjectedGate:
    """Top-left 2x2 block with the rotating-frame correction.

    The correction ``diag(1, exp(+i omega_01 t))`` is the identity (to
    rounding) for whole-cycle schedules and supplies the frame factor for
    fractional-cycle propagators.
    """
    block = prop.matrix[:2, :2].copy()
    frame = np.array([1.0, np.exp(1j * model.omega_01 * prop.total_time)])
    return ProjectedGate(matrix=block * frame[None, :])


def rwa_drive_propagator(model: EigenModel, drive_amplitude: float, t: float) -> Propagator:
    """Constant-drive propagator in the rotating-wave approximation.

    The generator combines the exact anharmonic ladder (eigenenergies less
    k * omega_01) with a y-quadrature drive of harmonic-oscillator matrix
    elements.  Used only as a coarse cross-check that a resonant kick
    train of angle theta matches a continuous drive of amplitude
    ``omega_01 * theta / (2 pi)``.
    """
    if drive_amplitude < 0:
        raise InvalidSpecError("drive amplitude must be non-negative")
    alpha = model.anharmonicity_exact
    if np.isfinite(alpha) and drive_amplitude >= abs(alpha) / 2:
        raise InvalidSpecError("drive amplitude must stay below |alpha| / 2")
    dim = model.dim
    ladder = np.diag(model.energies - np.arange(dim) * model.omega_01)
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)  # b in the Fock approximation
    y_quad = 1j * (lower.T - lower)
    h = ladder + 0.5 * drive_amplitude * y_quad
    lam, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(-1j * lam * t)) @ vecs.conj().T
    return Propagator(matrix=u, total_time=t)
