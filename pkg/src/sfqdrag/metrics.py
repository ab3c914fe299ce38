"""Gate quality metrics: average fidelity, leakage, Pauli split.

The Pauli decomposition uses the axis-angle form

    U_Q = (1 - delta) * e^{i phi} * (c_I I - i (c_X X + c_Y Y + c_Z Z)),

so a perfect ``R_Y(t)`` has ``c_I = cos(t/2)``, ``c_Y = sin(t/2)`` and the
discretization error ``|c_Y - sin(theta_target/2)|^2`` vanishes.  The global
phase is fixed by making ``c_I`` real and non-negative (falling back to
``c_Y`` when ``c_I`` vanishes); coefficient magnitudes are convention-free.
The error split is evaluated in the target-aligned phase (overlap with the
target rotated to be real positive), which keeps the discretization error
continuous when the best achievable rotation slightly overshoots the
target; the ``c_I >= 0`` canonical form folds such rotations back below pi
and would report a spurious O(1) discretization error there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGateError, NumericalFailureError
from .propagator import ProjectedGate

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class TargetGate:
    """Target rotation ``cos(t/2) I - i sin(t/2) Y``."""

    kind: str
    theta_target: float
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @classmethod
    def y_rotation(cls, theta: float) -> "TargetGate":
        m = math.cos(theta / 2) * PAULI_I - 1j * math.sin(theta / 2) * PAULI_Y
        return cls(kind="ry", theta_target=float(theta), matrix=m)


@dataclass(frozen=True)
class GateReport:
    """Scores of one projected gate against one target."""

    avg_fidelity: float
    process_fidelity: float
    leakage: float
    delta: float
    pauli_coeffs: tuple[complex, complex, complex, complex] | None = None
    err_discrete: float | None = None
    err_phase: float | None = None

    @property
    def avg_error(self) -> float:
        return 1.0 - self.avg_fidelity

    def to_dict(self) -> dict:
        doc = {
            "avg_fidelity": self.avg_fidelity,
            "avg_error": self.avg_error,
            "process_fidelity": self.process_fidelity,
            "leakage": self.leakage,
            "delta": self.delta,
            "err_discrete": self.err_discrete,
            "err_phase": self.err_phase,
        }
        if self.pauli_coeffs is not None:
            doc["pauli_coeffs"] = {
                name: [c.real, c.imag]
                for name, c in zip("IXYZ", self.pauli_coeffs)
            }
        return doc


def _axis_angle_components(u_q: np.ndarray):
    # d_i = Tr(P_i U_Q) / 2; the traceless components pick up a factor i to
    # land in the axis-angle (quaternion) form.
    d_i = np.trace(u_q) / 2.0
    q = np.array(
        [
            d_i,
            1j * np.trace(PAULI_X @ u_q) / 2.0,
            1j * np.trace(PAULI_Y @ u_q) / 2.0,
            1j * np.trace(PAULI_Z @ u_q) / 2.0,
        ]
    )
    norm = float(np.linalg.norm(q))
    return q, norm


def pauli_decompose(gate: ProjectedGate):
    """Decompose a projected gate; returns ``(delta, c_I, c_X, c_Y, c_Z)``.

    ``1 - delta`` is the Euclidean norm of the unnormalized coefficients,
    so ``L1 = 2 delta - delta^2`` equals ``1 - Tr(U_Q U_Q^dag) / 2``
    identically.
    """
    q, norm = _axis_angle_components(gate.matrix)
    if norm < 1e-9:
        raise DegenerateGateError("projected gate is numerically zero")
    if abs(q[0]) > 1e-9 * norm:
        phase = abs(q[0]) / q[0]
    elif abs(q[2]) > 0:
        phase = abs(q[2]) / q[2]
    else:
        phase = 1.0
    c = q * phase / norm
    delta = 1.0 - norm
    return delta, c[0], c[1], c[2], c[3]


def error_split(gate: ProjectedGate, target: TargetGate):
    """Discretization and phase error of a gate against a target.

    Returns ``(err_discrete, err_phase)`` with
    ``err_discrete = |c_Y - sin(theta_target / 2)|^2`` in the
    target-aligned phase and ``err_phase = |c_Z|^2``.
    """
    q, norm = _axis_angle_components(gate.matrix)
    if norm < 1e-9:
        raise DegenerateGateError("projected gate is numerically zero")
    overlap = np.trace(target.matrix.conj().T @ gate.matrix)
    if abs(overlap) > 1e-9 * norm:
        phase = abs(overlap) / overlap
    elif abs(q[0]) > 1e-9 * norm:
        phase = abs(q[0]) / q[0]
    else:
        phase = abs(q[2]) / q[2] if abs(q[2]) > 0 else 1.0
    c = q * phase / norm
    err_discrete = float(abs(c[2] - math.sin(target.theta_target / 2)) ** 2)
    err_phase = float(abs(c[3]) ** 2)
    return err_discrete, err_phase


def average_fidelity(gate: ProjectedGate, target: TargetGate) -> GateReport:
    """Full closed-system report: fidelities, leakage, Pauli split, error split."""
    u_q = gate.matrix
    f_pro = float(abs(np.trace(target.matrix.conj().T @ u_q)) ** 2 / 4.0)
    leak_trace = 1.0 - float(np.trace(u_q @ u_q.conj().T).real) / 2.0

    delta, c_i, c_x, c_y, c_z = pauli_decompose(gate)
    leak_pauli = 2.0 * delta - delta * delta
    if abs(leak_trace - leak_pauli) > _CONSISTENCY_TOL:
        raise NumericalFailureError(
            f"leakage definitions disagree: {leak_trace:.3e} vs {leak_pauli:.3e}"
        )
    leakage = max(0.0, leak_trace)
    err_discrete, err_phase = error_split(gate, target)
    avg = (2.0 * f_pro + 1.0 - leakage) / 3.0
    return GateReport(
        avg_fidelity=avg,
        process_fidelity=f_pro,
        leakage=leakage,
        delta=max(0.0, delta),
        pauli_coeffs=(complex(c_i), complex(c_x), complex(c_y), complex(c_z)),
        err_discrete=err_discrete,
        err_phase=err_phase,
    )
