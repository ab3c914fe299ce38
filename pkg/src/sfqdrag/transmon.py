"""Full-cosine transmon model in the charge basis.

The Hamiltonian is ``4 E_C (n - n_g)^2 - E_J cos(phi)`` expressed on a
symmetric charge grid, diagonalized exactly, and truncated to the lowest
few eigenstates.  All energies are angular frequencies (rad/s) and the
ground-state energy is shifted to zero, so free evolution carries no
global phase.

The charge operator is rotated into the eigenbasis and gauge-fixed so
that ``charge_op[k, k+1]`` has positive imaginary part.  This pins the
eigenvector phases left arbitrary by the eigensolver and makes every
derived propagator reproducible bit-for-bit across LAPACK builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import CalibrationError, InvalidSpecError, NumericalFailureError

TWO_PI = 2.0 * math.pi

# Default chip targets: a 5 GHz qubit with 250 MHz anharmonicity.
DEFAULT_OMEGA_01 = TWO_PI * 5.0e9
DEFAULT_ALPHA = TWO_PI * 250.0e6


@dataclass(frozen=True)
class TransmonSpec:
    """Physical parameters of a single transmon.

    Parameters
    ----------
    charging_energy :
        E_C in rad/s.
    josephson_energy :
        E_J in rad/s.  The transmon regime E_J/E_C > 20 is enforced.
    gate_charge :
        Offset charge n_g (dimensionless).
    charge_dimension :
        Size of the charge grid; odd, so the grid is symmetric about zero
        and parity is exact at n_g = 0.
    kept_levels :
        Number of eigenstates retained after truncation.
    """

    charging_energy: float
    josephson_energy: float
    gate_charge: float = 0.0
    charge_dimension: int = 201
    kept_levels: int = 7

    def __post_init__(self):
        if self.charging_energy <= 0 or self.josephson_energy <= 0:
            raise InvalidSpecError("E_C and E_J must be positive")
        if self.josephson_energy / self.charging_energy <= 20:
            raise InvalidSpecError(
                f"E_J/E_C = {self.josephson_energy / self.charging_energy:.2f} "
                "is outside the transmon regime (> 20 required)"
            )
        if self.charge_dimension < 3:
            raise InvalidSpecError("charge_dimension must be at least 3")
        if self.charge_dimension % 2 == 0:
            raise InvalidSpecError("charge_dimension must be odd")
        if not 1 <= self.kept_levels <= self.charge_dimension:
            raise InvalidSpecError("kept_levels must be in [1, charge_dimension]")

    @property
    def ratio(self) -> float:
        return self.josephson_energy / self.charging_energy


@dataclass(frozen=True)
class EigenModel:
    """Diagonalized, truncated transmon.

    ``energies`` are sorted, shifted so ``energies[0] = 0``.  ``charge_op``
    is the exact charge operator in the eigenbasis (Hermitian, gauge-fixed).
    ``zero_point_r`` is the closed-form zero-point fluctuation magnitude
    ``(E_J / 2 E_C)^(1/4) / 2``; it agrees with ``|charge_op[0, 1]|`` to a
    few percent deep in the transmon regime.
    """

    energies: np.ndarray
    charge_op: np.ndarray
    omega_01: float
    anharmonicity_exact: float
    zero_point_r: float
    spec: TransmonSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        self.energies.setflags(write=False)
        self.charge_op.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def qubit_period(self) -> float:
        return TWO_PI / self.omega_01


def build_charge_hamiltonian(spec: TransmonSpec) -> np.ndarray:
    """Charge-basis Hamiltonian matrix for ``spec``.

    Diagonal ``4 E_C (n - n_g)^2`` for n on the symmetric integer grid,
    off-diagonal ``-E_J / 2`` from the cosine term.
    """
    d = spec.charge_dimension
    return _charge_hamiltonian(
        spec.charging_energy, spec.josephson_energy, spec.gate_charge, d
    )


def _charge_hamiltonian(ec, ej, ng, dim):
    n = np.arange(dim, dtype=float) - (dim - 1) // 2
    h = np.diag(4.0 * ec * (n - ng) ** 2)
    off = np.full(dim - 1, -0.5 * ej)
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def diagonalize_and_project(H: np.ndarray, spec: TransmonSpec) -> EigenModel:
    """Diagonalize ``H`` and project onto the lowest ``spec.kept_levels`` states.

    Returns the eigenenergies (ground state at zero) and the charge
    operator rotated into the eigenbasis, truncated, and gauge-fixed so
    consecutive off-diagonal elements are positive imaginary.

    Raises
    ------
    InvalidSpecError
        If ``H`` is not Hermitian.
    NumericalFailureError
        If the eigensolver does not converge.
    """
    herm_defect = np.linalg.norm(H - H.conj().T)
    if herm_defect > 1e-9 * max(1.0, np.linalg.norm(H)):
        raise InvalidSpecError(f"Hamiltonian is not Hermitian (defect {herm_defect:.3e})")
    try:
        evals, evecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigensolver failed to converge: {exc}") from exc

    k = spec.kept_levels
    energies = evals[:k] - evals[0]
    dim = H.shape[0]
    n_grid = np.arange(dim, dtype=float) - (dim - 1) // 2
    n_full = (evecs.conj().T * n_grid) @ evecs
    n_op = np.ascontiguousarray(n_full[:k, :k]).astype(complex)

    # Gauge: rotate eigenvector phases so n[j, j+1] = +i |n[j, j+1]|.
    phases = np.ones(k, dtype=complex)
    for j in range(k - 1):
        elem = phases[j].conjugate() * n_op[j, j + 1]
        if abs(elem) > 0:
            phases[j + 1] = 1j * abs(elem) / elem
    n_op = phases.conjugate()[:, None] * n_op * phases[None, :]
    n_op = 0.5 * (n_op + n_op.conj().T)  # symmetrize rounding noise

    omega_01 = float(energies[1]) if k >= 2 else math.nan
    alpha = float(2.0 * energies[1] - energies[2]) if k >= 3 else math.nan
    r = 0.5 * (spec.josephson_energy / (2.0 * spec.charging_energy)) ** 0.25
    return EigenModel(
        energies=energies.copy(),
        charge_op=n_op,
        omega_01=omega_01,
        anharmonicity_exact=alpha,
        zero_point_r=r,
        spec=spec,
    )


def build_model(spec: TransmonSpec) -> EigenModel:
    """Convenience wrapper: build, diagonalize, and project in one call."""
    return diagonalize_and_project(build_charge_hamiltonian(spec), spec)


def _spectral_gaps(ec, ej, ng, dim):
    # Lowest three levels only; used inside calibration where intermediate
    # (E_C, E_J) iterates may fall outside the validated transmon regime.
    h = _charge_hamiltonian(ec, ej, ng, dim)
    evals = scipy.linalg.eigh(h, eigvals_only=True, subset_by_index=(0, 2))
    omega_01 = evals[1] - evals[0]
    omega_12 = evals[2] - evals[1]
    return omega_01, omega_01 - omega_12


def calibrate(
    target_omega01: float,
    target_alpha: float,
    *,
    gate_charge: float = 0.0,
    charge_dimension: int = 201,
    kept_levels: int = 7,
    initial_spec: TransmonSpec | None = None,
    tolerance: float = TWO_PI * 1e3,
    max_iter: int = 100,
) -> TransmonSpec:
    """Find (E_C, E_J) whose exact spectrum matches the requested gaps.

    ``target_omega01`` is the 0-1 transition and ``target_alpha`` the
    difference ``omega_01 - omega_12``, both in rad/s.  Matching uses the
    full-cosine spectrum, not the asymptotic square-root formulas, so the
    returned spec reproduces the targets to ``tolerance`` (default
    2*pi*1 kHz) when rediagonalized.

    Raises
    ------
    CalibrationError
        If the root finder does not reach ``tolerance`` within
        ``max_iter`` residual evaluations.
    """
    if target_omega01 <= 0 or target_alpha <= 0:
        raise InvalidSpecError("calibration targets must be positive")
    if target_alpha >= target_omega01 / 10.0:
        raise InvalidSpecError("target_alpha must be below target_omega01 / 10")

    scale = target_omega01  # condition the solver on O(1) variables
    if initial_spec is not None:
        x0 = np.array(
            [initial_spec.charging_energy / scale, initial_spec.josephson_energy / scale]
        )
    else:
        x0 = np.array([target_alpha / scale, 69.0 * target_alpha / scale])

    def residual(x):
        omega, alpha = _spectral_gaps(x[0] * scale, x[1] * scale, gate_charge, charge_dimension)
        return [(omega - target_omega01) / scale, (alpha - target_alpha) / scale]

    sol = scipy.optimize.root(
        residual, x0, method="hybr", tol=1e-13, options={"maxfev": max_iter}
    )
    ec, ej = sol.x[0] * scale, sol.x[1] * scale
    omega, alpha = _spectral_gaps(ec, ej, gate_charge, charge_dimension)
    res_w, res_a = omega - target_omega01, alpha - target_alpha
    if abs(res_w) > tolerance or abs(res_a) > tolerance:
        raise CalibrationError(
            f"calibration stalled after {sol.nfev} evaluations: "
            f"residuals ({res_w:.3e}, {res_a:.3e}) rad/s exceed {tolerance:.3e}",
            residual_omega=res_w,
            residual_alpha=res_a,
        )
    return TransmonSpec(
        charging_energy=float(ec),
        josephson_energy=float(ej),
        gate_charge=gate_charge,
        charge_dimension=charge_dimension,
        kept_levels=kept_levels,
    )


def calibrated_model(
    target_omega01: float = DEFAULT_OMEGA_01,
    target_alpha: float = DEFAULT_ALPHA,
    **kwargs,
) -> EigenModel:
    """Calibrate to the targets and return the diagonalized model."""
    return build_model(calibrate(target_omega01, target_alpha, **kwargs))


def two_level_model(
    omega_01: float = DEFAULT_OMEGA_01, zero_point_r: float | None = None
) -> EigenModel:
    """Ideal two-level reference model.

    The charge operator is exactly ``[[0, i r], [-i r, 0]]``, so a kick of
    angle theta acts on the qubit as a clean theta rotation with no
    leakage.  Used for closed-form checks and discretization studies.
    """
    r = 1.0 if zero_point_r is None else float(zero_point_r)
    energies = np.array([0.0, omega_01])
    n_op = np.array([[0.0, 1j * r], [-1j * r, 0.0]], dtype=complex)
    return EigenModel(
        energies=energies,
        charge_op=n_op,
        omega_01=float(omega_01),
        anharmonicity_exact=math.nan,
        zero_point_r=r,
        spec=None,
    )


# JSON interchange: frequencies stored as linear GHz (value = rad_per_s / 2 pi / 1e9).
_GHZ = TWO_PI * 1e9


def model_to_dict(model: EigenModel) -> dict:
    """Serialize a model (units declared; frequencies as plain GHz numbers)."""
    doc = {
        "units": "GHz",
        "energies": (model.energies / _GHZ).tolist(),
        "charge_op_real": model.charge_op.real.tolist(),
        "charge_op_imag": model.charge_op.imag.tolist(),
        "omega_01": model.omega_01 / _GHZ,
        "anharmonicity_exact": model.anharmonicity_exact / _GHZ,
        "zero_point_r": model.zero_point_r,
    }
    if model.spec is not None:
        doc["spec"] = {
            "charging_energy": model.spec.charging_energy / _GHZ,
            "josephson_energy": model.spec.josephson_energy / _GHZ,
            "gate_charge": model.spec.gate_charge,
            "charge_dimension": model.spec.charge_dimension,
            "kept_levels": model.spec.kept_levels,
        }
    return doc


def model_from_dict(doc: dict) -> EigenModel:
    """Inverse of :func:`model_to_dict`."""
    if doc.get("units") != "GHz":
        raise InvalidSpecError(f"unsupported units field: {doc.get('units')!r}")
    spec = None
    if "spec" in doc:
        s = doc["spec"]
        spec = TransmonSpec(
            charging_energy=s["charging_energy"] * _GHZ,
            josephson_energy=s["josephson_energy"] * _GHZ,
            gate_charge=s["gate_charge"],
            charge_dimension=s["charge_dimension"],
            kept_levels=s["kept_levels"],
        )
    charge_op = np.array(doc["charge_op_real"]) + 1j * np.array(doc["charge_op_imag"])
    return EigenModel(
        energies=np.array(doc["energies"]) * _GHZ,
        charge_op=charge_op,
        omega_01=doc["omega_01"] * _GHZ,
        anharmonicity_exact=doc["anharmonicity_exact"] * _GHZ,
        zero_point_r=doc["zero_point_r"],
        spec=spec,
    )
