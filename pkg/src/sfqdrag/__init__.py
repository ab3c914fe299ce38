"""sfqdrag: binary single-flux-quantum pulse schedules for transmon gates.

Simulates delta-kick control of a full-cosine transmon, searches compact
on-ramp/train/off-ramp schedules for high-fidelity single-qubit rotations,
and verifies them with unitary metrics, comb spectra, and Lindblad
channel simulations.
"""

__version__ = "0.1.0"

from .errors import (
    CalibrationError,
    DecodeError,
    DegenerateGateError,
    InvalidSpecError,
    NumericalFailureError,
    SearchSpaceError,
    SfqDragError,
)
from .metrics import GateReport, TargetGate, average_fidelity, error_split, pauli_decompose
from .open_system import (
    ChannelMap,
    NoiseConfig,
    SweepConfig,
    build_liouvillian,
    channel_fidelity,
    choi_matrix,
    evolve_channel,
    frequency_offset_scan,
    robustness_sweep,
    unitary_channel,
)
from .optimizer import (
    RampSearchResult,
    SearchSpace,
    angle_sweep,
    default_train_window,
    drag_prune_predicate,
    enumerate_ramps,
    search,
)
from .propagator import (
    Propagator,
    ProjectedGate,
    free_evolution,
    kick_unitary,
    project_computational,
    rwa_drive_propagator,
    sequence_propagator,
)
from .schedule import (
    RAMP_ALPHABETS,
    ClockConfig,
    CompactEncoding,
    PulseSchedule,
    RampCycle,
    decode_compact,
    encode_compact,
    expand_bits,
    mirror_off_ramp,
    schedule_from_dict,
    schedule_to_dict,
)
from .spectrum import (
    SpectrumTable,
    leak_frequency,
    leakage_suppression_ratio,
    pulse_spectrum,
    spectrum_magnitude,
)
from .transmon import (
    EigenModel,
    TransmonSpec,
    build_charge_hamiltonian,
    build_model,
    calibrate,
    calibrated_model,
    diagonalize_and_project,
    model_from_dict,
    model_to_dict,
    two_level_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
