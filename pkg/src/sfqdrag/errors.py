"""Exception types shared across the package."""


class SfqDragError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(SfqDragError, ValueError):
    """A physical specification or input value violates its invariants."""


class NumericalFailureError(SfqDragError, RuntimeError):
    """A numerical routine failed to converge or produced inconsistent results."""


class CalibrationError(NumericalFailureError):
    """Root finding on (E_C, E_J) did not reach the requested targets."""

    def __init__(self, message, residual_omega=None, residual_alpha=None):
        super().__init__(message)
        self.residual_omega = residual_omega
        self.residual_alpha = residual_alpha


class DecodeError(SfqDragError, ValueError):
    """A compact register image cannot be decoded into a schedule."""


class SearchSpaceError(SfqDragError, ValueError):
    """A search space is malformed, oversized, or empty after pruning."""


class DegenerateGateError(SfqDragError, ValueError):
    """A projected gate is too close to zero for a Pauli decomposition."""
