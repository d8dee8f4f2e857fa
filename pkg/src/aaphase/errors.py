"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class AAPhaseError(Exception):
    """Base class for every error raised by :mod:`aaphase`."""


class ConstraintMismatchError(AAPhaseError):
    """The parameter point does not satisfy the frequency relation a branch needs."""

    def __init__(self, message: str, ratio: float | None = None):
        super().__init__(message)
        self.ratio = ratio


class NoSolutionError(AAPhaseError):
    """A coupling constraint has no real solution (the required D0**2 is negative)."""

    def __init__(self, message: str, d0_squared: float | None = None):
        super().__init__(message)
        self.d0_squared = d0_squared


class NotCyclicError(AAPhaseError):
    """The state does not return to itself (up to a phase) at the requested time."""

    def __init__(self, message: str, fidelity_defect: float | None = None):
        super().__init__(message)
        self.fidelity_defect = fidelity_defect


class DegenerateNullspaceError(AAPhaseError):
    """Both singular values of a 2x2 cyclicity matrix vanish, so the state is not unique."""


class IntegrationError(AAPhaseError):
    """The numerical integrator hit its step cap before reaching the tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(message)
        self.error_estimate = error_estimate


class FormulaMismatchError(AAPhaseError):
    """Two equivalent closed forms disagreed beyond their cross-check tolerance."""
