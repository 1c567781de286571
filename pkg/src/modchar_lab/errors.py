"""Error taxonomy shared by all modules, mapped to CLI exit codes."""
from __future__ import annotations


class ModcharError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ModcharError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ModcharError):
    """Malformed or inconsistent user input."""


class NonPrimitiveBaseError(ValidationError):
    """Base character of a modification is not primitive."""


class CompositeModulusKeyError(ValidationError):
    """A modification key is not prime."""


class PhaseCollisionError(ValidationError):
    """A modification phase reproduces the base character value."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class ConvergenceError(ModcharError):
    """Numeric scheme failed to reach the target error."""

    def __init__(self, message: str, attempted_k: int | None = None):
        super().__init__(message)
        self.attempted_k = attempted_k


class PrecisionError(ModcharError):
    """Fixed-point precision budget exceeded."""


class ResourceLimitError(ModcharError):
    """Configured memory or size budget exceeded."""


class CapabilityError(ModcharError):
    """Requested operation is outside the implemented envelope."""


# CLI mapping: validation/domain problems are exit 2, resource/precision exit 3.
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3


def exit_code_for(exc: ModcharError) -> int:
    if isinstance(exc, (ConvergenceError, PrecisionError, ResourceLimitError)):
        return EXIT_RESOURCE
    return EXIT_VALIDATION
