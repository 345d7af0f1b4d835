"""Exception taxonomy shared across the package.

Validation errors (bad user input) and numerical failures are kept in
separate branches so callers can map them to distinct exit codes.
"""

from __future__ import annotations


class StarfluxError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(StarfluxError):
    """Input violates a structural precondition."""


class EmptySide(ValidationError):
    """A star network needs at least one incoming and one outgoing arc."""


class NonPositiveParameter(ValidationError):
    """Lengths, speeds, viscosities, widths and steps must be positive."""


class DimensionMismatch(ValidationError):
    """Array shape does not match the network layout."""


class AssumptionViolated(ValidationError):
    """Coupling matrix fails symmetry, sign, or connectivity requirements."""


class InfeasibleTheta(ValidationError):
    """No admissible coupling magnitude exists for the requested weights."""


class InvalidGamma(ValidationError):
    """Transmission weights are negative or columns do not sum to one."""


class ConfigError(ValidationError):
    """Malformed JSON configuration; message carries file and field path."""


class NumericalError(StarfluxError):
    """A numerical procedure failed to produce a trustworthy result."""


class SingularMatrix(NumericalError):
    """Pivot collapsed during factorization of a node or boundary system."""


class NoConvergence(NumericalError):
    """An iteration hit its budget without meeting its tolerance."""


class WidthOverflow(NumericalError):
    """A smoothing transition cannot fit inside its allowed interval."""


class LinearSolveFailure(NumericalError):
    """Sparse solve returned non-finite values."""


class UnstableConfig(UserWarning):
    """Grid too coarse for the requested viscosity; results may smear."""
