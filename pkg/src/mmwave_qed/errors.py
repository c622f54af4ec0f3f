"""Error taxonomy shared by all modules.

The CLI maps these onto exit codes: configuration/range problems are exit 2
(the user can fix the input), numeric/fit/domain failures are exit 3 (the
computation itself went wrong).
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ToolkitError):
    """Invalid or structurally unsafe input (bad key, unsafe truncation, ...)."""


class RangeError(ToolkitError):
    """A numeric argument is outside its supported range."""


class DomainError(ToolkitError):
    """Mathematically undefined request (singularity, sign mismatch, degenerate input)."""


class NumericError(ToolkitError):
    """A numerical kernel failed (eigensolver, unitarity loss, defective decomposition)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FitError(ToolkitError):
    """An iterative fit did not converge; carries the last residual vector."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CalibrationWarning(UserWarning):
    """Soft inconsistency in calibration inputs (e.g. negative inferred photon number)."""
