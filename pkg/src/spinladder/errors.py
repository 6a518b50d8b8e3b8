"""Exception types shared across the package."""


class SpinLadderError(Exception):
    """Base class for all package errors."""


class ParameterError(SpinLadderError, ValueError):
    """Invalid or inconsistent input parameters."""


class UnsupportedModelError(SpinLadderError):
    """Requested a model/boundary combination that is deliberately not provided."""


class ResourceLimitError(SpinLadderError):
    """A requested computation exceeds the configured dimension cap."""


class NumericsError(SpinLadderError):
    """A numerical routine failed to converge or violated a postcondition."""


class StepSizeError(SpinLadderError):
    """Consecutive rotating-frame snapshots overlap too little; refine the grid."""


class EnsembleError(SpinLadderError):
    """An ensemble run aborted; carries the per-sample status manifest."""

    def __init__(self, message, manifest=None):
        super().__init__(message)
        self.manifest = manifest or []
