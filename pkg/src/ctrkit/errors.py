"""Exception types raised across the toolkit.

Grouped here so callers can catch pipeline-level failures
(``UnmeasurableCaseError`` subclasses) separately from programming errors.
"""


class CtrkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(CtrkitError, ValueError):
    """Two grids that must share dimensions do not."""


class ZeroDimensionError(CtrkitError, ValueError):
    """A requested width or height is < 1."""


class EmptyMaskError(CtrkitError, ValueError):
    """A mask required to contain at least one set bit is empty."""


class ShapeMismatchError(CtrkitError, ValueError):
    """Tensor shapes are incompatible for the requested operation."""


class GraphNotBuiltError(CtrkitError, RuntimeError):
    """backward() called on a value with no recorded computation graph."""


class EmptyDatasetError(CtrkitError, ValueError):
    """Training requested on an empty dataset."""


class UnmeasurableCaseError(CtrkitError):
    """A per-case failure that the pipeline records instead of crashing."""

    reason = "Unmeasurable"


class TooFewComponentsError(UnmeasurableCaseError):
    """Lung mask yielded fewer than two connected components."""

    reason = "TooFewComponents"


class NoQualifyingComponentError(UnmeasurableCaseError):
    """No heart component clears the area threshold."""

    reason = "NoQualifyingComponent"


class EmptyComponentError(UnmeasurableCaseError):
    reason = "EmptyComponent"


class ZeroThoracicWidthError(UnmeasurableCaseError):
    """Degenerate lung extent: thoracic width would be zero."""

    reason = "ZeroThoracicWidth"


class MalformedFileError(CtrkitError, ValueError):
    """An image/mask file exists but cannot be parsed."""


class MissingMaskFileError(CtrkitError, ValueError):
    """A case routed to the file backend has no mask path."""


class ModelLoadError(CtrkitError, ValueError):
    """A serialized weights file is missing, corrupt, or incompatible."""


class MalformedManifestError(CtrkitError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCaseIdError(MalformedManifestError):
    pass


class DegenerateDenominatorError(CtrkitError, ValueError):
    """A statistic was requested from an empty confusion matrix."""


class IoFailureError(CtrkitError, OSError):
    """Report or overlay emission failed."""


class UnknownCaseError(CtrkitError, KeyError):
    """Review request names a case id that does not exist."""


class ResultsNotLoadedError(CtrkitError, RuntimeError):
    """Review service queried before a results directory was loaded."""


class IncompleteAdjustmentError(CtrkitError, ValueError):
    """Adjust verdict submitted without all six endpoints."""


class ValidationError(CtrkitError, ValueError):
    """Review submission failed validation (e.g. zero-width ID)."""
