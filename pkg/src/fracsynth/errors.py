"""Exception types shared across the pipeline."""


class FracsynthError(Exception):
    """Base class for all package errors."""


class EmptyCatalogue(FracsynthError):
    """No grid point qualified for the parameter catalogue."""


class OutOfRange(FracsynthError):
    """Input values outside the documented domain."""


class ShapeMismatch(FracsynthError):
    """Array shapes inconsistent with each other or with a plan."""


class DegenerateInput(FracsynthError):
    """Input carries no usable signal (e.g. all zeros)."""


class PlanMismatch(FracsynthError):
    """Transform plan does not match the data it is applied to."""


class SizeGuard(FracsynthError):
    """Brute-force path refused an input above its size bound."""


class SingleFrame(FracsynthError):
    """Temporal operation applied to fewer than two frames."""


class NonFiniteObjective(FracsynthError):
    """Iterative solver produced a non-finite objective value."""


class ZeroNoise(FracsynthError):
    """Noise region has zero variance; ratio undefined."""


class FitFailure(FracsynthError):
    """Parametric edge fit did not find a usable edge."""


class TooFewFits(FracsynthError):
    """Not enough frames produced a successful edge fit."""


class ContainerError(FracsynthError):
    """Base class for array-container format errors."""


class BadMagic(ContainerError):
    """File does not start with the container magic bytes."""


class TruncatedPayload(ContainerError):
    """Payload shorter than the header-declared size."""


class UnsupportedDtype(ContainerError):
    """Container dtype not one of the supported codes."""


class BadShape(ContainerError):
    """Container shape empty or non-positive."""


class IoError(FracsynthError):
    """Failed to read or write dataset files."""
