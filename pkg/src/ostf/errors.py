"""Exception hierarchy shared across the package."""


class OstfError(Exception):
    """Base class for all errors raised by this package."""


class NonPowerOfTwoError(OstfError):
    """Grid resolution is not a power of two (spectral operators require it)."""


class EmptyBandError(OstfError):
    """Requested spectral band contains no usable shells."""


class UnderResolvedError(OstfError):
    """Requested radius is too small for the grid spacing."""


class TooWideError(OstfError):
    """Requested radius exceeds the admissible fraction of the domain."""


class GridMismatchError(OstfError):
    """Operands live on different grids or time ladders."""


class MissingPressureError(OstfError):
    """Operation requires pressure data that the fields do not carry."""


class OffGridPointError(OstfError):
    """Requested evaluation point is not a grid node."""


class CostGuardError(OstfError):
    """Refused a quadrature whose cost would be quadratic in the grid size."""


class DegenerateCurveError(OstfError):
    """Curve has zero values on the fit window; no exponent fit possible."""


class ContainerError(OstfError):
    """Base class for on-disk container problems."""


class NotAContainerError(ContainerError):
    """File does not start with the container magic."""


class CorruptContainerError(ContainerError):
    """File is structurally damaged; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ShapeMismatchError(ContainerError):
    """Array payload does not match the shapes declared in the header."""


class InvalidTimesError(ContainerError):
    """Snapshot times are not strictly increasing."""


class VersionMismatchError(ContainerError):
    """Container was written by an incompatible format version."""
