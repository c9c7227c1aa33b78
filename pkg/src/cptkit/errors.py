"""Exception hierarchy shared by every cptkit module."""


class CptkitError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(CptkitError, ValueError):
    pass


class ValidationError(CptkitError, ValueError):
    pass


class DomainError(CptkitError, ValueError):
    pass


class CapacityError(CptkitError):
    """Requested construction exceeds the configured dimension cap."""


class ClosureError(CptkitError):
    """A symmetry operation maps a basis label outside the space."""

    def __init__(self, label, message=None):
        self.label = label
        super().__init__(message or f"image of label {label} is not in the space")


class PreconditionError(CptkitError):
    pass


class DegenerateDemoError(PreconditionError):
    """The initial state is stationary, so no violation can be exhibited."""


class UnsupportedOperationError(CptkitError):
    pass


class StructureError(CptkitError, ValueError):
    pass


class GridLookupError(CptkitError, LookupError):
    """Requested momentum shell is not on the grid."""
