"""Exception types shared across the package."""


class FreeThinError(Exception):
    """Base class for all package errors."""


class ResourceBoundError(FreeThinError):
    """A requested size exceeds a configured enumeration or memory bound."""


class PreconditionError(FreeThinError, ValueError):
    """Arguments violate a documented precondition."""


class SingularPivotError(FreeThinError, ArithmeticError):
    """An inductive solver hit a vanishing pivot.

    ``step`` is the order at which the pivot vanished and ``pivot`` its value.
    """

    def __init__(self, step, pivot, message=None):
        self.step = step
        self.pivot = pivot
        super().__init__(message or f"pivot vanished at step n={step} (pivot={pivot})")


class NumericalError(FreeThinError, ArithmeticError):
    """An iterative numerical method failed to converge."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
