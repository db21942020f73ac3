"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`QGraphError`, so callers (and the CLI) can catch one type.
"""

from __future__ import annotations


class QGraphError(Exception):
    """Base class for all package errors."""


class GraphValidationError(QGraphError, ValueError):
    """Malformed graph input."""


class NonPositiveLength(GraphValidationError):
    pass


class DisconnectedGraph(GraphValidationError):
    pass


class IndexOutOfRange(GraphValidationError, IndexError):
    pass


class ArityMismatch(GraphValidationError):
    pass


class UnknownFamily(GraphValidationError):
    pass


class UnknownFixture(UnknownFamily):
    pass


class ParamMismatch(GraphValidationError):
    pass


class InfiniteCoupling(QGraphError, ValueError):
    """An infinite coupling reached code that needs a finite one."""


class PoleProximity(QGraphError, ArithmeticError):
    """The spectral point sits too close to a pole of the M-matrix."""

    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance


class DivisionNearZero(QGraphError, ArithmeticError):
    pass


class RankTolDegenerate(QGraphError, ArithmeticError):
    pass


class ScaledOverflow(QGraphError, OverflowError):
    pass


class BudgetExceeded(QGraphError, RuntimeError):
    pass


class MeshTooCoarse(QGraphError, ValueError):
    pass


class SizeMismatch(QGraphError, ValueError):
    pass


class SearchSpaceTooLarge(QGraphError, ValueError):
    pass


class MixedTypes(QGraphError, ValueError):
    pass
