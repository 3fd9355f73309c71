"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class AnagenError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(AnagenError):
    pass


class ConvergenceFailure(AnagenError):
    pass


class NotPositive(AnagenError):
    pass


class ShapeMismatch(AnagenError, ValueError):
    pass


class NotAState(AnagenError):
    pass


class NotFaithful(NotAState):
    pass


class UnsupportedGroup(AnagenError):
    pass


class SideMismatch(AnagenError):
    pass


class IndexOutOfRange(AnagenError, IndexError):
    pass


class TailBoundViolated(AnagenError):
    pass


class PrecisionLoss(AnagenError):
    """The requested contour shift amplifies rounding error past the target accuracy."""


class NotDense(AnagenError):
    pass


class NotInvariant(AnagenError):
    pass


class NotInGraph(AnagenError):
    pass


class IsometryOnlyCarrier(AnagenError):
    pass


class WrongExponent(AnagenError):
    pass


class NotDiagonal(AnagenError):
    pass


class NotInUnitBall(AnagenError):
    pass


class EmptyIntertwinerSpace(AnagenError):
    pass


class NotBlockCompatible(AnagenError):
    pass


class ConfigInvalid(AnagenError):
    pass


class ParseError(AnagenError):
    def __init__(self, message: str, position: int | None = None) -> None:
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
