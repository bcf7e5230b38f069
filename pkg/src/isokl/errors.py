"""Exception types raised across the package.

Every exception derives from :class:`IsoklError` (itself a ``ValueError``) so
callers can catch the whole family at once.  Exceptions that describe a failed
identity carry the offending indices and the measured residual.
"""

from __future__ import annotations


class IsoklError(ValueError):
    """Base class for all package errors."""


class ZeroMatrix(IsoklError):
    pass


class DimensionMismatch(IsoklError):
    pass


class NotCompatible(IsoklError):
    pass


class NotProjection(IsoklError):
    def __init__(self, message: str, index: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class RankMismatch(IsoklError):
    pass


class NotUnitary(IsoklError):
    pass


class OrderMismatch(IsoklError):
    pass


class OddDimension(IsoklError):
    pass


class ConditionFailed(IsoklError):
    """A pairwise operator identity failed at ``(i, j)``."""

    def __init__(self, i: int, j: int, residual: float, message: str | None = None):
        self.i = i
        self.j = j
        self.residual = float(residual)
        super().__init__(message or f"condition failed at pair ({i}, {j}); residual {self.residual:.3e}")


class IsoclinicViolation(ConditionFailed):
    pass


class NotScaledIsometry(IsoklError):
    def __init__(self, index: int, spread: float):
        self.index = index
        self.spread = float(spread)
        super().__init__(
            f"operator {index} is not a nonzero scalar multiple of an isometry on the code "
            f"(eigenvalue spread {self.spread:.3e})"
        )


class HypothesisViolation(IsoklError):
    def __init__(self, premise: str, residual: float):
        self.premise = premise
        self.residual = float(residual)
        super().__init__(f"premise '{premise}' violated; residual {self.residual:.3e}")


class ParseError(IsoklError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


class SizeMismatch(IsoklError):
    pass


class TooLarge(IsoklError):
    pass


class InvalidGroup(IsoklError):
    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"invalid stabilizer group ({invariant}){': ' + detail if detail else ''}")


class MeasurementInvalid(IsoklError):
    def __init__(self, invariant: str, indices: tuple[int, ...], residual: float):
        self.invariant = invariant
        self.indices = indices
        self.residual = float(residual)
        super().__init__(f"measurement {invariant} failed at {indices}; residual {self.residual:.3e}")


class CrossPairFailed(IsoklError):
    def __init__(self, measurements: tuple[int, int], outcomes: tuple[int, int], residual: float):
        self.measurements = measurements
        self.outcomes = outcomes
        self.residual = float(residual)
        super().__init__(
            f"measurements {measurements} outcomes {outcomes} are not unbiased; "
            f"residual {self.residual:.3e}"
        )


class RelationViolated(IsoklError):
    def __init__(self, relation: str, indices: tuple[int, ...], residual: float):
        self.relation = relation
        self.indices = indices
        self.residual = float(residual)
        super().__init__(f"canonical relation '{relation}' violated at {indices}; residual {self.residual:.3e}")
