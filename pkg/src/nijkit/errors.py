"""Exception hierarchy.

Errors fall into two families that the CLI maps to distinct exit statuses:
``InputError`` (malformed input, usage problems) and ``MathematicalObstruction``
(a mathematical check failed or a solver refused the problem).
"""

from __future__ import annotations


class NijkitError(Exception):
    """Base class for every error raised by this package."""


class InputError(NijkitError, ValueError):
    pass


class MathematicalObstruction(NijkitError):
    pass


# --- kernel -----------------------------------------------------------------


class ParseError(InputError):
    def __init__(self, message: str, position: int | None = None, source: str | None = None):
        self.position = position
        self.source = source
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownIdentifier(ParseError):
    pass


class ChartMismatch(InputError):
    pass


class DivisionByZero(NijkitError, ZeroDivisionError):
    pass


class EvaluationError(MathematicalObstruction):
    """A denominator vanishes at the requested point."""


class NotAFullSquare(MathematicalObstruction):
    def __init__(self, message: str, power: int | None = None):
        self.power = power
        super().__init__(message)


class SingularMatrix(MathematicalObstruction):
    pass


# --- exterior ---------------------------------------------------------------


class DegreeOverflow(InputError):
    """Forms above degree 3 are not represented."""


# --- pncompat ---------------------------------------------------------------


class DegenerateOmega(MathematicalObstruction):
    pass


class NotSemisimpleAtPoint(MathematicalObstruction):
    pass


class UnsupportedEigenvalues(MathematicalObstruction):
    pass


class ShapeMismatch(MathematicalObstruction):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message)


class PDependence(InputError):
    """A function that must depend on base coordinates only involves fibre coordinates."""


class CertificationFailure(MathematicalObstruction):
    pass


# --- pdesolve ---------------------------------------------------------------


class EigenvalueCollision(MathematicalObstruction):
    pass


class NonIntegrableMonomial(MathematicalObstruction):
    pass


class ConsistencyViolation(MathematicalObstruction):
    pass


class InvalidProblem(MathematicalObstruction):
    pass


class NotCompanionAtPoint(MathematicalObstruction):
    pass


class SingularReduction(MathematicalObstruction):
    pass


class IncompatibleSystem(MathematicalObstruction):
    pass


class ResidualFailure(NijkitError, AssertionError):
    """A solver produced a series that does not satisfy its equations; indicates a bug."""


class PipelineError(MathematicalObstruction):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
